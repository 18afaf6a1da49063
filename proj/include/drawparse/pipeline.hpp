#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "drawparse/classes.hpp"
#include "drawparse/geometry.hpp"
#include "drawparse/schema.hpp"

namespace drawparse {

// Page image reference; geometry runs on (width, height), real backends load
// source_path themselves.
struct DrawingRef {
    std::string drawing_id;
    std::string source_path;
    int width = 0;
    int height = 0;
};

// Loads a `<stem>.drawing.json` descriptor {drawing_id, source_path, width,
// height}.
DrawingRef load_drawing_ref(const std::filesystem::path& path);

// All descriptors under a directory, sorted by filename.
std::vector<DrawingRef> scan_drawing_dir(const std::filesystem::path& dir);

struct RegionDetection {
    RegionClass cls = RegionClass::View;
    AxisAlignedBox box;  // drawing coordinates
    double confidence = 0.0;
};

struct AnnotationDetection {
    AnnotationClass cls = AnnotationClass::Measure;
    OrientedBox obb;  // view-local until remapped
    double confidence = 0.0;
};

struct ViewCropRef {
    std::string drawing_id;
    std::string view_id;
    AxisAlignedBox crop;  // drawing coordinates of the padded crop
};

struct PatchRef {
    std::string drawing_id;
    std::string key;  // stable patch key, see docs/replay_format.md
    RegionKind kind = RegionKind::Measure;
    AxisAlignedBox bbox;  // drawing coordinates
};

// Stage-1 backend contract (region detector).
class RegionDetectorPort {
  public:
    virtual ~RegionDetectorPort() = default;
    virtual std::vector<RegionDetection> detect(const DrawingRef& drawing) = 0;
};

// Stage-2 backend contract (oriented annotation detector, view-local output).
class AnnotationDetectorPort {
  public:
    virtual ~AnnotationDetectorPort() = default;
    virtual std::vector<AnnotationDetection> detect(const ViewCropRef& view) = 0;
};

// Stage-3 backend contract. Distinct instances serve the alphabetical role
// (title block, notes) and the numerical role (annotations).
class TextReaderPort {
  public:
    virtual ~TextReaderPort() = default;
    virtual std::string read(const PatchRef& patch) = 0;
};

enum class ReaderRole { Alphabetical, Numerical };

struct PipelineConfig {
    double nms_iou_threshold = 0.45;
    double min_confidence_stage1 = 0.25;
    double min_confidence_stage2 = 0.25;
    double crop_padding = 4.0;
    // Fixed routing: text regions go to the alphabetical reader, annotation
    // patches to the numerical reader.
    std::map<RegionClass, ReaderRole> routing{{RegionClass::TitleBlock, ReaderRole::Alphabetical},
                                              {RegionClass::Notes, ReaderRole::Alphabetical}};

    // Flat `key = value` config file; every key optional.
    static PipelineConfig load(const std::filesystem::path& path);
};

struct Ports {
    RegionDetectorPort& regions;
    AnnotationDetectorPort& annotations;
    TextReaderPort& alphabetical;
    TextReaderPort& numerical;
};

// Stage 1: detect, drop below min confidence, clamp to the image, class-wise
// NMS, deterministic ordering.
std::vector<RegionDetection> run_stage1(const DrawingRef& drawing, RegionDetectorPort& detector,
                                        const PipelineConfig& cfg);

struct CropResult {
    AxisAlignedBox crop;
    Vec2 origin;  // top-left of the crop in drawing coordinates
};

// Pad then clamp to the image; throws ValidationError when the box misses
// the image entirely.
CropResult crop_region(const DrawingRef& drawing, const AxisAlignedBox& box, double padding);

struct ViewWork {
    std::string view_id;
    AxisAlignedBox bbox;  // detected view box
    AxisAlignedBox crop;  // padded crop
};

// Orders stage-1 view boxes by (y, x) of the top-left corner, assigns ids
// v1, v2, ... in that order, and computes the padded crops.
std::vector<ViewWork> plan_views(const DrawingRef& drawing,
                                 const std::vector<RegionDetection>& stage1,
                                 const PipelineConfig& cfg);

// Stage 2 for one view: detect in the crop, filter, class-wise NMS in local
// coordinates, remap to drawing coordinates, deterministic ordering.
std::vector<AnnotationDetection> run_stage2_view(const DrawingRef& drawing, const ViewWork& view,
                                                 AnnotationDetectorPort& detector,
                                                 const PipelineConfig& cfg);

// Stage 2 over all planned views, keyed by view id.
std::map<std::string, std::vector<AnnotationDetection>> run_stage2(
    const DrawingRef& drawing, const std::vector<ViewWork>& views,
    AnnotationDetectorPort& detector, const PipelineConfig& cfg);

struct Stage3Output {
    TitleBlockFields title_block;
    std::vector<std::string> notes;
    std::map<std::string, std::vector<AnnotationRecord>> annotations;  // by view_id
};

// Stage 3: title-block and notes regions go to the alphabetical reader,
// annotation patches to the numerical reader. Reader failures and grammar
// rejections degrade per item; they never abort the drawing.
Stage3Output run_stage3(const DrawingRef& drawing, const std::vector<RegionDetection>& stage1,
                        const std::vector<ViewWork>& views,
                        const std::map<std::string, std::vector<AnnotationDetection>>& stage2,
                        const Ports& ports, const PipelineConfig& cfg);

// Full pipeline for one drawing: stages 1 -> 2 -> 3, then the merge.
// Stage-1 or stage-2 backend failures abort the drawing (exception).
UnifiedDrawing run_pipeline(const DrawingRef& drawing, const Ports& ports,
                            const PipelineConfig& cfg);

struct DrawingResult {
    std::string drawing_id;
    bool ok = false;
    std::string error;        // abort reason when !ok
    std::string output_path;  // written file when ok
    std::string summary;      // one human-readable line
};

// Processes drawings independently (OpenMP, `workers` threads; <= 0 means
// the OpenMP default) and writes `<drawing_id>.unified.json` per drawing.
// Results come back in input order regardless of scheduling. Ports must be
// safe for concurrent invocation.
std::vector<DrawingResult> run_batch(const std::vector<DrawingRef>& drawings, const Ports& ports,
                                     const PipelineConfig& cfg,
                                     const std::filesystem::path& out_dir, int workers);

// ---------------------------------------------------------------------------
// Replay backend: pre-recorded detections and strings, the deterministic
// stand-in for all three neural ports.

struct ReplayManifest {
    struct DrawingEntry {
        std::vector<RegionDetection> regions;
        std::map<std::string, std::vector<AnnotationDetection>> annotations;  // by view_id
        std::map<std::string, std::string> texts;                             // by patch key
    };
    std::map<std::string, DrawingEntry> drawings;

    static ReplayManifest load(const std::filesystem::path& path);
    static ReplayManifest from_json_text(std::string_view text);
};

class ReplayRegionDetector : public RegionDetectorPort {
  public:
    explicit ReplayRegionDetector(const ReplayManifest& manifest) : manifest_(manifest) {}
    std::vector<RegionDetection> detect(const DrawingRef& drawing) override;

  private:
    const ReplayManifest& manifest_;
};

class ReplayAnnotationDetector : public AnnotationDetectorPort {
  public:
    explicit ReplayAnnotationDetector(const ReplayManifest& manifest) : manifest_(manifest) {}
    std::vector<AnnotationDetection> detect(const ViewCropRef& view) override;

  private:
    const ReplayManifest& manifest_;
};

class ReplayTextReader : public TextReaderPort {
  public:
    ReplayTextReader(const ReplayManifest& manifest, ReaderRole role)
        : manifest_(manifest), role_(role) {}
    std::string read(const PatchRef& patch) override;

  private:
    const ReplayManifest& manifest_;
    ReaderRole role_;
};

}  // namespace drawparse
