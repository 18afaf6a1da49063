#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "drawparse/classes.hpp"
#include "drawparse/geometry.hpp"

namespace drawparse {

// Normalized one-object-per-line label formats.
//   detection:  "class cx cy w h"                      (region taxonomy)
//   oriented:   "class x1 y1 x2 y2 x3 y3 x4 y4"        (annotation taxonomy)
// Coordinates are fractions of the image size; readers denormalize to pixels
// and throw LabelError naming the offending line.

std::vector<std::pair<RegionClass, AxisAlignedBox>> read_det_labels(std::istream& in, int image_w,
                                                                    int image_h);
void write_det_labels(std::ostream& out,
                      const std::vector<std::pair<RegionClass, AxisAlignedBox>>& labels,
                      int image_w, int image_h);

// Corner quads are fitted to a canonical OrientedBox via the minimum-area
// enclosing rectangle (exact when the quad is a rectangle).
std::vector<std::pair<AnnotationClass, OrientedBox>> read_obb_labels(std::istream& in, int image_w,
                                                                     int image_h);
void write_obb_labels(std::ostream& out,
                      const std::vector<std::pair<AnnotationClass, OrientedBox>>& labels,
                      int image_w, int image_h);

// Prediction files append a confidence column to the label formats:
//   detection:  "class cx cy w h conf"
//   oriented:   "class x1 y1 ... y4 conf"
std::vector<ScoredAabb> read_det_predictions(std::istream& in, int image_w, int image_h);
std::vector<ScoredObb> read_obb_predictions(std::istream& in, int image_w, int image_h);

// One image--text supervision pair (pairs.jsonl line).
struct VlmPairRecord {
    std::string image_path;
    RegionKind kind = RegionKind::Measure;
    std::string ground_truth;

    bool operator==(const VlmPairRecord&) const = default;
};

std::vector<VlmPairRecord> read_pairs_jsonl(std::istream& in);
void write_pairs_jsonl(std::ostream& out, const std::vector<VlmPairRecord>& pairs);

// Per-drawing class histogram; indices follow the two class enumerations.
struct DrawingCounts {
    std::array<std::int64_t, kNumRegionClasses> regions{};
    std::array<std::int64_t, kNumAnnotationClasses> annotations{};

    bool operator==(const DrawingCounts&) const = default;
};

struct DatasetStats {
    std::array<std::int64_t, kNumRegionClasses> region_counts{};
    std::array<std::int64_t, kNumAnnotationClasses> annotation_counts{};
    std::map<std::string, DrawingCounts> per_drawing;  // keyed by file stem

    std::int64_t region_total() const;
    std::int64_t annotation_total() const;
    void merge(const DatasetStats& other);

    bool operator==(const DatasetStats&) const = default;
};

// Scans <root>/layout/*.txt (detection labels) and <root>/annotations/*.txt
// (oriented labels). File-level counting is independent per file; the
// parallel path fans out with OpenMP and merges in path order, so both
// paths produce identical stats.
DatasetStats compute_stats(const std::filesystem::path& root, bool parallel = true);

std::string stats_to_json(const DatasetStats& stats);

struct SplitSpec {
    std::vector<double> ratios;  // >= 2 positive entries summing to 1 (1e-9 slack)
    std::uint64_t seed = 0;
};

// SplitMix64 stream; the normative generator for dataset shuffles.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();

    // Uniform double in [0, 1) from the top 53 bits.
    double next_double();

  private:
    std::uint64_t state_;
};

// In-place Fisher-Yates driven by SplitMix64: i = n-1..1, j = next() % (i+1).
void seeded_shuffle(std::vector<std::string>& ids, std::uint64_t seed);

// Shuffle then cut at floor-cumulative boundaries, floor(n*cum + 1e-9); the
// last part absorbs the remainder. Parts partition the input. Throws
// ValidationError on duplicate ids or bad ratios.
std::vector<std::vector<std::string>> split_dataset(const std::vector<std::string>& ids,
                                                    const SplitSpec& spec);

}  // namespace drawparse
