#include "drawparse/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drawparse/annoparse.hpp"
#include "drawparse/errors.hpp"
#include "drawparse/text_util.hpp"

namespace drawparse {

using nlohmann::json;

namespace {

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw JsonError(e.byte, path.string() + ": " + e.what());
    }
}

}  // namespace

DrawingRef load_drawing_ref(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    if (!j.is_object() || !j.contains("drawing_id") || !j.contains("width") ||
        !j.contains("height"))
        throw ValidationError(path.string() + ": descriptor needs drawing_id, width, height");
    DrawingRef d;
    d.drawing_id = j["drawing_id"].get<std::string>();
    d.source_path = j.value("source_path", std::string{});
    d.width = j["width"].get<int>();
    d.height = j["height"].get<int>();
    if (d.drawing_id.empty()) throw ValidationError(path.string() + ": drawing_id must be nonempty");
    if (d.width <= 0 || d.height <= 0)
        throw ValidationError(path.string() + ": image size must be positive");
    return d;
}

std::vector<DrawingRef> scan_drawing_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 13 &&
            name.substr(name.size() - 13) == ".drawing.json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<DrawingRef> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_drawing_ref(f));
    return out;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path.string());
    PipelineConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        double num = 0.0;
        try {
            std::size_t used = 0;
            num = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": invalid numeric value '" + value + "'");
        }
        if (key == "nms_iou_threshold") cfg.nms_iou_threshold = num;
        else if (key == "min_confidence_stage1") cfg.min_confidence_stage1 = num;
        else if (key == "min_confidence_stage2") cfg.min_confidence_stage2 = num;
        else if (key == "crop_padding") cfg.crop_padding = num;
        else
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": unknown config key '" + key + "'");
    }
    if (!(cfg.nms_iou_threshold >= 0.0 && cfg.nms_iou_threshold <= 1.0))
        throw ValidationError("nms_iou_threshold must lie in [0,1]");
    if (!(cfg.min_confidence_stage1 >= 0.0 && cfg.min_confidence_stage1 <= 1.0))
        throw ValidationError("min_confidence_stage1 must lie in [0,1]");
    if (!(cfg.min_confidence_stage2 >= 0.0 && cfg.min_confidence_stage2 <= 1.0))
        throw ValidationError("min_confidence_stage2 must lie in [0,1]");
    if (!(cfg.crop_padding >= 0.0)) throw ValidationError("crop_padding must be >= 0");
    return cfg;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

std::optional<AxisAlignedBox> clamp_to_image(const AxisAlignedBox& box, const DrawingRef& d) {
    const double x0 = std::max(box.x_min, 0.0);
    const double y0 = std::max(box.y_min, 0.0);
    const double x1 = std::min(box.x_max, double(d.width));
    const double y1 = std::min(box.y_max, double(d.height));
    if (x0 >= x1 || y0 >= y1) return std::nullopt;
    return AxisAlignedBox::make(x0, y0, x1, y1);
}

void check_confidence(double c, const std::string& context) {
    if (!(c >= 0.0 && c <= 1.0))
        throw BackendError(context + ": backend returned confidence outside [0,1]");
}

}  // namespace

std::vector<RegionDetection> run_stage1(const DrawingRef& drawing, RegionDetectorPort& detector,
                                        const PipelineConfig& cfg) {
    std::vector<RegionDetection> raw;
    try {
        raw = detector.detect(drawing);
    } catch (const BackendError& e) {
        throw BackendError("drawing '" + drawing.drawing_id + "': " + e.what());
    }
    std::vector<ScoredAabb> scored;
    for (const auto& det : raw) {
        check_confidence(det.confidence, "drawing '" + drawing.drawing_id + "'");
        if (det.confidence < cfg.min_confidence_stage1) continue;
        const auto clamped = clamp_to_image(det.box, drawing);
        if (!clamped) continue;
        scored.push_back({static_cast<int>(det.cls), *clamped, det.confidence});
    }
    const auto kept = nms(scored, cfg.nms_iou_threshold);
    std::vector<RegionDetection> out;
    out.reserve(kept.size());
    for (const auto& k : kept)
        out.push_back({static_cast<RegionClass>(k.class_id), k.box, k.confidence});
    std::sort(out.begin(), out.end(), [](const RegionDetection& a, const RegionDetection& b) {
        if (a.cls != b.cls) return a.cls < b.cls;
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
        return a.box.y_min < b.box.y_min;
    });
    return out;
}

CropResult crop_region(const DrawingRef& drawing, const AxisAlignedBox& box, double padding) {
    if (!clamp_to_image(box, drawing))
        throw ValidationError("drawing '" + drawing.drawing_id +
                              "': crop box does not overlap the image");
    const auto padded = AxisAlignedBox::make(box.x_min - padding, box.y_min - padding,
                                             box.x_max + padding, box.y_max + padding);
    const auto crop = clamp_to_image(padded, drawing);
    return {*crop, {crop->x_min, crop->y_min}};
}

std::vector<AnnotationDetection> run_stage2_view(const DrawingRef& drawing, const ViewWork& view,
                                                 AnnotationDetectorPort& detector,
                                                 const PipelineConfig& cfg) {
    std::vector<AnnotationDetection> raw;
    try {
        raw = detector.detect({drawing.drawing_id, view.view_id, view.crop});
    } catch (const BackendError& e) {
        throw BackendError("drawing '" + drawing.drawing_id + "' view '" + view.view_id +
                           "': " + e.what());
    }
    std::vector<ScoredObb> scored;
    for (const auto& det : raw) {
        check_confidence(det.confidence,
                         "drawing '" + drawing.drawing_id + "' view '" + view.view_id + "'");
        if (det.confidence < cfg.min_confidence_stage2) continue;
        scored.push_back({static_cast<int>(det.cls), det.obb, det.confidence});
    }
    const auto kept = nms(scored, cfg.nms_iou_threshold);
    std::vector<AnnotationDetection> out;
    out.reserve(kept.size());
    const Vec2 origin{view.crop.x_min, view.crop.y_min};
    for (const auto& k : kept)
        out.push_back(
            {static_cast<AnnotationClass>(k.class_id), remap_to_global(k.box, origin), k.confidence});
    std::sort(out.begin(), out.end(), [](const AnnotationDetection& a, const AnnotationDetection& b) {
        if (a.cls != b.cls) return a.cls < b.cls;
        if (a.obb.cy != b.obb.cy) return a.obb.cy < b.obb.cy;
        if (a.obb.cx != b.obb.cx) return a.obb.cx < b.obb.cx;
        return a.confidence > b.confidence;
    });
    return out;
}

namespace {

bool reading_order(const AxisAlignedBox& a, const AxisAlignedBox& b) {
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    if (a.x_min != b.x_min) return a.x_min < b.x_min;
    if (a.x_max != b.x_max) return a.x_max < b.x_max;
    return a.y_max < b.y_max;
}

// Title-block reader output is expected to be a flat JSON object of string
// values; anything else is preserved verbatim under an `extra` key.
void merge_title_block(TitleBlockFields& tb, const std::string& text,
                       const std::string& patch_key) {
    json j;
    bool object_of_strings = false;
    try {
        j = json::parse(text);
        object_of_strings = j.is_object();
        if (object_of_strings)
            for (const auto& [k, v] : j.items()) {
                (void)k;
                if (!v.is_string()) {
                    object_of_strings = false;
                    break;
                }
            }
    } catch (const json::parse_error&) {
        object_of_strings = false;
    }
    if (!object_of_strings) {
        tb.extra["unparsed_" + patch_key] = text;
        return;
    }
    for (const auto& [k, v] : j.items()) {
        // first title block wins on key conflicts
        if (is_canonical_title_block_key(k)) {
            tb.fields.emplace(k, v.get<std::string>());
        } else {
            tb.extra.emplace(k, v.get<std::string>());
        }
    }
}

}  // namespace

std::vector<ViewWork> plan_views(const DrawingRef& drawing,
                                 const std::vector<RegionDetection>& stage1,
                                 const PipelineConfig& cfg) {
    std::vector<ViewWork> views;
    for (const auto& det : stage1) {
        if (det.cls != RegionClass::View) continue;
        views.push_back({"", det.box, {}});
    }
    std::sort(views.begin(), views.end(),
              [](const ViewWork& a, const ViewWork& b) { return reading_order(a.bbox, b.bbox); });
    for (std::size_t i = 0; i < views.size(); ++i) {
        views[i].view_id = "v" + std::to_string(i + 1);
        views[i].crop = crop_region(drawing, views[i].bbox, cfg.crop_padding).crop;
    }
    return views;
}

std::map<std::string, std::vector<AnnotationDetection>> run_stage2(
    const DrawingRef& drawing, const std::vector<ViewWork>& views,
    AnnotationDetectorPort& detector, const PipelineConfig& cfg) {
    std::map<std::string, std::vector<AnnotationDetection>> out;
    for (const auto& view : views)
        out[view.view_id] = run_stage2_view(drawing, view, detector, cfg);
    return out;
}

Stage3Output run_stage3(const DrawingRef& drawing, const std::vector<RegionDetection>& stage1,
                        const std::vector<ViewWork>& views,
                        const std::map<std::string, std::vector<AnnotationDetection>>& stage2,
                        const Ports& ports, const PipelineConfig& cfg) {
    Stage3Output out;

    // text regions, reading order per class
    for (const RegionClass cls : {RegionClass::TitleBlock, RegionClass::Notes}) {
        std::vector<AxisAlignedBox> boxes;
        for (const auto& det : stage1)
            if (det.cls == cls) boxes.push_back(det.box);
        std::sort(boxes.begin(), boxes.end(), reading_order);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const std::string key =
                std::string(region_class_name(cls)) + "_" + std::to_string(i);
            const RegionKind kind =
                cls == RegionClass::TitleBlock ? RegionKind::TitleBlock : RegionKind::Notes;
            PatchRef patch{drawing.drawing_id, key, kind, boxes[i]};
            std::string text;
            try {
                text = nfc_normalize(ports.alphabetical.read(patch));
            } catch (const BackendError&) {
                continue;  // per-item degradation: the region is skipped
            }
            if (cls == RegionClass::TitleBlock) merge_title_block(out.title_block, text, key);
            else out.notes.push_back(text);
        }
    }

    // annotation patches through the numerical reader
    for (const auto& view : views) {
        auto& records = out.annotations[view.view_id];
        const auto it = stage2.find(view.view_id);
        if (it == stage2.end()) continue;
        std::array<int, kNumAnnotationClasses> class_counter{};
        for (const auto& det : it->second) {
            const int k = class_counter[static_cast<int>(det.cls)]++;
            const std::string key = view.view_id + "/" +
                                    std::string(annotation_class_name(det.cls)) + "_" +
                                    std::to_string(k);
            RegionKind kind = RegionKind::Measure;
            if (det.cls == AnnotationClass::Gdt) kind = RegionKind::Gdt;
            else if (det.cls == AnnotationClass::Roughness) kind = RegionKind::Roughness;
            const AxisAlignedBox hull = enclosing_aabb(det.obb);
            const auto patch_box = clamp_to_image(
                AxisAlignedBox::make(hull.x_min - cfg.crop_padding, hull.y_min - cfg.crop_padding,
                                     hull.x_max + cfg.crop_padding, hull.y_max + cfg.crop_padding),
                drawing);
            PatchRef patch{drawing.drawing_id, key, kind, patch_box ? *patch_box : hull};
            std::string raw;
            std::optional<ParsedAnnotation> parsed;
            std::optional<std::string> parse_error;
            try {
                raw = nfc_normalize(ports.numerical.read(patch));
                try {
                    parsed = parse_annotation(det.cls, raw);
                } catch (const ParseError& e) {
                    parse_error = e.what();
                }
            } catch (const BackendError& e) {
                parse_error = std::string("reader: ") + e.what();
            }
            records.push_back(AnnotationRecord::make(det.cls, det.obb, det.confidence,
                                                     std::move(raw), std::move(parsed),
                                                     std::move(parse_error)));
        }
    }
    return out;
}

UnifiedDrawing run_pipeline(const DrawingRef& drawing, const Ports& ports,
                            const PipelineConfig& cfg) {
    const auto stage1 = run_stage1(drawing, ports.regions, cfg);
    const auto views = plan_views(drawing, stage1, cfg);
    const auto stage2 = run_stage2(drawing, views, ports.annotations, cfg);
    auto stage3 = run_stage3(drawing, stage1, views, stage2, ports, cfg);

    UnifiedDrawing doc;
    doc.drawing_id = drawing.drawing_id;
    doc.source_path = drawing.source_path;
    doc.image_width = drawing.width;
    doc.image_height = drawing.height;
    doc.title_block = std::move(stage3.title_block);
    doc.notes = std::move(stage3.notes);
    for (const auto& view : views) {
        ViewRecord record;
        record.view_id = view.view_id;
        record.bbox = view.bbox;
        record.annotations = std::move(stage3.annotations[view.view_id]);
        doc.views.push_back(std::move(record));
    }
    return doc;
}

std::vector<DrawingResult> run_batch(const std::vector<DrawingRef>& drawings, const Ports& ports,
                                     const PipelineConfig& cfg,
                                     const std::filesystem::path& out_dir, int workers) {
    std::filesystem::create_directories(out_dir);
    std::vector<DrawingResult> results(drawings.size());
    const std::int64_t n = static_cast<std::int64_t>(drawings.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers > 0 ? workers : omp_get_max_threads())
    for (std::int64_t i = 0; i < n; ++i) {
        DrawingResult& res = results[i];
        res.drawing_id = drawings[i].drawing_id;
        try {
            const UnifiedDrawing doc = run_pipeline(drawings[i], ports, cfg);
            const std::string bytes = serialize_unified(doc);
            const auto out_path = out_dir / (doc.drawing_id + ".unified.json");
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw IoError("cannot write " + out_path.string());
            out << bytes;
            out.close();
            if (!out) throw IoError("cannot write " + out_path.string());

            std::size_t ann_count = 0;
            std::size_t err_count = 0;
            for (const auto& v : doc.views) {
                ann_count += v.annotations.size();
                for (const auto& a : v.annotations)
                    if (a.parse_error) ++err_count;
            }
            std::ostringstream summary;
            summary << doc.drawing_id << ": " << doc.views.size() << " views, " << ann_count
                    << " annotations, " << doc.notes.size() << " notes";
            if (err_count > 0) summary << ", " << err_count << " stage-3 errors";
            summary << " -> " << out_path.string();
            res.ok = true;
            res.output_path = out_path.string();
            res.summary = summary.str();
        } catch (const std::exception& e) {
            res.ok = false;
            res.error = e.what();
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Replay backend

namespace {

RegionDetection region_detection_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("class") || !j.contains("box") || !j.contains("confidence"))
        throw ValidationError(context + ": region entry needs class, box, confidence");
    const json& b = j["box"];
    if (!b.is_array() || b.size() != 4)
        throw ValidationError(context + ": region box must be [x_min, y_min, x_max, y_max]");
    RegionDetection det;
    det.cls = region_class_from_name(j["class"].get<std::string>());
    det.box = AxisAlignedBox::make(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                   b[3].get<double>());
    det.confidence = j["confidence"].get<double>();
    return det;
}

AnnotationDetection annotation_detection_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("class") || !j.contains("obb") || !j.contains("confidence"))
        throw ValidationError(context + ": annotation entry needs class, obb, confidence");
    const json& b = j["obb"];
    if (!b.is_array() || b.size() != 5)
        throw ValidationError(context + ": annotation obb must be [cx, cy, w, h, theta]");
    AnnotationDetection det;
    det.cls = annotation_class_from_name(j["class"].get<std::string>());
    det.obb = OrientedBox::make(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                b[3].get<double>(), b[4].get<double>());
    det.confidence = j["confidence"].get<double>();
    return det;
}

}  // namespace

ReplayManifest ReplayManifest::from_json_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw JsonError(e.byte, e.what());
    }
    if (!j.is_object() || !j.contains("drawings") || !j["drawings"].is_object())
        throw ValidationError("replay manifest needs a top-level 'drawings' object");
    ReplayManifest m;
    for (const auto& [id, entry] : j["drawings"].items()) {
        DrawingEntry e;
        if (entry.contains("regions")) {
            if (!entry["regions"].is_array())
                throw ValidationError("drawing '" + id + "': regions must be an array");
            for (const auto& r : entry["regions"])
                e.regions.push_back(region_detection_from_json(r, "drawing '" + id + "'"));
        }
        if (entry.contains("annotations")) {
            if (!entry["annotations"].is_object())
                throw ValidationError("drawing '" + id + "': annotations must map view ids");
            for (const auto& [view_id, list] : entry["annotations"].items()) {
                if (!list.is_array())
                    throw ValidationError("drawing '" + id + "' view '" + view_id +
                                          "': expected an array");
                auto& dst = e.annotations[view_id];
                for (const auto& a : list)
                    dst.push_back(annotation_detection_from_json(
                        a, "drawing '" + id + "' view '" + view_id + "'"));
            }
        }
        if (entry.contains("texts")) {
            if (!entry["texts"].is_object())
                throw ValidationError("drawing '" + id + "': texts must map patch keys");
            for (const auto& [key, value] : entry["texts"].items()) {
                if (!value.is_string())
                    throw ValidationError("drawing '" + id + "' text '" + key +
                                          "': expected a string");
                e.texts[key] = value.get<std::string>();
            }
        }
        m.drawings[id] = std::move(e);
    }
    return m;
}

ReplayManifest ReplayManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read replay manifest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::vector<RegionDetection> ReplayRegionDetector::detect(const DrawingRef& drawing) {
    const auto it = manifest_.drawings.find(drawing.drawing_id);
    if (it == manifest_.drawings.end())
        throw BackendError("replay manifest does not cover drawing '" + drawing.drawing_id + "'");
    return it->second.regions;
}

std::vector<AnnotationDetection> ReplayAnnotationDetector::detect(const ViewCropRef& view) {
    const auto it = manifest_.drawings.find(view.drawing_id);
    if (it == manifest_.drawings.end())
        throw BackendError("replay manifest does not cover drawing '" + view.drawing_id + "'");
    const auto vit = it->second.annotations.find(view.view_id);
    if (vit == it->second.annotations.end()) return {};  // view without annotations
    return vit->second;
}

std::string ReplayTextReader::read(const PatchRef& patch) {
    const bool alphabetical_kind =
        patch.kind == RegionKind::TitleBlock || patch.kind == RegionKind::Notes;
    if (alphabetical_kind != (role_ == ReaderRole::Alphabetical))
        throw BackendError("patch '" + patch.key + "' routed to the wrong reader role");
    const auto it = manifest_.drawings.find(patch.drawing_id);
    if (it == manifest_.drawings.end())
        throw BackendError("replay manifest does not cover drawing '" + patch.drawing_id + "'");
    const auto tit = it->second.texts.find(patch.key);
    if (tit == it->second.texts.end())
        throw BackendError("no replay text for patch '" + patch.key + "'");
    return tit->second;
}

}  // namespace drawparse
