#include "drawparse/schema.hpp"

#include <cmath>

#include <json.hpp>

#include "drawparse/text_util.hpp"

namespace drawparse {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kViewSlackPx = 2.0;

}  // namespace

bool is_canonical_title_block_key(std::string_view key) {
    for (const auto k : kTitleBlockKeys)
        if (k == key) return true;
    return false;
}

void TitleBlockFields::set(std::string key, std::string value) {
    if (is_canonical_title_block_key(key))
        fields[std::move(key)] = std::move(value);
    else
        extra[std::move(key)] = std::move(value);
}

AnnotationRecord AnnotationRecord::make(AnnotationClass cls, const OrientedBox& obb,
                                        double confidence, std::string raw_text,
                                        std::optional<ParsedAnnotation> parsed,
                                        std::optional<std::string> parse_error) {
    double t9 = round9(obb.theta);
    // Keep the 9-digit angle inside the canonical range when rounding lands
    // on the boundary.
    if (t9 >= kPi / 2) t9 = round9(obb.theta - 1e-9);
    if (t9 < -kPi / 2) t9 = round9(obb.theta + 1e-9);
    AnnotationRecord r;
    r.cls = cls;
    r.obb = OrientedBox::make(obb.cx, obb.cy, obb.w, obb.h, t9);
    r.confidence = confidence;
    r.raw_text = std::move(raw_text);
    r.parsed = std::move(parsed);
    r.parse_error = std::move(parse_error);
    return r;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_parsed_invariants(const ParsedAnnotation& p, const std::string& path,
                             std::vector<Violation>& out) {
    if (const auto* g = std::get_if<GdtFrame>(&p)) {
        if (!(g->tolerance_value > 0.0))
            out.push_back({path + ".tolerance_value", "tolerance_positive",
                           "tolerance value must be positive"});
        if (g->datums.size() > 3)
            out.push_back({path + ".datums", "datum_count", "at most 3 datum references"});
        if (gdt_is_form_tolerance(g->characteristic) && !g->datums.empty())
            out.push_back({path + ".datums", "form_no_datums",
                           "form tolerances carry no datum references"});
    } else if (const auto* m = std::get_if<MeasureSpec>(&p)) {
        if (!(m->nominal > 0.0))
            out.push_back({path + ".nominal", "nominal_positive", "nominal must be positive"});
        if (m->tolerance.type == Tolerance::Type::Asymmetric &&
            m->tolerance.upper < m->tolerance.lower)
            out.push_back({path + ".tolerance", "deviation_order",
                           "upper deviation must be >= lower deviation"});
        if (m->thread_pitch && m->kind != MeasureKind::ThreadMetric)
            out.push_back({path + ".thread_pitch", "pitch_thread_only",
                           "thread pitch only valid for thread_metric"});
        if (m->count && *m->count < 1)
            out.push_back({path + ".count", "count_positive", "count must be positive"});
    } else if (const auto* r = std::get_if<RoughnessSpec>(&p)) {
        if (!(r->value > 0.0))
            out.push_back({path + ".value", "value_positive", "roughness value must be positive"});
    }
}

bool parsed_matches_class(const ParsedAnnotation& p, AnnotationClass cls) {
    switch (cls) {
        case AnnotationClass::Measure: return std::holds_alternative<MeasureSpec>(p);
        case AnnotationClass::Gdt: return std::holds_alternative<GdtFrame>(p);
        case AnnotationClass::Roughness: return std::holds_alternative<RoughnessSpec>(p);
    }
    return false;
}

}  // namespace

std::vector<Violation> validate(const UnifiedDrawing& d) {
    std::vector<Violation> out;
    if (d.drawing_id.empty())
        out.push_back({"drawing_id", "drawing_id_nonempty", "drawing_id must be nonempty"});
    if (d.image_width <= 0 || d.image_height <= 0)
        out.push_back({"image_size", "image_size_positive", "image size must be positive"});
    for (const auto& [key, value] : d.title_block.fields) {
        (void)value;
        if (!is_canonical_title_block_key(key))
            out.push_back({"title_block." + key, "canonical_key",
                           "noncanonical key belongs in extra"});
    }
    std::map<std::string, int> seen_ids;
    for (std::size_t vi = 0; vi < d.views.size(); ++vi) {
        const auto& view = d.views[vi];
        const std::string vpath = "views[" + std::to_string(vi) + "]";
        if (view.view_id.empty())
            out.push_back({vpath + ".view_id", "view_id_nonempty", "view_id must be nonempty"});
        if (++seen_ids[view.view_id] == 2)
            out.push_back({vpath + ".view_id", "view_id_unique",
                           "duplicate view_id '" + view.view_id + "'"});
        for (std::size_t ai = 0; ai < view.annotations.size(); ++ai) {
            const auto& ann = view.annotations[ai];
            const std::string apath = vpath + ".annotations[" + std::to_string(ai) + "]";
            if (!(ann.confidence >= 0.0 && ann.confidence <= 1.0))
                out.push_back({apath + ".confidence", "confidence_range",
                               "confidence must lie in [0,1]"});
            if (ann.parsed && !parsed_matches_class(*ann.parsed, ann.cls))
                out.push_back({apath + ".parsed", "parsed_class_match",
                               "parsed record does not match class '" +
                                   std::string(annotation_class_name(ann.cls)) + "'"});
            if (ann.parsed) check_parsed_invariants(*ann.parsed, apath + ".parsed", out);
            const ConvexPolygon poly = obb_to_polygon(ann.obb);
            for (const Vec2 corner : poly.vertices) {
                if (corner.x < view.bbox.x_min - kViewSlackPx ||
                    corner.x > view.bbox.x_max + kViewSlackPx ||
                    corner.y < view.bbox.y_min - kViewSlackPx ||
                    corner.y > view.bbox.y_max + kViewSlackPx) {
                    out.push_back({apath + ".obb", "annotation_within_view",
                                   "annotation box outside its view (2 px slack)"});
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<Violation> validate_info(const UnifiedDrawing& d) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < d.views.size(); ++i) {
        for (std::size_t j = i + 1; j < d.views.size(); ++j) {
            if (iou(d.views[i].bbox, d.views[j].bbox) > 0.0)
                out.push_back({"views[" + std::to_string(i) + "]", "views_overlap",
                               "view '" + d.views[i].view_id + "' overlaps view '" +
                                   d.views[j].view_id + "'; annotations may be duplicated"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json aabb_to_json(const AxisAlignedBox& b) {
    return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

json obb_to_json(const OrientedBox& b) { return json::array({b.cx, b.cy, b.w, b.h, b.theta}); }

json parsed_to_json(const ParsedAnnotation& p) {
    json j = json::object();
    if (const auto* g = std::get_if<GdtFrame>(&p)) {
        j["characteristic"] = std::string(gdt_characteristic_name(g->characteristic));
        if (g->zone == ZoneShape::Diameter) j["zone"] = "diameter";
        else if (g->zone == ZoneShape::SphericalDiameter) j["zone"] = "spherical_diameter";
        j["tolerance_value"] = g->tolerance_value;
        if (g->material_modifier)
            j["material_modifier"] = std::string(material_modifier_letter(*g->material_modifier));
        json datums = json::array();
        for (const auto& d : g->datums) {
            json dj = json::object();
            dj["letters"] = d.letters;
            if (d.modifier) dj["modifier"] = std::string(material_modifier_letter(*d.modifier));
            datums.push_back(std::move(dj));
        }
        j["datums"] = std::move(datums);
    } else if (const auto* m = std::get_if<MeasureSpec>(&p)) {
        j["kind"] = std::string(measure_kind_name(m->kind));
        j["nominal"] = m->nominal;
        if (m->count) j["count"] = *m->count;
        switch (m->tolerance.type) {
            case Tolerance::Type::None: break;
            case Tolerance::Type::Symmetric:
                j["tolerance"] = {{"type", "symmetric"}, {"value", m->tolerance.value}};
                break;
            case Tolerance::Type::Asymmetric:
                j["tolerance"] = {{"type", "asymmetric"},
                                  {"upper", m->tolerance.upper},
                                  {"lower", m->tolerance.lower}};
                break;
            case Tolerance::Type::FitClass:
                j["tolerance"] = {{"type", "fit_class"}, {"fit", m->tolerance.fit}};
                break;
        }
        if (m->thread_pitch) j["thread_pitch"] = *m->thread_pitch;
        if (m->reference) j["reference"] = true;
        if (m->qualifier) j["qualifier"] = *m->qualifier;
    } else if (const auto* r = std::get_if<RoughnessSpec>(&p)) {
        j["parameter"] = std::string(roughness_parameter_name(r->parameter));
        j["value"] = r->value;
        if (r->process) j["process"] = std::string(roughness_process_token(*r->process));
    }
    return j;
}

json drawing_to_json(const UnifiedDrawing& d) {
    json j = json::object();
    j["drawing_id"] = d.drawing_id;
    j["source_path"] = d.source_path;
    j["image_size"] = json::array({d.image_width, d.image_height});
    json tb = json::object();
    for (const auto& [k, v] : d.title_block.fields) tb[k] = v;
    if (!d.title_block.extra.empty()) {
        json ex = json::object();
        for (const auto& [k, v] : d.title_block.extra) ex[k] = v;
        tb["extra"] = std::move(ex);
    }
    j["title_block"] = std::move(tb);
    j["notes"] = d.notes;
    json views = json::array();
    for (const auto& view : d.views) {
        json vj = json::object();
        vj["view_id"] = view.view_id;
        vj["bbox"] = aabb_to_json(view.bbox);
        json anns = json::array();
        for (const auto& ann : view.annotations) {
            json aj = json::object();
            aj["class"] = std::string(annotation_class_name(ann.cls));
            aj["obb"] = obb_to_json(ann.obb);
            aj["confidence"] = ann.confidence;
            aj["raw_text"] = ann.raw_text;
            if (ann.parsed) aj["parsed"] = parsed_to_json(*ann.parsed);
            if (ann.parse_error) aj["parse_error"] = *ann.parse_error;
            anns.push_back(std::move(aj));
        }
        vj["annotations"] = std::move(anns);
        views.push_back(std::move(vj));
    }
    j["views"] = std::move(views);
    return j;
}

}  // namespace

std::string serialize_unified(const UnifiedDrawing& d) {
    if (auto violations = validate(d); !violations.empty()) throw SchemaError(std::move(violations));
    return drawing_to_json(d).dump() + "\n";
}

std::string parsed_annotation_json(const ParsedAnnotation& a) {
    return parsed_to_json(a).dump() + "\n";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class DocReader {
  public:
    std::vector<Violation> violations;

    bool require(const json& j, const char* key, const std::string& path) {
        if (!j.contains(key)) {
            violations.push_back({path.empty() ? std::string(key) : path + "." + key, "required",
                                  std::string(key) + " required"});
            return false;
        }
        return true;
    }

    std::string read_string(const json& j, const std::string& path) {
        if (!j.is_string()) {
            violations.push_back({path, "type", "expected a string"});
            return {};
        }
        return j.get<std::string>();
    }

    double read_number(const json& j, const std::string& path) {
        if (!j.is_number()) {
            violations.push_back({path, "type", "expected a number"});
            return 0.0;
        }
        return j.get<double>();
    }

    std::optional<AxisAlignedBox> read_aabb(const json& j, const std::string& path) {
        if (!j.is_array() || j.size() != 4 || !j[0].is_number() || !j[1].is_number() ||
            !j[2].is_number() || !j[3].is_number()) {
            violations.push_back({path, "type", "expected [x_min, y_min, x_max, y_max]"});
            return std::nullopt;
        }
        try {
            return AxisAlignedBox::make(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                                        j[3].get<double>());
        } catch (const ValidationError& e) {
            violations.push_back({path, "bbox_valid", e.what()});
            return std::nullopt;
        }
    }

    std::optional<OrientedBox> read_obb(const json& j, const std::string& path) {
        if (!j.is_array() || j.size() != 5) {
            violations.push_back({path, "type", "expected [cx, cy, w, h, theta]"});
            return std::nullopt;
        }
        for (const auto& v : j)
            if (!v.is_number()) {
                violations.push_back({path, "type", "expected [cx, cy, w, h, theta]"});
                return std::nullopt;
            }
        try {
            return OrientedBox::make(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                                     j[3].get<double>(), j[4].get<double>());
        } catch (const ValidationError& e) {
            violations.push_back({path, "obb_valid", e.what()});
            return std::nullopt;
        }
    }

    std::optional<ParsedAnnotation> read_parsed(const json& j, AnnotationClass cls,
                                                const std::string& path) {
        if (!j.is_object()) {
            violations.push_back({path, "type", "expected an object"});
            return std::nullopt;
        }
        try {
            switch (cls) {
                case AnnotationClass::Gdt: return read_gdt(j, path);
                case AnnotationClass::Measure: return read_measure(j, path);
                case AnnotationClass::Roughness: return read_roughness(j, path);
            }
        } catch (const ValidationError& e) {
            violations.push_back({path, "parsed_valid", e.what()});
        }
        return std::nullopt;
    }

  private:
    ParsedAnnotation read_gdt(const json& j, const std::string& path) {
        GdtFrame g;
        if (require(j, "characteristic", path))
            g.characteristic =
                gdt_characteristic_from_name(read_string(j["characteristic"], path));
        if (require(j, "tolerance_value", path))
            g.tolerance_value = read_number(j["tolerance_value"], path + ".tolerance_value");
        if (j.contains("zone")) {
            const std::string z = read_string(j["zone"], path + ".zone");
            if (z == "diameter") g.zone = ZoneShape::Diameter;
            else if (z == "spherical_diameter") g.zone = ZoneShape::SphericalDiameter;
            else violations.push_back({path + ".zone", "enum", "unknown zone '" + z + "'"});
        }
        if (j.contains("material_modifier"))
            g.material_modifier = material_modifier_from_letter(
                read_string(j["material_modifier"], path + ".material_modifier"));
        if (j.contains("datums")) {
            if (!j["datums"].is_array()) {
                violations.push_back({path + ".datums", "type", "expected an array"});
            } else {
                for (const auto& dj : j["datums"]) {
                    DatumRef d;
                    if (require(dj, "letters", path + ".datums"))
                        d.letters = read_string(dj["letters"], path + ".datums.letters");
                    if (dj.contains("modifier"))
                        d.modifier = material_modifier_from_letter(
                            read_string(dj["modifier"], path + ".datums.modifier"));
                    g.datums.push_back(std::move(d));
                }
            }
        }
        return g;
    }

    ParsedAnnotation read_measure(const json& j, const std::string& path) {
        MeasureSpec m;
        if (require(j, "kind", path)) m.kind = measure_kind_from_name(read_string(j["kind"], path));
        if (require(j, "nominal", path)) m.nominal = read_number(j["nominal"], path + ".nominal");
        if (j.contains("count")) m.count = static_cast<int>(read_number(j["count"], path + ".count"));
        if (j.contains("tolerance")) {
            const json& t = j["tolerance"];
            const std::string type =
                t.is_object() && t.contains("type") ? t["type"].get<std::string>() : "";
            if (type == "symmetric")
                m.tolerance = Tolerance::symmetric(read_number(t["value"], path + ".tolerance.value"));
            else if (type == "asymmetric")
                m.tolerance = Tolerance::asymmetric(read_number(t["upper"], path + ".tolerance.upper"),
                                                    read_number(t["lower"], path + ".tolerance.lower"));
            else if (type == "fit_class")
                m.tolerance = Tolerance::fit_class(read_string(t["fit"], path + ".tolerance.fit"));
            else
                violations.push_back({path + ".tolerance", "enum", "unknown tolerance type"});
        }
        if (j.contains("thread_pitch"))
            m.thread_pitch = read_number(j["thread_pitch"], path + ".thread_pitch");
        if (j.contains("reference")) {
            if (!j["reference"].is_boolean())
                violations.push_back({path + ".reference", "type", "expected a boolean"});
            else
                m.reference = j["reference"].get<bool>();
        }
        if (j.contains("qualifier")) m.qualifier = read_string(j["qualifier"], path + ".qualifier");
        return m;
    }

    ParsedAnnotation read_roughness(const json& j, const std::string& path) {
        RoughnessSpec r;
        if (require(j, "parameter", path)) {
            const std::string p = read_string(j["parameter"], path + ".parameter");
            if (p == "Ra") r.parameter = RoughnessParameter::Ra;
            else if (p == "Rz") r.parameter = RoughnessParameter::Rz;
            else if (p == "Rq") r.parameter = RoughnessParameter::Rq;
            else if (p == "Rt") r.parameter = RoughnessParameter::Rt;
            else violations.push_back({path + ".parameter", "enum", "unknown parameter '" + p + "'"});
        }
        if (require(j, "value", path)) r.value = read_number(j["value"], path + ".value");
        if (j.contains("process")) {
            const std::string p = read_string(j["process"], path + ".process");
            if (p == "any") r.process = RoughnessProcess::Any;
            else if (p == "mrr") r.process = RoughnessProcess::MaterialRemovalRequired;
            else if (p == "mrp") r.process = RoughnessProcess::MaterialRemovalProhibited;
            else violations.push_back({path + ".process", "enum", "unknown process '" + p + "'"});
        }
        return r;
    }
};

}  // namespace

UnifiedDrawing parse_unified(std::string_view bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw JsonError(e.byte, e.what());
    }
    DocReader rd;
    UnifiedDrawing d;
    if (!j.is_object()) {
        rd.violations.push_back({"", "type", "top level must be an object"});
        throw SchemaError(std::move(rd.violations));
    }
    if (rd.require(j, "drawing_id", "")) d.drawing_id = rd.read_string(j["drawing_id"], "drawing_id");
    if (j.contains("source_path")) d.source_path = rd.read_string(j["source_path"], "source_path");
    if (rd.require(j, "image_size", "")) {
        const json& sz = j["image_size"];
        if (!sz.is_array() || sz.size() != 2 || !sz[0].is_number() || !sz[1].is_number()) {
            rd.violations.push_back({"image_size", "type", "expected [width, height]"});
        } else {
            d.image_width = static_cast<int>(sz[0].get<double>());
            d.image_height = static_cast<int>(sz[1].get<double>());
        }
    }
    if (rd.require(j, "title_block", "")) {
        const json& tb = j["title_block"];
        if (!tb.is_object()) {
            rd.violations.push_back({"title_block", "type", "expected an object"});
        } else {
            for (const auto& [key, value] : tb.items()) {
                if (key == "extra") {
                    if (!value.is_object()) {
                        rd.violations.push_back({"title_block.extra", "type", "expected an object"});
                        continue;
                    }
                    for (const auto& [ek, ev] : value.items())
                        d.title_block.extra[ek] =
                            rd.read_string(ev, "title_block.extra." + ek);
                } else {
                    d.title_block.set(key, rd.read_string(value, "title_block." + key));
                }
            }
        }
    }
    if (j.contains("notes")) {
        if (!j["notes"].is_array())
            rd.violations.push_back({"notes", "type", "expected an array"});
        else
            for (std::size_t i = 0; i < j["notes"].size(); ++i)
                d.notes.push_back(rd.read_string(j["notes"][i], "notes[" + std::to_string(i) + "]"));
    }
    if (j.contains("views")) {
        if (!j["views"].is_array()) rd.violations.push_back({"views", "type", "expected an array"});
        else {
            for (std::size_t vi = 0; vi < j["views"].size(); ++vi) {
                const json& vj = j["views"][vi];
                const std::string vpath = "views[" + std::to_string(vi) + "]";
                ViewRecord view;
                if (!vj.is_object()) {
                    rd.violations.push_back({vpath, "type", "expected an object"});
                    continue;
                }
                if (rd.require(vj, "view_id", vpath))
                    view.view_id = rd.read_string(vj["view_id"], vpath + ".view_id");
                if (rd.require(vj, "bbox", vpath))
                    if (auto b = rd.read_aabb(vj["bbox"], vpath + ".bbox")) view.bbox = *b;
                if (vj.contains("annotations")) {
                    if (!vj["annotations"].is_array()) {
                        rd.violations.push_back({vpath + ".annotations", "type", "expected an array"});
                    } else {
                        for (std::size_t ai = 0; ai < vj["annotations"].size(); ++ai) {
                            const json& aj = vj["annotations"][ai];
                            const std::string apath =
                                vpath + ".annotations[" + std::to_string(ai) + "]";
                            if (!aj.is_object()) {
                                rd.violations.push_back({apath, "type", "expected an object"});
                                continue;
                            }
                            AnnotationClass cls = AnnotationClass::Measure;
                            if (rd.require(aj, "class", apath)) {
                                try {
                                    cls = annotation_class_from_name(
                                        rd.read_string(aj["class"], apath + ".class"));
                                } catch (const ValidationError& e) {
                                    rd.violations.push_back({apath + ".class", "enum", e.what()});
                                }
                            }
                            OrientedBox obb = OrientedBox{0, 0, 1, 1, 0};
                            if (rd.require(aj, "obb", apath))
                                if (auto b = rd.read_obb(aj["obb"], apath + ".obb")) obb = *b;
                            double conf = 0.0;
                            if (rd.require(aj, "confidence", apath))
                                conf = rd.read_number(aj["confidence"], apath + ".confidence");
                            std::string raw;
                            if (rd.require(aj, "raw_text", apath))
                                raw = rd.read_string(aj["raw_text"], apath + ".raw_text");
                            std::optional<ParsedAnnotation> parsed;
                            if (aj.contains("parsed"))
                                parsed = rd.read_parsed(aj["parsed"], cls, apath + ".parsed");
                            std::optional<std::string> err;
                            if (aj.contains("parse_error"))
                                err = rd.read_string(aj["parse_error"], apath + ".parse_error");
                            view.annotations.push_back(AnnotationRecord::make(
                                cls, obb, conf, std::move(raw), std::move(parsed), std::move(err)));
                        }
                    }
                }
                d.views.push_back(std::move(view));
            }
        }
    }
    if (!rd.violations.empty()) throw SchemaError(std::move(rd.violations));
    if (auto violations = validate(d); !violations.empty())
        throw SchemaError(std::move(violations));
    return d;
}

}  // namespace drawparse
