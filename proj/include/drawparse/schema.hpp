#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drawparse/annoparse.hpp"
#include "drawparse/classes.hpp"
#include "drawparse/geometry.hpp"

namespace drawparse {

// Canonical title-block key set; anything else lands in `extra`.
inline constexpr std::array<std::string_view, 11> kTitleBlockKeys{
    "part_name", "drawing_number", "revision",  "material", "scale",   "units",
    "general_tolerance", "finish", "drawn_by",  "date",     "company",
};

bool is_canonical_title_block_key(std::string_view key);

struct TitleBlockFields {
    std::map<std::string, std::string> fields;  // canonical keys only
    std::map<std::string, std::string> extra;   // nonstandard keys, preserved

    bool empty() const { return fields.empty() && extra.empty(); }
    void set(std::string key, std::string value);  // routes to fields or extra

    bool operator==(const TitleBlockFields&) const = default;
};

struct AnnotationRecord {
    AnnotationClass cls = AnnotationClass::Measure;
    OrientedBox obb;  // drawing coordinates
    double confidence = 0.0;
    std::string raw_text;
    std::optional<ParsedAnnotation> parsed;
    std::optional<std::string> parse_error;

    // Normalizes the stored angle to 9 significant digits so value equality
    // coincides with byte equality of the serialized form.
    static AnnotationRecord make(AnnotationClass cls, const OrientedBox& obb, double confidence,
                                 std::string raw_text, std::optional<ParsedAnnotation> parsed,
                                 std::optional<std::string> parse_error);

    bool operator==(const AnnotationRecord&) const = default;
};

struct ViewRecord {
    std::string view_id;
    AxisAlignedBox bbox;  // drawing coordinates
    std::vector<AnnotationRecord> annotations;

    bool operator==(const ViewRecord&) const = default;
};

struct UnifiedDrawing {
    std::string drawing_id;
    std::string source_path;
    int image_width = 0;
    int image_height = 0;
    TitleBlockFields title_block;
    std::vector<std::string> notes;
    std::vector<ViewRecord> views;

    bool operator==(const UnifiedDrawing&) const = default;
};

// Structural invariants; empty result means the document is valid. Each
// violation names the offending field path and the rule it breaks.
std::vector<Violation> validate(const UnifiedDrawing& d);

// Informational findings that do not invalidate a document (currently:
// overlapping view boxes, which can duplicate annotations).
std::vector<Violation> validate_info(const UnifiedDrawing& d);

// Canonical JSON bytes: UTF-8, lexicographically sorted object keys, arrays
// in stored order, shortest round-trip reals, one trailing newline. Equal
// documents serialize to equal bytes. Throws SchemaError when validation
// fails.
std::string serialize_unified(const UnifiedDrawing& d);

// Inverse of serialize_unified; tolerant of unknown title-block keys (kept
// in `extra`). Throws JsonError on malformed JSON and SchemaError (with
// field paths) on structural violations.
UnifiedDrawing parse_unified(std::string_view bytes);

// Canonical JSON rendering of one parsed annotation (same encoding as the
// `parsed` field inside unified documents), with a trailing newline.
std::string parsed_annotation_json(const ParsedAnnotation& a);

}  // namespace drawparse
