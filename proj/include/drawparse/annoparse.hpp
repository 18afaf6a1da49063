#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drawparse/classes.hpp"
#include "drawparse/errors.hpp"

namespace drawparse {

// The 14 geometric characteristics and their Unicode symbols. The first four
// are form tolerances and admit no datum references.
enum class GdtCharacteristic {
    Straightness,
    Flatness,
    Circularity,
    Cylindricity,
    ProfileOfLine,
    ProfileOfSurface,
    Angularity,
    Perpendicularity,
    Parallelism,
    Position,
    Concentricity,
    Symmetry,
    CircularRunout,
    TotalRunout,
};

std::string_view gdt_characteristic_name(GdtCharacteristic c);
GdtCharacteristic gdt_characteristic_from_name(std::string_view name);
char32_t gdt_characteristic_symbol(GdtCharacteristic c);
bool gdt_is_form_tolerance(GdtCharacteristic c);

enum class MaterialModifier { MaxMaterial, LeastMaterial, RegardlessOfSize };

std::string_view material_modifier_letter(MaterialModifier m);  // "M" / "L" / "S"
MaterialModifier material_modifier_from_letter(std::string_view letter);

enum class ZoneShape { None, Diameter, SphericalDiameter };

struct DatumRef {
    std::string letters;  // "A" or compound "A-B"
    std::optional<MaterialModifier> modifier;

    bool operator==(const DatumRef&) const = default;
};

struct GdtFrame {
    GdtCharacteristic characteristic = GdtCharacteristic::Straightness;
    ZoneShape zone = ZoneShape::None;
    double tolerance_value = 0.0;
    std::optional<MaterialModifier> material_modifier;
    std::vector<DatumRef> datums;

    bool operator==(const GdtFrame&) const = default;
};

enum class MeasureKind {
    Linear,
    Diameter,
    SphericalDiameter,
    Radius,
    SphericalRadius,
    Square,
    ThreadMetric,
    Angular,
    Chamfer,
};

std::string_view measure_kind_name(MeasureKind k);
MeasureKind measure_kind_from_name(std::string_view name);

struct Tolerance {
    enum class Type { None, Symmetric, Asymmetric, FitClass };
    Type type = Type::None;
    double value = 0.0;      // Symmetric
    double upper = 0.0;      // Asymmetric, signed
    double lower = 0.0;      // Asymmetric, signed
    std::string fit;         // FitClass, e.g. "H7", "6g"

    static Tolerance none() { return {}; }
    static Tolerance symmetric(double v);
    static Tolerance asymmetric(double upper, double lower);
    static Tolerance fit_class(std::string fit);

    bool operator==(const Tolerance&) const = default;
};

struct MeasureSpec {
    std::optional<int> count;  // "2x" prefix; chamfer leg count
    MeasureKind kind = MeasureKind::Linear;
    double nominal = 0.0;      // degrees for Angular/Chamfer, drawing units otherwise
    Tolerance tolerance;
    std::optional<double> thread_pitch;     // ThreadMetric only
    bool reference = false;                 // parenthesized "(...)" dimension
    std::optional<std::string> qualifier;   // preserved prefix symbol: "⌴", "⌵", "↧"

    bool operator==(const MeasureSpec&) const = default;
};

enum class RoughnessParameter { Ra, Rz, Rq, Rt };
enum class RoughnessProcess { Any, MaterialRemovalRequired, MaterialRemovalProhibited };

std::string_view roughness_parameter_name(RoughnessParameter p);
std::string_view roughness_process_token(RoughnessProcess p);  // "any" / "mrr" / "mrp"

struct RoughnessSpec {
    RoughnessParameter parameter = RoughnessParameter::Ra;
    double value = 0.0;  // micrometres
    std::optional<RoughnessProcess> process;

    bool operator==(const RoughnessSpec&) const = default;
};

using ParsedAnnotation = std::variant<GdtFrame, MeasureSpec, RoughnessSpec>;

// Grammar (normative copy in docs/grammar.ebnf):
//   frame = characteristic "|" tolerance { "|" datum }
//   tolerance = ["S"] ["⌀"] number [modifier]
//   datum = letter ["-" letter] [modifier]
// Inputs are expected NFC-normalized. ASCII spellings "dia", "(M)", "(L)",
// "(S)" are accepted and normalized. Throws ParseError with a code-point
// offset on rejection.
GdtFrame parse_gdt(std::string_view text);

//   measure = ["("] [count "x"] body [tolerance] [")"]
//   body = prefix? number | thread | angle | chamfer
MeasureSpec parse_measure(std::string_view text);

//   roughness = parameter number [process]
RoughnessSpec parse_roughness(std::string_view text);

// Dispatch by stage-2 class; grammar errors are rethrown with the class name
// prefixed to the diagnostic.
ParsedAnnotation parse_annotation(AnnotationClass cls, std::string_view text);

// Deterministic canonical rendering; parse(canonical_text(a)) == a.
std::string canonical_text(const GdtFrame& f);
std::string canonical_text(const MeasureSpec& m);
std::string canonical_text(const RoughnessSpec& r);
std::string canonical_text(const ParsedAnnotation& a);

}  // namespace drawparse
