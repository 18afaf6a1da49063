#include "drawparse/annoparse.hpp"

#include <array>
#include <cmath>

#include "drawparse/text_util.hpp"

namespace drawparse {

namespace {

constexpr char32_t kDiameter = 0x2300;        // ⌀
constexpr char32_t kPlusMinus = 0x00B1;       // ±
constexpr char32_t kMinusSign = 0x2212;       // −
constexpr char32_t kDegree = 0x00B0;          // °
constexpr char32_t kSquareSym = 0x25A1;       // □
constexpr char32_t kCounterbore = 0x2334;     // ⌴
constexpr char32_t kCountersink = 0x2335;     // ⌵
constexpr char32_t kDepth = 0x21A7;           // ↧
constexpr char32_t kCircledM = 0x24C2;        // Ⓜ
constexpr char32_t kCircledL = 0x24C1;        // Ⓛ
constexpr char32_t kCircledS = 0x24C8;        // Ⓢ

struct GdtSymbolEntry {
    char32_t symbol;
    GdtCharacteristic characteristic;
    const char* name;
};

constexpr std::array<GdtSymbolEntry, 14> kGdtSymbols{{
    {0x23E4, GdtCharacteristic::Straightness, "straightness"},
    {0x23E5, GdtCharacteristic::Flatness, "flatness"},
    {0x25CB, GdtCharacteristic::Circularity, "circularity"},
    {0x232D, GdtCharacteristic::Cylindricity, "cylindricity"},
    {0x2312, GdtCharacteristic::ProfileOfLine, "profile_of_line"},
    {0x2313, GdtCharacteristic::ProfileOfSurface, "profile_of_surface"},
    {0x2220, GdtCharacteristic::Angularity, "angularity"},
    {0x22A5, GdtCharacteristic::Perpendicularity, "perpendicularity"},
    {0x2225, GdtCharacteristic::Parallelism, "parallelism"},
    {0x2316, GdtCharacteristic::Position, "position"},
    {0x25CE, GdtCharacteristic::Concentricity, "concentricity"},
    {0x232F, GdtCharacteristic::Symmetry, "symmetry"},
    {0x2197, GdtCharacteristic::CircularRunout, "circular_runout"},
    {0x2330, GdtCharacteristic::TotalRunout, "total_runout"},
}};

const GdtSymbolEntry* find_gdt_symbol(char32_t cp) {
    for (const auto& e : kGdtSymbols)
        if (e.symbol == cp) return &e;
    return nullptr;
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool is_alpha(char32_t c) { return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z'); }
bool is_space(char32_t c) { return c == U' ' || c == U'\t'; }

bool valid_datum_letter(char32_t c) {
    return is_upper(c) && c != U'I' && c != U'O' && c != U'Q';
}

// Code-point cursor with offset-bearing diagnostics.
class Cursor {
  public:
    explicit Cursor(std::string_view text) : t_(utf8_decode(text)) {}

    bool eof() const { return pos_ >= t_.size(); }
    std::size_t pos() const { return pos_; }
    char32_t peek(std::size_t d = 0) const {
        return pos_ + d < t_.size() ? t_.cps[pos_ + d] : U'\0';
    }
    void advance(std::size_t n = 1) { pos_ += n; }
    void skip_ws() {
        while (!eof() && is_space(peek())) advance();
    }

    // Case-insensitive ASCII keyword at the cursor, consumed on match.
    bool match_keyword(std::string_view kw) {
        for (std::size_t i = 0; i < kw.size(); ++i) {
            const char32_t c = peek(i);
            if (!is_alpha(c) && c != U'(' && c != U')' && c != U'/' && c != U'+' && c != U'-')
                return false;
            char lc = static_cast<char>(c < 128 ? c : 0);
            if (std::tolower(static_cast<unsigned char>(lc)) !=
                std::tolower(static_cast<unsigned char>(kw[i])))
                return false;
        }
        advance(kw.size());
        return true;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }
    [[noreturn]] void fail_at(std::size_t off, const std::string& msg) const {
        throw ParseError(off, msg);
    }

    // number = digits ["." digits]; thousands separators rejected.
    double parse_number(const char* what) {
        const std::size_t start = pos_;
        if (!is_digit(peek()) && !(peek() == U'.' && is_digit(peek(1))))
            fail(std::string("expected ") + what);
        std::string digits;
        while (is_digit(peek())) {
            digits.push_back(static_cast<char>(peek()));
            advance();
        }
        if (peek() == U',' && is_digit(peek(1)))
            fail("thousands separators are not supported");
        if (peek() == U'.') {
            digits.push_back('.');
            advance();
            if (!is_digit(peek())) fail("expected digits after decimal point");
            while (is_digit(peek())) {
                digits.push_back(static_cast<char>(peek()));
                advance();
            }
        }
        try {
            return std::stod(digits);
        } catch (const std::exception&) {
            fail_at(start, std::string("invalid ") + what);
        }
    }

    std::optional<MaterialModifier> try_modifier() {
        if (peek() == kCircledM) { advance(); return MaterialModifier::MaxMaterial; }
        if (peek() == kCircledL) { advance(); return MaterialModifier::LeastMaterial; }
        if (peek() == kCircledS) { advance(); return MaterialModifier::RegardlessOfSize; }
        if (peek() == U'(') {
            const char32_t c = peek(1);
            if ((c == U'M' || c == U'L' || c == U'S') && peek(2) == U')') {
                advance(3);
                if (c == U'M') return MaterialModifier::MaxMaterial;
                if (c == U'L') return MaterialModifier::LeastMaterial;
                return MaterialModifier::RegardlessOfSize;
            }
        }
        return std::nullopt;
    }

    // "⌀" or ASCII "dia"
    bool try_diameter_mark() {
        if (peek() == kDiameter) {
            advance();
            return true;
        }
        return match_keyword("dia");
    }

    bool try_degree_mark() {
        if (peek() == kDegree) {
            advance();
            return true;
        }
        return match_keyword("deg");
    }

  private:
    Utf8Text t_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string_view gdt_characteristic_name(GdtCharacteristic c) {
    return kGdtSymbols[static_cast<std::size_t>(c)].name;
}

GdtCharacteristic gdt_characteristic_from_name(std::string_view name) {
    for (const auto& e : kGdtSymbols)
        if (name == e.name) return e.characteristic;
    throw ValidationError("unknown geometric characteristic '" + std::string(name) + "'");
}

char32_t gdt_characteristic_symbol(GdtCharacteristic c) {
    return kGdtSymbols[static_cast<std::size_t>(c)].symbol;
}

bool gdt_is_form_tolerance(GdtCharacteristic c) {
    return c == GdtCharacteristic::Straightness || c == GdtCharacteristic::Flatness ||
           c == GdtCharacteristic::Circularity || c == GdtCharacteristic::Cylindricity;
}

std::string_view material_modifier_letter(MaterialModifier m) {
    switch (m) {
        case MaterialModifier::MaxMaterial: return "M";
        case MaterialModifier::LeastMaterial: return "L";
        case MaterialModifier::RegardlessOfSize: return "S";
    }
    throw ValidationError("invalid MaterialModifier value");
}

MaterialModifier material_modifier_from_letter(std::string_view letter) {
    if (letter == "M") return MaterialModifier::MaxMaterial;
    if (letter == "L") return MaterialModifier::LeastMaterial;
    if (letter == "S") return MaterialModifier::RegardlessOfSize;
    throw ValidationError("unknown material modifier '" + std::string(letter) + "'");
}

std::string_view measure_kind_name(MeasureKind k) {
    switch (k) {
        case MeasureKind::Linear: return "linear";
        case MeasureKind::Diameter: return "diameter";
        case MeasureKind::SphericalDiameter: return "spherical_diameter";
        case MeasureKind::Radius: return "radius";
        case MeasureKind::SphericalRadius: return "spherical_radius";
        case MeasureKind::Square: return "square";
        case MeasureKind::ThreadMetric: return "thread_metric";
        case MeasureKind::Angular: return "angular";
        case MeasureKind::Chamfer: return "chamfer";
    }
    throw ValidationError("invalid MeasureKind value");
}

MeasureKind measure_kind_from_name(std::string_view name) {
    for (int k = 0; k <= static_cast<int>(MeasureKind::Chamfer); ++k)
        if (name == measure_kind_name(static_cast<MeasureKind>(k)))
            return static_cast<MeasureKind>(k);
    throw ValidationError("unknown measure kind '" + std::string(name) + "'");
}

std::string_view roughness_parameter_name(RoughnessParameter p) {
    switch (p) {
        case RoughnessParameter::Ra: return "Ra";
        case RoughnessParameter::Rz: return "Rz";
        case RoughnessParameter::Rq: return "Rq";
        case RoughnessParameter::Rt: return "Rt";
    }
    throw ValidationError("invalid RoughnessParameter value");
}

std::string_view roughness_process_token(RoughnessProcess p) {
    switch (p) {
        case RoughnessProcess::Any: return "any";
        case RoughnessProcess::MaterialRemovalRequired: return "mrr";
        case RoughnessProcess::MaterialRemovalProhibited: return "mrp";
    }
    throw ValidationError("invalid RoughnessProcess value");
}

Tolerance Tolerance::symmetric(double v) {
    Tolerance t;
    t.type = Type::Symmetric;
    t.value = v;
    return t;
}

Tolerance Tolerance::asymmetric(double upper, double lower) {
    Tolerance t;
    t.type = Type::Asymmetric;
    t.upper = upper;
    t.lower = lower;
    return t;
}

Tolerance Tolerance::fit_class(std::string fit) {
    Tolerance t;
    t.type = Type::FitClass;
    t.fit = std::move(fit);
    return t;
}

// ---------------------------------------------------------------------------
// GD&T frames

GdtFrame parse_gdt(std::string_view text) {
    Cursor c(text);
    c.skip_ws();
    if (c.eof()) c.fail("empty annotation text");

    GdtFrame frame;
    const GdtSymbolEntry* sym = find_gdt_symbol(c.peek());
    if (!sym) {
        std::string shown;
        utf8_append(shown, c.peek());
        c.fail("unknown characteristic symbol '" + shown + "'");
    }
    frame.characteristic = sym->characteristic;
    c.advance();
    c.skip_ws();
    if (find_gdt_symbol(c.peek()))
        c.fail("composite frame: second characteristic symbol not supported");
    if (c.eof() || c.peek() != U'|') c.fail("expected '|' after characteristic");
    c.advance();
    c.skip_ws();

    // tolerance segment
    if (find_gdt_symbol(c.peek()))
        c.fail("composite frame: second characteristic symbol not supported");
    if (c.peek() == U'S' && (c.peek(1) == kDiameter ||
                             (c.peek(1) == U'd' || c.peek(1) == U'D'))) {
        c.advance();
        if (!c.try_diameter_mark()) c.fail("expected '⌀' after 'S'");
        frame.zone = ZoneShape::SphericalDiameter;
    } else if (valid_datum_letter(c.peek()) || c.peek() == U'I' || c.peek() == U'O' ||
               c.peek() == U'Q') {
        c.fail("datum segment before tolerance");
    } else if (c.try_diameter_mark()) {
        frame.zone = ZoneShape::Diameter;
    }
    if (c.peek() == U'-' || c.peek() == kMinusSign) c.fail("tolerance must be positive");
    const std::size_t tol_off = c.pos();
    frame.tolerance_value = c.parse_number("tolerance value");
    if (frame.tolerance_value <= 0.0) c.fail_at(tol_off, "tolerance must be positive");
    c.skip_ws();
    frame.material_modifier = c.try_modifier();
    c.skip_ws();

    // datum segments
    while (!c.eof()) {
        if (c.peek() != U'|') c.fail("unexpected trailing characters");
        c.advance();
        c.skip_ws();
        const std::size_t datum_off = c.pos();
        if (find_gdt_symbol(c.peek()))
            c.fail("composite frame: second characteristic symbol not supported");
        if (gdt_is_form_tolerance(frame.characteristic))
            c.fail_at(datum_off, "datums not allowed on a form tolerance");
        if (frame.datums.size() == 3) c.fail_at(datum_off, "at most 3 datum references");
        if (!is_upper(c.peek())) c.fail("expected datum letter");
        if (!valid_datum_letter(c.peek())) {
            std::string shown;
            utf8_append(shown, c.peek());
            c.fail("invalid datum letter '" + shown + "'");
        }
        DatumRef d;
        d.letters.push_back(static_cast<char>(c.peek()));
        c.advance();
        if (c.peek() == U'-') {
            c.advance();
            if (!valid_datum_letter(c.peek())) {
                std::string shown;
                utf8_append(shown, c.peek());
                c.fail("invalid datum letter '" + shown + "'");
            }
            d.letters.push_back('-');
            d.letters.push_back(static_cast<char>(c.peek()));
            c.advance();
        }
        d.modifier = c.try_modifier();
        frame.datums.push_back(std::move(d));
        c.skip_ws();
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Measures

namespace {

// fit class token: letter + 1-2 digits ("H7") or digit + letter ("6g")
std::optional<std::string> try_fit_class(Cursor& c) {
    std::string tok;
    if (is_alpha(c.peek()) && is_digit(c.peek(1))) {
        tok.push_back(static_cast<char>(c.peek()));
        tok.push_back(static_cast<char>(c.peek(1)));
        std::size_t n = 2;
        if (is_digit(c.peek(2))) {
            tok.push_back(static_cast<char>(c.peek(2)));
            n = 3;
        }
        if (is_alpha(c.peek(n)) || is_digit(c.peek(n))) return std::nullopt;
        c.advance(n);
        return tok;
    }
    if (is_digit(c.peek()) && is_alpha(c.peek(1)) && !is_alpha(c.peek(2)) && !is_digit(c.peek(2))) {
        tok.push_back(static_cast<char>(c.peek()));
        tok.push_back(static_cast<char>(c.peek(1)));
        c.advance(2);
        return tok;
    }
    return std::nullopt;
}

Tolerance parse_measure_tolerance(Cursor& c) {
    if (c.peek() == kPlusMinus || (c.peek() == U'+' && c.peek(1) == U'/' &&
                                   (c.peek(2) == U'-' || c.peek(2) == kMinusSign))) {
        if (c.peek() == kPlusMinus) c.advance();
        else c.advance(3);
        c.skip_ws();
        const std::size_t off = c.pos();
        const double v = c.parse_number("tolerance value");
        if (v <= 0.0) c.fail_at(off, "tolerance must be positive");
        return Tolerance::symmetric(v);
    }
    if (c.peek() == U'+') {
        const std::size_t start = c.pos();
        c.advance();
        const double upper = c.parse_number("upper deviation");
        c.skip_ws();
        if (c.peek() != U'/') c.fail("expected '/' between deviations");
        c.advance();
        c.skip_ws();
        double sign = 0.0;
        if (c.peek() == U'-' || c.peek() == kMinusSign) sign = -1.0;
        else if (c.peek() == U'+') sign = 1.0;
        else c.fail("expected signed lower deviation");
        c.advance();
        const double lower = sign * c.parse_number("lower deviation");
        if (upper < lower) c.fail_at(start, "asymmetric deviations out of order");
        return Tolerance::asymmetric(upper, lower);
    }
    if (auto fit = try_fit_class(c)) return Tolerance::fit_class(*fit);
    c.fail("unrecognized tolerance");
}

}  // namespace

MeasureSpec parse_measure(std::string_view text) {
    Cursor c(text);
    c.skip_ws();
    if (c.eof()) c.fail("empty annotation text");

    MeasureSpec m;
    if (c.peek() == U'(') {
        m.reference = true;
        c.advance();
        c.skip_ws();
    }
    if (c.peek() == U'-' || c.peek() == kMinusSign) c.fail("negative nominal");
    if (c.peek() == kPlusMinus || c.peek() == U'+') c.fail("tolerance without a nominal value");

    bool have_body = false;
    if (is_digit(c.peek()) || c.peek() == U'.') {
        const std::size_t first_off = c.pos();
        const double first = c.parse_number("nominal value");
        c.skip_ws();
        if (c.peek() == U'x' || c.peek() == U'X') {
            // count prefix or chamfer leg
            c.advance();
            c.skip_ws();
            if (first <= 0.0 || first != std::floor(first) || first > 1e6)
                c.fail_at(first_off, "count must be a positive integer");
            m.count = static_cast<int>(first);
            if (is_digit(c.peek()) || c.peek() == U'.') {
                const std::size_t nom_off = c.pos();
                const double second = c.parse_number("nominal value");
                c.skip_ws();
                m.kind = c.try_degree_mark() ? MeasureKind::Chamfer : MeasureKind::Linear;
                m.nominal = second;
                if (m.nominal <= 0.0) c.fail_at(nom_off, "nominal must be positive");
                have_body = true;
            }
        } else if (c.try_degree_mark()) {
            m.kind = MeasureKind::Angular;
            m.nominal = first;
            if (m.nominal <= 0.0) c.fail_at(first_off, "nominal must be positive");
            have_body = true;
        } else {
            m.kind = MeasureKind::Linear;
            m.nominal = first;
            if (m.nominal <= 0.0) c.fail_at(first_off, "nominal must be positive");
            have_body = true;
        }
    }

    if (!have_body) {
        c.skip_ws();
        const std::size_t body_off = c.pos();
        if (c.eof()) c.fail("expected a measure body");
        if (c.peek() == U'M' && (is_digit(c.peek(1)) || c.peek(1) == U'.')) {
            c.advance();
            m.kind = MeasureKind::ThreadMetric;
            m.nominal = c.parse_number("thread size");
            if (m.nominal <= 0.0) c.fail_at(body_off, "nominal must be positive");
            if (c.peek() == U'x' || c.peek() == U'X') {
                c.advance();
                const std::size_t pitch_off = c.pos();
                m.thread_pitch = c.parse_number("thread pitch");
                if (*m.thread_pitch <= 0.0) c.fail_at(pitch_off, "thread pitch must be positive");
            }
        } else {
            if (c.peek() == U'S' && c.peek(1) == U'R') {
                c.advance(2);
                m.kind = MeasureKind::SphericalRadius;
            } else if (c.peek() == U'S' &&
                       (c.peek(1) == kDiameter || c.peek(1) == U'd' || c.peek(1) == U'D')) {
                c.advance();
                if (!c.try_diameter_mark()) c.fail("expected '⌀' after 'S'");
                m.kind = MeasureKind::SphericalDiameter;
            } else if (c.peek() == U'R') {
                c.advance();
                m.kind = MeasureKind::Radius;
            } else if (c.peek() == kSquareSym || (c.peek() == U's' && c.peek(1) == U'q')) {
                if (c.peek() == kSquareSym) c.advance();
                else c.advance(2);
                m.kind = MeasureKind::Square;
            } else if (c.peek() == kCounterbore || c.peek() == kCountersink || c.peek() == kDepth) {
                m.kind = MeasureKind::Linear;
                std::string q;
                utf8_append(q, c.peek());
                m.qualifier = q;
                c.advance();
            } else if (c.try_diameter_mark()) {
                m.kind = MeasureKind::Diameter;
            } else {
                std::string shown;
                utf8_append(shown, c.peek());
                c.fail("unrecognized measure prefix '" + shown + "'");
            }
            c.skip_ws();
            if (c.peek() == U'-' || c.peek() == kMinusSign) c.fail("negative nominal");
            const std::size_t nom_off = c.pos();
            m.nominal = c.parse_number("nominal value");
            if (m.nominal <= 0.0) c.fail_at(nom_off, "nominal must be positive");
        }
    }

    c.skip_ws();
    if (!c.eof() && c.peek() != U')') {
        m.tolerance = parse_measure_tolerance(c);
        c.skip_ws();
    }
    if (m.reference) {
        if (c.peek() != U')') c.fail("expected ')' closing reference dimension");
        c.advance();
        c.skip_ws();
    }
    if (!c.eof()) c.fail("unexpected trailing characters");
    if (m.kind == MeasureKind::Chamfer && !m.count)
        c.fail_at(0, "chamfer requires a leg count");
    return m;
}

// ---------------------------------------------------------------------------
// Roughness

RoughnessSpec parse_roughness(std::string_view text) {
    Cursor c(text);
    c.skip_ws();
    if (c.eof()) c.fail("empty annotation text");

    const std::size_t param_off = c.pos();
    std::string tok;
    while (is_alpha(c.peek())) {
        tok.push_back(static_cast<char>(c.peek()));
        c.advance();
    }
    const std::string lowered = ascii_lower(tok);
    RoughnessSpec r;
    if (lowered == "ra") r.parameter = RoughnessParameter::Ra;
    else if (lowered == "rz") r.parameter = RoughnessParameter::Rz;
    else if (lowered == "rq") r.parameter = RoughnessParameter::Rq;
    else if (lowered == "rt") r.parameter = RoughnessParameter::Rt;
    else c.fail_at(param_off, "unknown roughness parameter '" + tok + "'");

    c.skip_ws();
    if (c.peek() == U'-' || c.peek() == kMinusSign) c.fail("roughness value must be positive");
    const std::size_t val_off = c.pos();
    r.value = c.parse_number("roughness value");
    if (r.value <= 0.0) c.fail_at(val_off, "roughness value must be positive");

    c.skip_ws();
    if (!c.eof()) {
        const std::size_t proc_off = c.pos();
        std::string proc;
        while (is_alpha(c.peek())) {
            proc.push_back(static_cast<char>(c.peek()));
            c.advance();
        }
        const std::string p = ascii_lower(proc);
        if (p == "any") r.process = RoughnessProcess::Any;
        else if (p == "mrr") r.process = RoughnessProcess::MaterialRemovalRequired;
        else if (p == "mrp") r.process = RoughnessProcess::MaterialRemovalProhibited;
        else c.fail_at(proc_off, "unknown process token '" + proc + "'");
        c.skip_ws();
    }
    if (!c.eof()) c.fail("unexpected trailing characters");
    return r;
}

ParsedAnnotation parse_annotation(AnnotationClass cls, std::string_view text) {
    try {
        switch (cls) {
            case AnnotationClass::Measure: return parse_measure(text);
            case AnnotationClass::Gdt: return parse_gdt(text);
            case AnnotationClass::Roughness: return parse_roughness(text);
        }
        throw ValidationError("invalid AnnotationClass value");
    } catch (const ParseError& e) {
        throw ParseError(e.offset,
                         std::string(annotation_class_name(cls)) + ": " + e.detail);
    }
}

// ---------------------------------------------------------------------------
// Canonical rendering

namespace {

void append_modifier(std::string& out, MaterialModifier m) {
    switch (m) {
        case MaterialModifier::MaxMaterial: utf8_append(out, kCircledM); break;
        case MaterialModifier::LeastMaterial: utf8_append(out, kCircledL); break;
        case MaterialModifier::RegardlessOfSize: utf8_append(out, kCircledS); break;
    }
}

}  // namespace

std::string canonical_text(const GdtFrame& f) {
    std::string out;
    utf8_append(out, gdt_characteristic_symbol(f.characteristic));
    out.push_back('|');
    if (f.zone == ZoneShape::SphericalDiameter) out.push_back('S');
    if (f.zone != ZoneShape::None) utf8_append(out, kDiameter);
    out += format_double(f.tolerance_value);
    if (f.material_modifier) append_modifier(out, *f.material_modifier);
    for (const auto& d : f.datums) {
        out.push_back('|');
        out += d.letters;
        if (d.modifier) append_modifier(out, *d.modifier);
    }
    return out;
}

std::string canonical_text(const MeasureSpec& m) {
    std::string out;
    if (m.reference) out.push_back('(');
    if (m.count) {
        out += std::to_string(*m.count);
        out += m.kind == MeasureKind::Chamfer ? " x " : "x ";
    }
    switch (m.kind) {
        case MeasureKind::Linear:
            if (m.qualifier) out += *m.qualifier;
            out += format_double(m.nominal);
            break;
        case MeasureKind::Diameter:
            utf8_append(out, kDiameter);
            out += format_double(m.nominal);
            break;
        case MeasureKind::SphericalDiameter:
            out.push_back('S');
            utf8_append(out, kDiameter);
            out += format_double(m.nominal);
            break;
        case MeasureKind::Radius:
            out.push_back('R');
            out += format_double(m.nominal);
            break;
        case MeasureKind::SphericalRadius:
            out += "SR";
            out += format_double(m.nominal);
            break;
        case MeasureKind::Square:
            utf8_append(out, kSquareSym);
            out += format_double(m.nominal);
            break;
        case MeasureKind::ThreadMetric:
            out.push_back('M');
            out += format_double(m.nominal);
            if (m.thread_pitch) {
                out.push_back('x');
                out += format_double(*m.thread_pitch);
            }
            break;
        case MeasureKind::Angular:
        case MeasureKind::Chamfer:
            out += format_double(m.nominal);
            utf8_append(out, kDegree);
            break;
    }
    switch (m.tolerance.type) {
        case Tolerance::Type::None:
            break;
        case Tolerance::Type::Symmetric:
            out.push_back(' ');
            utf8_append(out, kPlusMinus);
            out += format_double(m.tolerance.value);
            break;
        case Tolerance::Type::Asymmetric: {
            out += " ";
            if (m.tolerance.upper >= 0.0) out.push_back('+');
            out += format_double(m.tolerance.upper);
            out.push_back('/');
            if (m.tolerance.lower >= 0.0) out.push_back('+');
            out += format_double(m.tolerance.lower);
            break;
        }
        case Tolerance::Type::FitClass:
            out.push_back(' ');
            out += m.tolerance.fit;
            break;
    }
    if (m.reference) out.push_back(')');
    return out;
}

std::string canonical_text(const RoughnessSpec& r) {
    std::string out(roughness_parameter_name(r.parameter));
    out.push_back(' ');
    out += format_double(r.value);
    if (r.process) {
        out.push_back(' ');
        out += roughness_process_token(*r.process);
    }
    return out;
}

std::string canonical_text(const ParsedAnnotation& a) {
    return std::visit([](const auto& v) { return canonical_text(v); }, a);
}

}  // namespace drawparse
