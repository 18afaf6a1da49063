#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "drawparse/annoparse.hpp"
#include "drawparse/ingest.hpp"
#include "drawparse/text_util.hpp"

using namespace drawparse;

namespace {

struct CorpusEntry {
    std::string cls;
    std::string raw;
    std::string canonical;
};

struct NegativeEntry {
    std::string cls;
    std::string raw;
    std::size_t offset;
    std::string fragment;
};

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        const std::size_t tab = line.find('\t', begin);
        if (tab == std::string::npos) {
            out.push_back(line.substr(begin));
            break;
        }
        out.push_back(line.substr(begin, tab - begin));
        begin = tab + 1;
    }
    return out;
}

std::vector<CorpusEntry> load_corpus() {
    std::ifstream in(FIXTURES_DIR "/annotations_corpus.tsv");
    REQUIRE(in.good());
    std::vector<CorpusEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_tabs(line);
        REQUIRE(f.size() == 3);
        entries.push_back({f[0], f[1], f[2]});
    }
    return entries;
}

std::vector<NegativeEntry> load_negative_corpus() {
    std::ifstream in(FIXTURES_DIR "/annotations_corpus_negative.tsv");
    REQUIRE(in.good());
    std::vector<NegativeEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_tabs(line);
        REQUIRE(f.size() == 4);
        entries.push_back({f[0], f[1], std::size_t(std::stoul(f[2])), f[3]});
    }
    return entries;
}

}  // namespace

TEST_CASE("gdt grammar: representative frames") {
    const GdtFrame flat = parse_gdt("⏥|0.05");
    CHECK(flat.characteristic == GdtCharacteristic::Flatness);
    CHECK(flat.zone == ZoneShape::None);
    CHECK(flat.tolerance_value == 0.05);
    CHECK(flat.datums.empty());

    const GdtFrame pos = parse_gdt("⌖|⌀0.1|A|B|C");
    CHECK(pos.characteristic == GdtCharacteristic::Position);
    CHECK(pos.zone == ZoneShape::Diameter);
    CHECK(pos.tolerance_value == 0.1);
    REQUIRE(pos.datums.size() == 3);
    CHECK(pos.datums[0].letters == "A");
    CHECK(pos.datums[1].letters == "B");
    CHECK(pos.datums[2].letters == "C");

    const GdtFrame perp = parse_gdt("⊥|⌀0.2Ⓜ|A");
    CHECK(perp.characteristic == GdtCharacteristic::Perpendicularity);
    CHECK(perp.zone == ZoneShape::Diameter);
    CHECK(perp.tolerance_value == 0.2);
    CHECK(perp.material_modifier == MaterialModifier::MaxMaterial);
    REQUIRE(perp.datums.size() == 1);
    CHECK(perp.datums[0].letters == "A");

    try {
        parse_gdt("⌖|A|0.1");
        FAIL("expected rejection");
    } catch (const ParseError& e) {
        CHECK(e.offset == 2);
        CHECK(std::string(e.what()).find("datum segment before tolerance") != std::string::npos);
    }
}

TEST_CASE("measure grammar: representative callouts") {
    const MeasureSpec r5 = parse_measure("R5");
    CHECK(r5.kind == MeasureKind::Radius);
    CHECK(r5.nominal == 5);
    CHECK(r5.tolerance.type == Tolerance::Type::None);

    const MeasureSpec dia = parse_measure("⌀10 ±0.1");
    CHECK(dia.kind == MeasureKind::Diameter);
    CHECK(dia.nominal == 10);
    CHECK(dia.tolerance.type == Tolerance::Type::Symmetric);
    CHECK(dia.tolerance.value == 0.1);

    const MeasureSpec asym = parse_measure("10 +0.1/-0.05");
    CHECK(asym.kind == MeasureKind::Linear);
    CHECK(asym.tolerance.type == Tolerance::Type::Asymmetric);
    CHECK(asym.tolerance.upper == 0.1);
    CHECK(asym.tolerance.lower == -0.05);

    const MeasureSpec thread = parse_measure("2x M8x1.25");
    CHECK(thread.count == 2);
    CHECK(thread.kind == MeasureKind::ThreadMetric);
    CHECK(thread.nominal == 8);
    CHECK(thread.thread_pitch == 1.25);

    const MeasureSpec ang = parse_measure("45°");
    CHECK(ang.kind == MeasureKind::Angular);
    CHECK(ang.nominal == 45);
}

TEST_CASE("roughness grammar: representative callouts") {
    const RoughnessSpec ra = parse_roughness("Ra 3.2");
    CHECK(ra.parameter == RoughnessParameter::Ra);
    CHECK(ra.value == 3.2);
    CHECK_FALSE(ra.process.has_value());

    const RoughnessSpec rz = parse_roughness("Rz 6.3");
    CHECK(rz.parameter == RoughnessParameter::Rz);
    CHECK(rz.value == 6.3);

    try {
        parse_roughness("Rx 1");
        FAIL("expected rejection");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unknown roughness parameter 'Rx'") !=
              std::string::npos);
    }
}

TEST_CASE("parse_annotation dispatches by class and wraps errors") {
    const ParsedAnnotation g = parse_annotation(AnnotationClass::Gdt, "⏥|0.05");
    CHECK(std::holds_alternative<GdtFrame>(g));
    const ParsedAnnotation m = parse_annotation(AnnotationClass::Measure, "R5");
    CHECK(std::holds_alternative<MeasureSpec>(m));
    const ParsedAnnotation r = parse_annotation(AnnotationClass::Roughness, "Ra 3.2");
    CHECK(std::holds_alternative<RoughnessSpec>(r));

    // cross-class text is rejected, never reinterpreted
    try {
        parse_annotation(AnnotationClass::Roughness, "⏥|0.05");
        FAIL("expected rejection");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("roughness:") != std::string::npos);
    }
    // a bare number parses per the dispatched class only
    const ParsedAnnotation bare = parse_annotation(AnnotationClass::Measure, "5");
    CHECK(std::get<MeasureSpec>(bare).kind == MeasureKind::Linear);
    CHECK_THROWS_AS(parse_annotation(AnnotationClass::Gdt, "5"), ParseError);
    CHECK_THROWS_AS(parse_annotation(AnnotationClass::Roughness, "5"), ParseError);
}

TEST_CASE("canonical_text: reference forms") {
    GdtFrame pos;
    pos.characteristic = GdtCharacteristic::Position;
    pos.zone = ZoneShape::Diameter;
    pos.tolerance_value = 0.1;
    pos.datums = {{"A", {}}, {"B", {}}, {"C", {}}};
    CHECK(canonical_text(pos) == "⌖|⌀0.1|A|B|C");

    MeasureSpec dia;
    dia.kind = MeasureKind::Diameter;
    dia.nominal = 10;
    dia.tolerance = Tolerance::symmetric(0.1);
    CHECK(canonical_text(dia) == "⌀10 ±0.1");
}

TEST_CASE("corpus round-trip: parse -> canonical_text -> parse") {
    const auto corpus = load_corpus();
    CHECK(corpus.size() >= 50);

    std::set<GdtCharacteristic> seen_characteristics;
    std::set<MeasureKind> seen_kinds;
    for (const auto& entry : corpus) {
        CAPTURE(entry.raw);
        const AnnotationClass cls = annotation_class_from_name(entry.cls);
        const ParsedAnnotation first = parse_annotation(cls, nfc_normalize(entry.raw));
        const std::string canonical = canonical_text(first);
        CHECK(canonical == entry.canonical);
        const ParsedAnnotation second = parse_annotation(cls, canonical);
        CHECK(first == second);
        // canonical form is a fixpoint
        CHECK(canonical_text(second) == canonical);
        if (const auto* g = std::get_if<GdtFrame>(&first))
            seen_characteristics.insert(g->characteristic);
        if (const auto* mm = std::get_if<MeasureSpec>(&first)) seen_kinds.insert(mm->kind);
    }
    CHECK(seen_characteristics.size() == 14);
    CHECK(seen_kinds.size() == 9);
}

TEST_CASE("negative corpus: rejections carry offsets") {
    const auto corpus = load_negative_corpus();
    CHECK(corpus.size() >= 20);
    for (const auto& entry : corpus) {
        CAPTURE(entry.raw);
        const AnnotationClass cls = annotation_class_from_name(entry.cls);
        try {
            parse_annotation(cls, entry.raw);
            FAIL("expected rejection of: ", entry.raw);
        } catch (const ParseError& e) {
            CHECK(e.offset == entry.offset);
            CHECK(std::string(e.what()).find(entry.fragment) != std::string::npos);
        }
    }
}

TEST_CASE("gdt symbol table is one-to-one") {
    std::set<char32_t> symbols;
    std::set<std::string_view> names;
    for (int i = 0; i < 14; ++i) {
        const auto c = static_cast<GdtCharacteristic>(i);
        symbols.insert(gdt_characteristic_symbol(c));
        names.insert(gdt_characteristic_name(c));
        CHECK(gdt_characteristic_from_name(gdt_characteristic_name(c)) == c);
    }
    CHECK(symbols.size() == 14);
    CHECK(names.size() == 14);
    CHECK(gdt_is_form_tolerance(GdtCharacteristic::Straightness));
    CHECK(gdt_is_form_tolerance(GdtCharacteristic::Cylindricity));
    CHECK_FALSE(gdt_is_form_tolerance(GdtCharacteristic::Position));
}

TEST_CASE("parsers are total: every input is accepted or rejected in place") {
    // code points that appear in the grammars plus noise
    const std::vector<char32_t> pool{
        U'0', U'1', U'9', U'.', U',', U'|', U'(', U')', U'/', U'+', U'-', U' ',
        U'x', U'X', U'A', U'B', U'I', U'M', U'R', U'S', U'a', U'z', U'H', U'g',
        0x2316, 0x23E5, 0x2300, 0x00B1, 0x00B0, 0x25A1, 0x24C2, 0x2197, 0x2212,
        0x2334, 0x21A7, 0x4E2D,  // CJK outlier
    };
    SplitMix64 rng(4321);
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<char32_t> cps;
        const int len = int(rng.next() % 24);
        for (int i = 0; i < len; ++i) cps.push_back(pool[rng.next() % pool.size()]);
        const std::string text = utf8_encode(cps);
        for (const AnnotationClass cls :
             {AnnotationClass::Measure, AnnotationClass::Gdt, AnnotationClass::Roughness}) {
            try {
                const ParsedAnnotation parsed = parse_annotation(cls, text);
                // accepted inputs must round-trip through the canonical form
                CHECK(parse_annotation(cls, canonical_text(parsed)) == parsed);
            } catch (const ParseError& e) {
                CHECK(e.offset <= cps.size());
            }
        }
    }
}

TEST_CASE("nfc normalization is idempotent") {
    const std::vector<char32_t> pool{U'A', U'a', U'u', U'o', U'E', U'z', U'Z', U' ',
                                     0x0300, 0x0301, 0x0308, 0x030A, 0x030C, 0x0327,
                                     0x00C5, 0x00FC, 0x2316, 0x2300, U'1'};
    SplitMix64 rng(888);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<char32_t> cps;
        const int len = int(rng.next() % 16);
        for (int i = 0; i < len; ++i) cps.push_back(pool[rng.next() % pool.size()]);
        const std::string once = nfc_normalize(utf8_encode(cps));
        CHECK(nfc_normalize(once) == once);
    }
}

TEST_CASE("nfc normalization composes combining marks") {
    // "A" + combining ring above -> precomposed form
    CHECK(nfc_normalize("A\xCC\x8A") == "\xC3\x85");
    CHECK(nfc_normalize("u\xCC\x88") == "\xC3\xBC");
    // precomposed input is a fixpoint; engineering symbols pass through
    CHECK(nfc_normalize("\xC3\x85") == "\xC3\x85");
    CHECK(nfc_normalize("⌖|⌀0.1|A") == "⌖|⌀0.1|A");
}
