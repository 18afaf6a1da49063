#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "drawparse/ingest.hpp"

using namespace drawparse;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

OrientedBox random_generic_obb(SplitMix64& rng) {
    // distinct extents keep the canonical form away from the square fold
    const double w = 60 + rng.next_double() * 200;
    const double h = 10 + rng.next_double() * 40;
    const double cx = 300 + rng.next_double() * 400;
    const double cy = 300 + rng.next_double() * 400;
    const double theta = (rng.next_double() - 0.5) * kPi * 0.98;
    return OrientedBox::make(cx, cy, w, h, theta);
}

}  // namespace

TEST_CASE("read_det_labels denormalizes documented examples") {
    {
        std::istringstream in("0 0.5 0.5 1.0 1.0\n");
        const auto labels = read_det_labels(in, 800, 600);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].first == RegionClass::View);
        CHECK(labels[0].second == AxisAlignedBox::make(0, 0, 800, 600));
    }
    {
        std::istringstream in("1 0.9 0.9 0.2 0.2\n");
        const auto labels = read_det_labels(in, 1000, 1000);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].first == RegionClass::TitleBlock);
        CHECK(labels[0].second.x_min == doctest::Approx(800));
        CHECK(labels[0].second.y_min == doctest::Approx(800));
        CHECK(labels[0].second.x_max == doctest::Approx(1000));
        CHECK(labels[0].second.y_max == doctest::Approx(1000));
    }
}

TEST_CASE("read_det_labels errors name the line") {
    SUBCASE("class out of range") {
        std::istringstream in("3 0.5 0.5 0.1 0.1\n");
        try {
            read_det_labels(in, 100, 100);
            FAIL("expected rejection");
        } catch (const LabelError& e) {
            CHECK(e.line == 1);
            CHECK(std::string(e.what()).find("class 3 out of range") != std::string::npos);
        }
    }
    SUBCASE("wrong field count on line 2") {
        std::istringstream in("0 0.5 0.5 0.1 0.1\n0 0.5 0.5 0.1\n");
        try {
            read_det_labels(in, 100, 100);
            FAIL("expected rejection");
        } catch (const LabelError& e) {
            CHECK(e.line == 2);
            CHECK(std::string(e.what()).find("expected 5 fields") != std::string::npos);
        }
    }
    SUBCASE("coordinate outside [0,1]") {
        std::istringstream in("0 1.5 0.5 0.1 0.1\n");
        CHECK_THROWS_AS(read_det_labels(in, 100, 100), LabelError);
    }
    SUBCASE("box past the unit square") {
        std::istringstream in("0 0.95 0.5 0.2 0.2\n");
        CHECK_THROWS_AS(read_det_labels(in, 100, 100), LabelError);
    }
}

TEST_CASE("detection labels round-trip through write and read") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<RegionClass, AxisAlignedBox>> labels;
        const int n = 1 + int(rng.next() % 8);
        for (int i = 0; i < n; ++i) {
            const double x0 = rng.next_double() * 0.8;
            const double y0 = rng.next_double() * 0.8;
            const double w = 0.05 + rng.next_double() * (0.99 - x0 - 0.05);
            const double h = 0.05 + rng.next_double() * (0.99 - y0 - 0.05);
            labels.emplace_back(region_class_from_id(int(rng.next() % 3)),
                                AxisAlignedBox::make(x0 * 1280, y0 * 960, (x0 + w) * 1280,
                                                     (y0 + h) * 960));
        }
        std::ostringstream out;
        write_det_labels(out, labels, 1280, 960);
        std::istringstream in(out.str());
        const auto back = read_det_labels(in, 1280, 960);
        REQUIRE(back.size() == labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            CHECK(back[i].first == labels[i].first);
            // 1e-9 in normalized units
            CHECK(std::abs(back[i].second.x_min - labels[i].second.x_min) < 1e-9 * 1280);
            CHECK(std::abs(back[i].second.y_min - labels[i].second.y_min) < 1e-9 * 960);
            CHECK(std::abs(back[i].second.x_max - labels[i].second.x_max) < 1e-9 * 1280);
            CHECK(std::abs(back[i].second.y_max - labels[i].second.y_max) < 1e-9 * 960);
        }
    }
}

TEST_CASE("read_obb_labels fits corner quads to canonical boxes") {
    SUBCASE("axis-aligned quad") {
        std::istringstream in("0 0.1 0.1 0.3 0.1 0.3 0.2 0.1 0.2\n");
        const auto labels = read_obb_labels(in, 1000, 1000);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].first == AnnotationClass::Measure);
        const OrientedBox& b = labels[0].second;
        CHECK(b.cx == doctest::Approx(200));
        CHECK(b.cy == doctest::Approx(150));
        CHECK(b.w == doctest::Approx(200));
        CHECK(b.h == doctest::Approx(100));
        CHECK(b.theta == doctest::Approx(0));
    }
    SUBCASE("the same rectangle rotated 45 degrees") {
        const OrientedBox expected = OrientedBox::make(200, 150, 200, 100, kPi / 4);
        const ConvexPolygon corners = obb_to_polygon(expected);
        std::ostringstream line;
        line.precision(17);
        line << 1;
        for (const Vec2 v : corners.vertices) line << ' ' << v.x / 1000 << ' ' << v.y / 1000;
        std::istringstream in(line.str());
        const auto labels = read_obb_labels(in, 1000, 1000);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].first == AnnotationClass::Gdt);
        CHECK(labels[0].second.cx == doctest::Approx(200).epsilon(1e-6));
        CHECK(labels[0].second.w == doctest::Approx(200).epsilon(1e-6));
        CHECK(labels[0].second.h == doctest::Approx(100).epsilon(1e-6));
        CHECK(labels[0].second.theta == doctest::Approx(kPi / 4).epsilon(1e-6));
    }
    SUBCASE("repeated corner is degenerate") {
        std::istringstream in("0 0.1 0.1 0.1 0.1 0.3 0.2 0.1 0.2\n");
        try {
            read_obb_labels(in, 1000, 1000);
            FAIL("expected rejection");
        } catch (const LabelError& e) {
            CHECK(std::string(e.what()).find("degenerate quadrilateral") != std::string::npos);
        }
    }
    SUBCASE("bowtie winding is non-convex") {
        std::istringstream in("0 0.0 0.0 0.2 0.0 0.0 0.2 0.2 0.2\n");
        try {
            read_obb_labels(in, 1000, 1000);
            FAIL("expected rejection");
        } catch (const LabelError& e) {
            CHECK(std::string(e.what()).find("non-convex") != std::string::npos);
        }
    }
}

TEST_CASE("obb corner fit recovers canonicalized boxes within 1e-6") {
    SplitMix64 rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const OrientedBox b = random_generic_obb(rng);
        std::ostringstream out;
        write_obb_labels(out, {{AnnotationClass::Measure, b}}, 1000, 1000);
        std::istringstream in(out.str());
        const auto back = read_obb_labels(in, 1000, 1000);
        REQUIRE(back.size() == 1);
        const OrientedBox& f = back[0].second;
        CHECK(std::abs(f.cx - b.cx) < 1e-6);
        CHECK(std::abs(f.cy - b.cy) < 1e-6);
        CHECK(std::abs(f.w - b.w) < 1e-6);
        CHECK(std::abs(f.h - b.h) < 1e-6);
        CHECK(std::abs(f.theta - b.theta) < 1e-6);
    }
}

TEST_CASE("prediction files carry a confidence column") {
    {
        std::istringstream in("0 0.5 0.5 0.2 0.2 0.93\n");
        const auto preds = read_det_predictions(in, 100, 100);
        REQUIRE(preds.size() == 1);
        CHECK(preds[0].class_id == 0);
        CHECK(preds[0].confidence == 0.93);
    }
    {
        std::istringstream in("2 0.1 0.1 0.3 0.1 0.3 0.2 0.1 0.2 0.5\n");
        const auto preds = read_obb_predictions(in, 1000, 1000);
        REQUIRE(preds.size() == 1);
        CHECK(preds[0].class_id == 2);
        CHECK(preds[0].confidence == 0.5);
    }
    {
        std::istringstream in("0 0.5 0.5 0.2 0.2 1.5\n");
        CHECK_THROWS_AS(read_det_predictions(in, 100, 100), LabelError);
    }
}

TEST_CASE("vlm pairs round-trip through jsonl") {
    std::vector<VlmPairRecord> pairs{
        {"patches/m_000.png", RegionKind::Measure, "⌀10 ±0.1"},
        {"patches/g_000.png", RegionKind::Gdt, "⌖|⌀0.1|A|B|C"},
        {"regions/tb_000.png", RegionKind::TitleBlock, R"({"part_name": "Bracket"})"},
    };
    std::ostringstream out;
    write_pairs_jsonl(out, pairs);
    std::istringstream in(out.str());
    CHECK(read_pairs_jsonl(in) == pairs);

    std::istringstream bad("{\"image\": \"x\", \"kind\": \"nope\", \"ground_truth\": \"\"}\n");
    CHECK_THROWS_AS(read_pairs_jsonl(bad), LabelError);
    std::istringstream not_json("not json\n");
    CHECK_THROWS_AS(read_pairs_jsonl(not_json), LabelError);
}

TEST_CASE("compute_stats aggregates a dataset tree") {
    const fs::path root = fs::temp_directory_path() / "drawparse_stats_fixture";
    fs::remove_all(root);
    fs::create_directories(root / "layout");
    fs::create_directories(root / "annotations");
    auto put = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p);
        out << text;
    };
    put(root / "layout/d1.txt",
        "0 0.25 0.25 0.4 0.4\n0 0.7 0.7 0.3 0.3\n1 0.9 0.9 0.2 0.2\n");
    put(root / "layout/d2.txt", "0 0.5 0.5 0.5 0.5\n1 0.9 0.9 0.2 0.2\n");
    put(root / "layout/d3.txt", "1 0.9 0.9 0.2 0.2\n");
    put(root / "annotations/d1.txt",
        "0 0.1 0.1 0.3 0.1 0.3 0.2 0.1 0.2\n1 0.4 0.4 0.6 0.4 0.6 0.5 0.4 0.5\n");
    put(root / "annotations/d2.txt", "2 0.1 0.1 0.3 0.1 0.3 0.2 0.1 0.2\n");

    const DatasetStats stats = compute_stats(root);
    CHECK(stats.region_counts[0] == 3);  // views
    CHECK(stats.region_counts[1] == 3);  // title blocks
    CHECK(stats.region_counts[2] == 0);  // notes
    CHECK(stats.annotation_counts[0] == 1);
    CHECK(stats.annotation_counts[1] == 1);
    CHECK(stats.annotation_counts[2] == 1);
    CHECK(stats.region_total() == 6);
    CHECK(stats.annotation_total() == 3);
    REQUIRE(stats.per_drawing.count("d1") == 1);
    CHECK(stats.per_drawing.at("d1").regions[0] == 2);
    CHECK(stats.per_drawing.at("d1").annotations[1] == 1);

    // parallel and serial aggregation agree
    CHECK(compute_stats(root, false) == stats);

    // stats json carries the imbalance shares
    const std::string bytes = stats_to_json(stats);
    const auto j = nlohmann::json::parse(bytes);
    CHECK(j["layout"]["total"] == 6);
    CHECK(j["annotations"]["share"]["roughness"].get<double>() ==
          doctest::Approx(1.0 / 3.0));
    CHECK(j["drawings"] == 3);

    // malformed file fails with the path in the message
    put(root / "layout/bad.txt", "0 0.5\n");
    try {
        compute_stats(root);
        FAIL("expected rejection");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("bad.txt") != std::string::npos);
    }
    fs::remove_all(root);
}

TEST_CASE("compute_stats of an empty tree is all zeros") {
    const fs::path root = fs::temp_directory_path() / "drawparse_stats_empty";
    fs::remove_all(root);
    fs::create_directories(root);
    const DatasetStats stats = compute_stats(root);
    CHECK(stats.region_total() == 0);
    CHECK(stats.annotation_total() == 0);
    CHECK(stats.per_drawing.empty());
    fs::remove_all(root);
}

TEST_CASE("reference dataset counts document matches the stats shape") {
    std::ifstream in(DOCS_DIR "/reference_dataset_counts.json");
    REQUIRE(in.good());
    const auto j = nlohmann::json::parse(in);
    CHECK(j["layout"]["view"] == 3498);
    CHECK(j["layout"]["title_block"] == 458);
    CHECK(j["layout"]["notes"] == 1127);
    CHECK(j["annotations"]["measure"] == 9663);
    CHECK(j["annotations"]["gdt"] == 3215);
    CHECK(j["annotations"]["roughness"] == 152);
    std::int64_t layout_total = 0, ann_total = 0;
    for (int i = 0; i < kNumRegionClasses; ++i)
        layout_total +=
            j["layout"][std::string(region_class_name(static_cast<RegionClass>(i)))].get<int>();
    for (int i = 0; i < kNumAnnotationClasses; ++i)
        ann_total += j["annotations"]
                      [std::string(annotation_class_name(static_cast<AnnotationClass>(i)))]
                          .get<int>();
    CHECK(layout_total == 5083);
    CHECK(ann_total == 13030);
}

TEST_CASE("splitmix64 matches the reference stream") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
    CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("split_dataset: documented sizes and frozen seed-42 shuffle") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("id0" + std::to_string(i));

    const auto parts82 = split_dataset(ids, {{0.8, 0.2}, 42});
    REQUIRE(parts82.size() == 2);
    CHECK(parts82[0].size() == 8);
    CHECK(parts82[1].size() == 2);

    const auto parts721 = split_dataset(ids, {{0.7, 0.2, 0.1}, 42});
    REQUIRE(parts721.size() == 3);
    CHECK(parts721[0].size() == 7);
    CHECK(parts721[1].size() == 2);
    CHECK(parts721[2].size() == 1);

    // frozen expectation computed with an independent implementation
    const std::vector<std::string> expected{"id00", "id09", "id05", "id08", "id06",
                                            "id04", "id07", "id02", "id01", "id03"};
    std::vector<std::string> flat;
    for (const auto& part : parts721) flat.insert(flat.end(), part.begin(), part.end());
    CHECK(flat == expected);

    // determinism across calls
    CHECK(split_dataset(ids, {{0.7, 0.2, 0.1}, 42}) == parts721);
}

TEST_CASE("split_dataset validates its inputs") {
    CHECK_THROWS_AS(split_dataset({"a", "a"}, {{0.5, 0.5}, 1}), ValidationError);
    CHECK_THROWS_AS(split_dataset({"a", "b"}, {{0.5, 0.6}, 1}), ValidationError);
    CHECK_THROWS_AS(split_dataset({"a", "b"}, {{1.0}, 1}), ValidationError);
    CHECK_THROWS_AS(split_dataset({"a", "b"}, {{-0.5, 1.5}, 1}), ValidationError);
}

TEST_CASE("splits partition the input for random sets") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + int(rng.next() % 200);
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i) ids.push_back("item_" + std::to_string(i));
        const SplitSpec spec{trial % 2 == 0 ? std::vector<double>{0.8, 0.2}
                                            : std::vector<double>{0.7, 0.2, 0.1},
                             rng.next()};
        const auto parts = split_dataset(ids, spec);
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const auto& part : parts) {
            total += part.size();
            for (const auto& id : part) CHECK(seen.insert(id).second);
        }
        CHECK(total == ids.size());
        CHECK(seen == std::set<std::string>(ids.begin(), ids.end()));
    }
}
