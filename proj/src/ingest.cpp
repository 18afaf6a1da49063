#include "drawparse/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "drawparse/errors.hpp"
#include "drawparse/text_util.hpp"

namespace drawparse {

namespace {

constexpr double kUnitSlack = 1e-6;

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(f);
    return fields;
}

double parse_coord(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw LabelError(line_no, std::string("invalid ") + what + " '" + s + "'");
    }
}

int parse_class_field(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw LabelError(line_no, "invalid class field '" + s + "'");
    }
}

void check_unit_range(double v, int line_no, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
        throw LabelError(line_no, std::string(what) + " " + format_double(v) +
                                      " outside normalized range [0,1]");
}

}  // namespace

namespace {

std::pair<RegionClass, AxisAlignedBox> parse_det_line(const std::vector<std::string>& fields,
                                                      int line_no, int image_w, int image_h) {
    const int cls_id = parse_class_field(fields[0], line_no);
    RegionClass cls;
    try {
        cls = region_class_from_id(cls_id);
    } catch (const ValidationError& e) {
        throw LabelError(line_no, e.what());
    }
    const double cx = parse_coord(fields[1], line_no, "cx");
    const double cy = parse_coord(fields[2], line_no, "cy");
    const double w = parse_coord(fields[3], line_no, "w");
    const double h = parse_coord(fields[4], line_no, "h");
    check_unit_range(cx, line_no, "cx");
    check_unit_range(cy, line_no, "cy");
    check_unit_range(w, line_no, "w");
    check_unit_range(h, line_no, "h");
    if (cx - w / 2 < -kUnitSlack || cx + w / 2 > 1.0 + kUnitSlack || cy - h / 2 < -kUnitSlack ||
        cy + h / 2 > 1.0 + kUnitSlack)
        throw LabelError(line_no, "box extends outside the unit square");
    return {cls, AxisAlignedBox::make((cx - w / 2) * image_w, (cy - h / 2) * image_h,
                                      (cx + w / 2) * image_w, (cy + h / 2) * image_h)};
}

std::pair<AnnotationClass, OrientedBox> parse_obb_line(const std::vector<std::string>& fields,
                                                       int line_no, int image_w, int image_h) {
    const int cls_id = parse_class_field(fields[0], line_no);
    AnnotationClass cls;
    try {
        cls = annotation_class_from_id(cls_id);
    } catch (const ValidationError& e) {
        throw LabelError(line_no, e.what());
    }
    std::array<Vec2, 4> corners;
    for (int k = 0; k < 4; ++k) {
        const double x = parse_coord(fields[1 + 2 * k], line_no, "corner x");
        const double y = parse_coord(fields[2 + 2 * k], line_no, "corner y");
        check_unit_range(x, line_no, "corner x");
        check_unit_range(y, line_no, "corner y");
        corners[k] = {x * image_w, y * image_h};
    }
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (corners[a] == corners[b])
                throw LabelError(line_no, "degenerate quadrilateral: repeated corner");
    // convexity in the given winding
    double sign = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec2 e1 = corners[(k + 1) % 4] - corners[k];
        const Vec2 e2 = corners[(k + 2) % 4] - corners[(k + 1) % 4];
        const double c = cross(e1, e2);
        if (c == 0.0) throw LabelError(line_no, "degenerate quadrilateral: collinear corners");
        if (sign == 0.0) sign = c;
        else if ((c > 0) != (sign > 0))
            throw LabelError(line_no, "non-convex quadrilateral");
    }
    try {
        return {cls, min_area_obb(corners)};
    } catch (const ValidationError& e) {
        throw LabelError(line_no, e.what());
    }
}

double parse_confidence_field(const std::string& s, int line_no) {
    const double conf = parse_coord(s, line_no, "confidence");
    if (!(conf >= 0.0 && conf <= 1.0))
        throw LabelError(line_no, "confidence outside [0,1]");
    return conf;
}

}  // namespace

std::vector<std::pair<RegionClass, AxisAlignedBox>> read_det_labels(std::istream& in, int image_w,
                                                                    int image_h) {
    std::vector<std::pair<RegionClass, AxisAlignedBox>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 5)
            throw LabelError(line_no,
                             "expected 5 fields, got " + std::to_string(fields.size()));
        out.push_back(parse_det_line(fields, line_no, image_w, image_h));
    }
    return out;
}

std::vector<ScoredAabb> read_det_predictions(std::istream& in, int image_w, int image_h) {
    std::vector<ScoredAabb> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 6)
            throw LabelError(line_no,
                             "expected 6 fields, got " + std::to_string(fields.size()));
        const auto [cls, box] =
            parse_det_line({fields.begin(), fields.begin() + 5}, line_no, image_w, image_h);
        out.push_back({static_cast<int>(cls), box, parse_confidence_field(fields[5], line_no)});
    }
    return out;
}

std::vector<ScoredObb> read_obb_predictions(std::istream& in, int image_w, int image_h) {
    std::vector<ScoredObb> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 10)
            throw LabelError(line_no,
                             "expected 10 fields, got " + std::to_string(fields.size()));
        const auto [cls, box] =
            parse_obb_line({fields.begin(), fields.begin() + 9}, line_no, image_w, image_h);
        out.push_back({static_cast<int>(cls), box, parse_confidence_field(fields[9], line_no)});
    }
    return out;
}

void write_det_labels(std::ostream& out,
                      const std::vector<std::pair<RegionClass, AxisAlignedBox>>& labels,
                      int image_w, int image_h) {
    for (const auto& [cls, box] : labels) {
        const double cx = (box.x_min + box.x_max) / 2 / image_w;
        const double cy = (box.y_min + box.y_max) / 2 / image_h;
        const double w = box.width() / image_w;
        const double h = box.height() / image_h;
        out << static_cast<int>(cls) << ' ' << format_double(cx) << ' ' << format_double(cy) << ' '
            << format_double(w) << ' ' << format_double(h) << '\n';
    }
}

std::vector<std::pair<AnnotationClass, OrientedBox>> read_obb_labels(std::istream& in, int image_w,
                                                                     int image_h) {
    std::vector<std::pair<AnnotationClass, OrientedBox>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 9)
            throw LabelError(line_no,
                             "expected 9 fields, got " + std::to_string(fields.size()));
        out.push_back(parse_obb_line(fields, line_no, image_w, image_h));
    }
    return out;
}

void write_obb_labels(std::ostream& out,
                      const std::vector<std::pair<AnnotationClass, OrientedBox>>& labels,
                      int image_w, int image_h) {
    for (const auto& [cls, box] : labels) {
        out << static_cast<int>(cls);
        const ConvexPolygon poly = obb_to_polygon(box);
        for (const Vec2 v : poly.vertices)
            out << ' ' << format_double(v.x / image_w) << ' ' << format_double(v.y / image_h);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// VLM pairs

std::vector<VlmPairRecord> read_pairs_jsonl(std::istream& in) {
    std::vector<VlmPairRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw LabelError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("image") || !j.contains("kind") ||
            !j.contains("ground_truth"))
            throw LabelError(line_no, "pair record needs image, kind, ground_truth");
        VlmPairRecord r;
        r.image_path = j["image"].get<std::string>();
        if (r.image_path.empty()) throw LabelError(line_no, "image path must be nonempty");
        try {
            r.kind = region_kind_from_name(j["kind"].get<std::string>());
        } catch (const ValidationError& e) {
            throw LabelError(line_no, e.what());
        }
        r.ground_truth = j["ground_truth"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void write_pairs_jsonl(std::ostream& out, const std::vector<VlmPairRecord>& pairs) {
    for (const auto& p : pairs) {
        nlohmann::json j;
        j["image"] = p.image_path;
        j["kind"] = std::string(region_kind_name(p.kind));
        j["ground_truth"] = p.ground_truth;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Dataset statistics

std::int64_t DatasetStats::region_total() const {
    return std::accumulate(region_counts.begin(), region_counts.end(), std::int64_t{0});
}

std::int64_t DatasetStats::annotation_total() const {
    return std::accumulate(annotation_counts.begin(), annotation_counts.end(), std::int64_t{0});
}

void DatasetStats::merge(const DatasetStats& other) {
    for (int i = 0; i < kNumRegionClasses; ++i) region_counts[i] += other.region_counts[i];
    for (int i = 0; i < kNumAnnotationClasses; ++i)
        annotation_counts[i] += other.annotation_counts[i];
    for (const auto& [stem, counts] : other.per_drawing) {
        auto& mine = per_drawing[stem];
        for (int i = 0; i < kNumRegionClasses; ++i) mine.regions[i] += counts.regions[i];
        for (int i = 0; i < kNumAnnotationClasses; ++i)
            mine.annotations[i] += counts.annotations[i];
    }
}

namespace {

DatasetStats stats_for_file(const std::filesystem::path& path, bool layout) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read label file: " + path.string());
    DatasetStats s;
    const std::string stem = path.stem().string();
    auto& pd = s.per_drawing[stem];
    try {
        if (layout) {
            for (const auto& [cls, box] : read_det_labels(in, 1, 1)) {
                (void)box;
                ++s.region_counts[static_cast<int>(cls)];
                ++pd.regions[static_cast<int>(cls)];
            }
        } else {
            for (const auto& [cls, box] : read_obb_labels(in, 1, 1)) {
                (void)box;
                ++s.annotation_counts[static_cast<int>(cls)];
                ++pd.annotations[static_cast<int>(cls)];
            }
        }
    } catch (const LabelError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return s;
}

std::vector<std::filesystem::path> list_label_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::exists(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

DatasetStats compute_stats(const std::filesystem::path& root, bool parallel) {
    const auto layout_files = list_label_files(root / "layout");
    const auto ann_files = list_label_files(root / "annotations");

    struct Job {
        std::filesystem::path path;
        bool layout;
    };
    std::vector<Job> jobs;
    for (const auto& p : layout_files) jobs.push_back({p, true});
    for (const auto& p : ann_files) jobs.push_back({p, false});

    std::vector<DatasetStats> partial(jobs.size());
    std::exception_ptr failure;
    const std::int64_t n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            partial[i] = stats_for_file(jobs[i].path, jobs[i].layout);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    DatasetStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

std::string stats_to_json(const DatasetStats& stats) {
    nlohmann::json j;
    nlohmann::json layout_counts = nlohmann::json::object();
    nlohmann::json layout_share = nlohmann::json::object();
    const std::int64_t rt = stats.region_total();
    for (int i = 0; i < kNumRegionClasses; ++i) {
        const std::string name(region_class_name(static_cast<RegionClass>(i)));
        layout_counts[name] = stats.region_counts[i];
        layout_share[name] = rt > 0 ? double(stats.region_counts[i]) / double(rt) : 0.0;
    }
    j["layout"] = {{"counts", layout_counts}, {"share", layout_share}, {"total", rt}};
    nlohmann::json ann_counts = nlohmann::json::object();
    nlohmann::json ann_share = nlohmann::json::object();
    const std::int64_t at = stats.annotation_total();
    for (int i = 0; i < kNumAnnotationClasses; ++i) {
        const std::string name(annotation_class_name(static_cast<AnnotationClass>(i)));
        ann_counts[name] = stats.annotation_counts[i];
        ann_share[name] = at > 0 ? double(stats.annotation_counts[i]) / double(at) : 0.0;
    }
    j["annotations"] = {{"counts", ann_counts}, {"share", ann_share}, {"total", at}};
    j["drawings"] = stats.per_drawing.size();
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [stem, counts] : stats.per_drawing) {
        nlohmann::json c = nlohmann::json::object();
        for (int i = 0; i < kNumRegionClasses; ++i)
            c[std::string(region_class_name(static_cast<RegionClass>(i)))] = counts.regions[i];
        for (int i = 0; i < kNumAnnotationClasses; ++i)
            c[std::string(annotation_class_name(static_cast<AnnotationClass>(i)))] =
                counts.annotations[i];
        per[stem] = std::move(c);
    }
    j["per_drawing"] = std::move(per);
    return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Deterministic splits

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

void seeded_shuffle(std::vector<std::string>& ids, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = ids.size(); i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(ids[i], ids[j]);
    }
}

std::vector<std::vector<std::string>> split_dataset(const std::vector<std::string>& ids,
                                                    const SplitSpec& spec) {
    if (spec.ratios.size() < 2) throw ValidationError("split needs at least 2 ratio parts");
    double sum = 0.0;
    for (double r : spec.ratios) {
        if (!(r > 0.0)) throw ValidationError("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
    {
        std::set<std::string> seen;
        for (const auto& id : ids)
            if (!seen.insert(id).second) throw ValidationError("duplicate id '" + id + "'");
    }

    std::vector<std::string> shuffled = ids;
    seeded_shuffle(shuffled, spec.seed);

    const std::size_t n = shuffled.size();
    std::vector<std::vector<std::string>> parts(spec.ratios.size());
    double cum = 0.0;
    std::size_t begin = 0;
    for (std::size_t p = 0; p < spec.ratios.size(); ++p) {
        std::size_t end;
        if (p + 1 == spec.ratios.size()) {
            end = n;  // last part absorbs the remainder
        } else {
            cum += spec.ratios[p];
            end = static_cast<std::size_t>(std::floor(double(n) * cum + 1e-9));
        }
        if (end < begin) end = begin;
        parts[p].assign(shuffled.begin() + begin, shuffled.begin() + end);
        begin = end;
    }
    return parts;
}

}  // namespace drawparse
