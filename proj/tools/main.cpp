// drawparse command-line tool: pipeline runner, annotation parsers, dataset
// statistics, deterministic splits, and the evaluation harness.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "drawparse/annoparse.hpp"
#include "drawparse/eval.hpp"
#include "drawparse/ingest.hpp"
#include "drawparse/pipeline.hpp"
#include "drawparse/schema.hpp"
#include "drawparse/text_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace drawparse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << bytes;
    out.close();
    if (!out) throw IoError("cannot write file: " + path.string());
}

// Reports default to stdout; --out redirects to a file.
void emit(const std::string& out_path, const std::string& bytes) {
    if (out_path.empty()) std::cout << bytes;
    else write_file(out_path, bytes);
}

std::string stamp_json(const std::string& bytes) {
    json j = json::parse(bytes);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
    j["generated_at"] = buf;
    return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    std::string input;
    std::string replay;
    std::string config;
    std::string out;
    int workers = 0;
};

int cmd_run(const RunArgs& args) {
    std::vector<DrawingRef> drawings;
    ReplayManifest manifest;
    PipelineConfig cfg;
    try {
        drawings = scan_drawing_dir(args.input);
        manifest = ReplayManifest::load(args.replay);
        if (!args.config.empty()) cfg = PipelineConfig::load(args.config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    if (drawings.empty()) {
        std::cerr << "error: no *.drawing.json descriptors under " << args.input << "\n";
        return kExitIo;
    }
    ReplayRegionDetector regions(manifest);
    ReplayAnnotationDetector annotations(manifest);
    ReplayTextReader alphabetical(manifest, ReaderRole::Alphabetical);
    ReplayTextReader numerical(manifest, ReaderRole::Numerical);
    Ports ports{regions, annotations, alphabetical, numerical};

    const auto results = run_batch(drawings, ports, cfg, args.out, args.workers);
    int aborted = 0;
    for (const auto& res : results) {
        if (res.ok) {
            std::cout << res.summary << "\n";
        } else {
            ++aborted;
            std::cerr << "error: drawing '" << res.drawing_id << "' aborted: " << res.error
                      << "\n";
        }
    }
    return aborted > 0 ? kExitDomain : kExitOk;
}

// ---------------------------------------------------------------------------
// parse

int cmd_parse(const std::string& cls_name, const std::string& text) {
    AnnotationClass cls;
    try {
        cls = annotation_class_from_name(cls_name);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    try {
        const ParsedAnnotation parsed = parse_annotation(cls, nfc_normalize(text));
        std::cout << parsed_annotation_json(parsed);
        return kExitOk;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

// ---------------------------------------------------------------------------
// stats / split

int cmd_stats(const std::string& input, const std::string& out, bool stamp) {
    try {
        const DatasetStats stats = compute_stats(input);
        std::string bytes = stats_to_json(stats);
        if (stamp) bytes = stamp_json(bytes);
        emit(out, bytes);
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

int cmd_split(const std::string& input, const std::string& ratios_text, std::uint64_t seed,
              const std::string& out) {
    std::vector<std::string> ids;
    try {
        std::istringstream in(read_file(input));
        std::string line;
        while (std::getline(in, line)) {
            const std::string id = trim(line);
            if (!id.empty()) ids.push_back(id);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    SplitSpec spec;
    spec.seed = seed;
    for (const auto& part : [&] {
             std::vector<std::string> parts;
             std::istringstream ss(ratios_text);
             std::string p;
             while (std::getline(ss, p, ',')) parts.push_back(p);
             return parts;
         }()) {
        try {
            spec.ratios.push_back(std::stod(part));
        } catch (const std::exception&) {
            std::cerr << "error: invalid ratio '" << part << "'\n";
            return kExitDomain;
        }
    }
    try {
        const auto parts = split_dataset(ids, spec);
        json j;
        j["seed"] = seed;
        j["ratios"] = spec.ratios;
        j["parts"] = parts;
        emit(out, j.dump() + "\n");
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

// ---------------------------------------------------------------------------
// eval-detect

struct EvalDetectArgs {
    std::string preds;
    std::string gts;
    std::string kind = "aabb";
    double iou_threshold = 0.5;
    std::string sizes;
    std::string out;
    std::string format = "json";
    bool stamp = false;
};

std::map<std::string, std::pair<int, int>> load_sizes(const std::string& path) {
    std::map<std::string, std::pair<int, int>> sizes;
    if (path.empty()) return sizes;
    const json j = json::parse(read_file(path));
    for (const auto& [stem, wh] : j.items())
        sizes[stem] = {wh[0].get<int>(), wh[1].get<int>()};
    return sizes;
}

std::set<std::string> stems_in(const fs::path& dir) {
    std::set<std::string> stems;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            stems.insert(entry.path().stem().string());
    return stems;
}

int cmd_eval_detect(const EvalDetectArgs& args) {
    try {
        const auto sizes = load_sizes(args.sizes);
        auto size_of = [&](const std::string& stem) -> std::pair<int, int> {
            const auto it = sizes.find(stem);
            return it != sizes.end() ? it->second : std::pair<int, int>{1000, 1000};
        };
        std::set<std::string> stems = stems_in(args.preds);
        for (const auto& s : stems_in(args.gts)) stems.insert(s);

        MatchConfig cfg;
        cfg.iou_threshold = args.iou_threshold;
        cfg.iou_kind = args.kind == "obb" ? MatchConfig::IouKind::Oriented
                                          : MatchConfig::IouKind::AxisAligned;
        if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0))
            throw ValidationError("--iou-threshold must lie in (0,1]");

        EvalReport report;
        if (cfg.iou_kind == MatchConfig::IouKind::AxisAligned) {
            std::vector<LabeledImage<AxisAlignedBox>> images;
            for (const auto& stem : stems) {
                LabeledImage<AxisAlignedBox> img;
                img.id = stem;
                const auto [w, h] = size_of(stem);
                const fs::path pp = fs::path(args.preds) / (stem + ".txt");
                const fs::path gp = fs::path(args.gts) / (stem + ".txt");
                try {
                    if (fs::exists(pp)) {
                        std::istringstream in(read_file(pp));
                        img.preds = read_det_predictions(in, w, h);
                    }
                    if (fs::exists(gp)) {
                        std::istringstream in(read_file(gp));
                        for (const auto& [cls, box] : read_det_labels(in, w, h))
                            img.gts.emplace_back(static_cast<int>(cls), box);
                    }
                } catch (const LabelError& e) {
                    throw ValidationError(stem + ".txt: " + e.what());
                }
                images.push_back(std::move(img));
            }
            std::vector<std::string> names;
            for (int i = 0; i < kNumRegionClasses; ++i)
                names.emplace_back(region_class_name(static_cast<RegionClass>(i)));
            const auto outcome =
                evaluate_images<AxisAlignedBox>(images, kNumRegionClasses, cfg);
            report = build_report(outcome, names, cfg);
        } else {
            std::vector<LabeledImage<OrientedBox>> images;
            for (const auto& stem : stems) {
                LabeledImage<OrientedBox> img;
                img.id = stem;
                const auto [w, h] = size_of(stem);
                const fs::path pp = fs::path(args.preds) / (stem + ".txt");
                const fs::path gp = fs::path(args.gts) / (stem + ".txt");
                try {
                    if (fs::exists(pp)) {
                        std::istringstream in(read_file(pp));
                        img.preds = read_obb_predictions(in, w, h);
                    }
                    if (fs::exists(gp)) {
                        std::istringstream in(read_file(gp));
                        for (const auto& [cls, box] : read_obb_labels(in, w, h))
                            img.gts.emplace_back(static_cast<int>(cls), box);
                    }
                } catch (const LabelError& e) {
                    throw ValidationError(stem + ".txt: " + e.what());
                }
                images.push_back(std::move(img));
            }
            std::vector<std::string> names;
            for (int i = 0; i < kNumAnnotationClasses; ++i)
                names.emplace_back(annotation_class_name(static_cast<AnnotationClass>(i)));
            const auto outcome = evaluate_images<OrientedBox>(images, kNumAnnotationClasses, cfg);
            report = build_report(outcome, names, cfg);
        }
        std::string bytes = args.format == "csv" ? report_to_csv(report) : report_to_json(report);
        if (args.stamp && args.format != "csv") bytes = stamp_json(bytes);
        emit(args.out, bytes);
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

// ---------------------------------------------------------------------------
// eval-parse

struct ExtractionCounts {
    std::map<RegionKind, ClassCounts> per_kind;
};

std::map<std::string, std::string> flatten_fields(const json& j) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j.items())
        out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return out;
}

int cmd_eval_parse(const std::string& preds_path, const std::string& gts_path,
                   const std::string& out, const std::string& format, bool stamp) {
    try {
        std::istringstream gin(read_file(gts_path));
        const auto gts = read_pairs_jsonl(gin);

        // predictions: {"image": ..., "kind": ..., "prediction": ...}
        std::map<std::pair<std::string, RegionKind>, std::string> preds;
        {
            std::istringstream pin(read_file(preds_path));
            std::string line;
            int line_no = 0;
            while (std::getline(pin, line)) {
                ++line_no;
                if (trim(line).empty()) continue;
                json j;
                try {
                    j = json::parse(line);
                } catch (const json::parse_error& e) {
                    throw ValidationError(preds_path + ":" + std::to_string(line_no) + ": " +
                                          e.what());
                }
                if (!j.is_object() || !j.contains("image") || !j.contains("kind") ||
                    !j.contains("prediction"))
                    throw ValidationError(preds_path + ":" + std::to_string(line_no) +
                                          ": prediction record needs image, kind, prediction");
                preds[{j["image"].get<std::string>(),
                       region_kind_from_name(j["kind"].get<std::string>())}] =
                    j["prediction"].get<std::string>();
            }
        }

        ExtractionCounts counts;
        std::set<std::pair<std::string, RegionKind>> consumed;
        for (const auto& gt : gts) {
            auto& c = counts.per_kind[gt.kind];
            const auto key = std::make_pair(gt.image_path, gt.kind);
            const auto pit = preds.find(key);
            const bool has_pred = pit != preds.end() && !trim(pit->second).empty();
            if (pit != preds.end()) consumed.insert(key);
            if (gt.kind == RegionKind::TitleBlock || gt.kind == RegionKind::Notes) {
                // field-level comparison of flat JSON objects
                json tj;
                try {
                    tj = json::parse(gt.ground_truth);
                } catch (const json::parse_error&) {
                    throw ValidationError("ground truth for " + gt.image_path +
                                          " is not valid JSON");
                }
                if (!tj.is_object())
                    throw ValidationError("ground truth for " + gt.image_path +
                                          " must be a JSON object");
                std::map<std::string, std::string> pred_fields;
                bool garbage = false;
                if (has_pred) {
                    try {
                        const json pj = json::parse(pit->second);
                        if (pj.is_object()) pred_fields = flatten_fields(pj);
                        else garbage = true;
                    } catch (const json::parse_error&) {
                        garbage = true;
                    }
                }
                c += field_level_eval(pred_fields, flatten_fields(tj));
                if (garbage) ++c.fp;
            } else {
                // numerical annotations: canonical-form equality
                AnnotationClass cls = AnnotationClass::Measure;
                if (gt.kind == RegionKind::Gdt) cls = AnnotationClass::Gdt;
                else if (gt.kind == RegionKind::Roughness) cls = AnnotationClass::Roughness;
                ParsedAnnotation truth;
                try {
                    truth = parse_annotation(cls, nfc_normalize(gt.ground_truth));
                } catch (const ParseError& e) {
                    throw ValidationError("ground truth for " + gt.image_path +
                                          " does not parse: " + e.what());
                }
                if (!has_pred) {
                    ++c.fn;
                    continue;
                }
                bool match = false;
                try {
                    const ParsedAnnotation predicted =
                        parse_annotation(cls, nfc_normalize(pit->second));
                    match = canonical_text(predicted) == canonical_text(truth);
                } catch (const ParseError&) {
                    match = false;
                }
                if (match) {
                    ++c.tp;
                } else {
                    ++c.fp;
                    ++c.fn;
                }
            }
        }
        // predictions with no matching ground truth are hallucinated patches
        for (const auto& [key, text] : preds) {
            (void)text;
            if (!consumed.count(key)) ++counts.per_kind[key.second].fp;
        }

        const std::vector<std::pair<std::string, std::vector<RegionKind>>> roles{
            {"alphabetical", {RegionKind::TitleBlock, RegionKind::Notes}},
            {"numerical", {RegionKind::Measure, RegionKind::Gdt, RegionKind::Roughness}},
        };
        json j = json::object();
        std::string csv = "role,class,precision,recall,f1,hallucination,tp,fp,fn\n";
        for (const auto& [role, kinds] : roles) {
            std::vector<ClassMetrics> role_metrics;
            json role_json = json::object();
            json per_class = json::object();
            for (const RegionKind kind : kinds) {
                const auto it = counts.per_kind.find(kind);
                if (it == counts.per_kind.end()) continue;
                const ClassMetrics m = prf_from_counts(it->second);
                role_metrics.push_back(m);
                per_class[std::string(region_kind_name(kind))] = {
                    {"precision", m.precision}, {"recall", m.recall},
                    {"f1", m.f1},               {"hallucination", m.hallucination},
                    {"tp", it->second.tp},      {"fp", it->second.fp},
                    {"fn", it->second.fn}};
                csv += role + ',' + std::string(region_kind_name(kind)) + ',' +
                       format_double(m.precision) + ',' + format_double(m.recall) + ',' +
                       format_double(m.f1) + ',' + format_double(m.hallucination) + ',' +
                       std::to_string(it->second.tp) + ',' + std::to_string(it->second.fp) + ',' +
                       std::to_string(it->second.fn) + '\n';
            }
            if (role_metrics.empty()) continue;
            const ClassMetrics overall = macro_aggregate(role_metrics);
            role_json["per_class"] = std::move(per_class);
            role_json["overall"] = {{"precision", overall.precision},
                                    {"recall", overall.recall},
                                    {"f1", overall.f1},
                                    {"hallucination", overall.hallucination}};
            j[role] = std::move(role_json);
            csv += role + ",overall," + format_double(overall.precision) + ',' +
                   format_double(overall.recall) + ',' + format_double(overall.f1) + ',' +
                   format_double(overall.hallucination) + ",,,\n";
        }
        std::string bytes = format == "csv" ? csv : j.dump() + "\n";
        if (stamp && format != "csv") bytes = stamp_json(bytes);
        emit(out, bytes);
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& input) {
    std::string bytes;
    try {
        bytes = read_file(input);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    try {
        const UnifiedDrawing doc = parse_unified(bytes);
        for (const auto& v : validate_info(doc))
            std::cout << "info: " << v.path << ": " << v.message << " [" << v.rule << "]\n";
        std::cout << input << ": valid\n";
        return kExitOk;
    } catch (const SchemaError& e) {
        for (const auto& v : e.violations)
            std::cerr << "error: " << v.path << ": " << v.message << " [" << v.rule << "]\n";
        return kExitDomain;
    } catch (const JsonError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Engineering-drawing interpretation pipeline, parsers, and evaluation harness"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the three-stage pipeline over a drawing directory");
    run->add_option("--input", run_args.input, "Directory of *.drawing.json descriptors")
        ->required();
    run->add_option("--replay", run_args.replay, "Replay manifest JSON path")->required();
    run->add_option("--config", run_args.config, "Pipeline config file (flat key = value)");
    run->add_option("--out", run_args.out, "Output directory for <id>.unified.json")->required();
    run->add_option("--workers", run_args.workers,
                    "Worker threads for drawing-level parallelism (default: logical cores)");

    std::string parse_class;
    std::string parse_text;
    auto* parse = app.add_subcommand("parse", "Parse one annotation string");
    parse->add_option("--class", parse_class, "Annotation class: measure | gdt | roughness")
        ->required();
    parse->add_option("text", parse_text, "Annotation text")->required();

    std::string stats_input, stats_out;
    bool stats_stamp = false;
    auto* stats = app.add_subcommand("stats", "Dataset statistics report");
    stats->add_option("--input", stats_input, "Dataset root (layout/ and annotations/ subdirs)")
        ->required();
    stats->add_option("--out", stats_out, "Output path (default: stdout)");
    stats->add_flag("--stamp", stats_stamp, "Embed a generation timestamp");

    std::string split_input, split_ratios = "0.8,0.2", split_out;
    std::uint64_t split_seed = 0;
    auto* split = app.add_subcommand("split", "Deterministic dataset split");
    split->add_option("--input", split_input, "File with one id per line")->required();
    split->add_option("--ratios", split_ratios, "Comma-separated ratios summing to 1")
        ->capture_default_str();
    split->add_option("--seed", split_seed, "Shuffle seed")->required();
    split->add_option("--out", split_out, "Output path (default: stdout)");

    EvalDetectArgs ed;
    auto* eval_detect = app.add_subcommand("eval-detect", "Detection metrics and confusion matrix");
    eval_detect->add_option("--preds", ed.preds, "Directory of prediction files")->required();
    eval_detect->add_option("--gts", ed.gts, "Directory of ground-truth label files")->required();
    eval_detect->add_option("--kind", ed.kind, "Box kind: aabb (regions) | obb (annotations)")
        ->check(CLI::IsMember({"aabb", "obb"}))
        ->capture_default_str();
    eval_detect->add_option("--iou-threshold", ed.iou_threshold, "Matching IoU threshold")
        ->capture_default_str();
    eval_detect->add_option("--sizes", ed.sizes, "JSON map stem -> [width, height]");
    eval_detect->add_option("--out", ed.out, "Output path (default: stdout)");
    eval_detect->add_option("--format", ed.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    eval_detect->add_flag("--stamp", ed.stamp, "Embed a generation timestamp");

    std::string ep_preds, ep_gts, ep_out, ep_format = "json";
    bool ep_stamp = false;
    auto* eval_parse = app.add_subcommand("eval-parse", "Extraction metrics for reader outputs");
    eval_parse->add_option("--preds", ep_preds, "Predictions jsonl (image, kind, prediction)")
        ->required();
    eval_parse->add_option("--gts", ep_gts, "Ground-truth pairs jsonl")->required();
    eval_parse->add_option("--out", ep_out, "Output path (default: stdout)");
    eval_parse->add_option("--format", ep_format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    eval_parse->add_flag("--stamp", ep_stamp, "Embed a generation timestamp");

    std::string validate_input;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a unified.json document");
    validate_cmd->add_option("--input", validate_input, "unified.json path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;
    }

    if (run->parsed()) return cmd_run(run_args);
    if (parse->parsed()) return cmd_parse(parse_class, parse_text);
    if (stats->parsed()) return cmd_stats(stats_input, stats_out, stats_stamp);
    if (split->parsed()) return cmd_split(split_input, split_ratios, split_seed, split_out);
    if (eval_detect->parsed()) return cmd_eval_detect(ed);
    if (eval_parse->parsed()) return cmd_eval_parse(ep_preds, ep_gts, ep_out, ep_format, ep_stamp);
    if (validate_cmd->parsed()) return cmd_validate(validate_input);
    return kExitIo;
}
