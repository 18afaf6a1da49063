#include "drawparse/eval.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "drawparse/errors.hpp"
#include "drawparse/text_util.hpp"

namespace drawparse {

ClassMetrics prf_from_counts(const ClassCounts& c) {
    ClassMetrics m;
    const std::int64_t preds = c.tp + c.fp;
    const std::int64_t gts = c.tp + c.fn;
    m.precision = preds > 0 ? double(c.tp) / double(preds) : 0.0;
    m.recall = gts > 0 ? double(c.tp) / double(gts) : 0.0;
    m.f1 = f1_from_pr(m.precision, m.recall);
    m.hallucination = preds > 0 ? 1.0 - m.precision : 0.0;
    return m;
}

double f1_from_pr(double p, double r) {
    const double denom = p + r;
    if (denom == 0.0) return 0.0;
    return 2.0 * p * r / denom;
}

ClassMetrics macro_aggregate(std::span<const ClassMetrics> per_class) {
    if (per_class.empty()) throw ValidationError("macro aggregation needs at least one class");
    ClassMetrics m;
    for (const auto& c : per_class) {
        m.precision += c.precision;
        m.recall += c.recall;
        m.f1 += c.f1;
        m.hallucination += c.hallucination;
    }
    const double n = static_cast<double>(per_class.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.hallucination /= n;
    return m;
}

void MatchOutcome::merge(const MatchOutcome& other) {
    if (other.per_class.size() != per_class.size())
        throw ValidationError("cannot merge outcomes over different taxonomies");
    for (std::size_t i = 0; i < per_class.size(); ++i) per_class[i] += other.per_class[i];
    for (std::size_t i = 0; i < confusion.size(); ++i) confusion[i] += other.confusion[i];
}

template <class BoxT>
MatchOutcome match_detections(const std::vector<Scored<BoxT>>& preds,
                              const std::vector<std::pair<int, BoxT>>& gts, int num_classes,
                              const MatchConfig& cfg) {
    if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0))
        throw ValidationError("matching IoU threshold must lie in (0,1]");
    for (const auto& p : preds)
        if (p.class_id < 0 || p.class_id >= num_classes)
            throw ValidationError("prediction class " + std::to_string(p.class_id) +
                                  " outside the taxonomy");
    for (const auto& g : gts)
        if (g.first < 0 || g.first >= num_classes)
            throw ValidationError("ground-truth class " + std::to_string(g.first) +
                                  " outside the taxonomy");

    MatchOutcome out(num_classes);
    const int bg = num_classes;

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].confidence != preds[b].confidence)
            return preds[a].confidence > preds[b].confidence;
        return a < b;
    });

    std::vector<char> gt_matched(gts.size(), 0);
    std::vector<char> pred_matched(preds.size(), 0);

    // pass 1: same-class greedy matching
    for (std::size_t pi : order) {
        const auto& p = preds[pi];
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_matched[gi] || gts[gi].first != p.class_id) continue;
            const double v = iou(p.box, gts[gi].second);
            if (v >= cfg.iou_threshold && v > best_iou) {
                best_iou = v;
                best = static_cast<int>(gi);
            }
        }
        if (best >= 0) {
            gt_matched[best] = 1;
            pred_matched[pi] = 1;
            ++out.per_class[p.class_id].tp;
            ++out.at(p.class_id, p.class_id);
        }
    }

    // pass 2: attribute leftovers for the confusion table
    std::vector<char> gt_confused(gts.size(), 0);
    for (std::size_t pi : order) {
        if (pred_matched[pi]) continue;
        const auto& p = preds[pi];
        ++out.per_class[p.class_id].fp;
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_matched[gi] || gt_confused[gi] || gts[gi].first == p.class_id) continue;
            const double v = iou(p.box, gts[gi].second);
            if (v >= cfg.iou_threshold && v > best_iou) {
                best_iou = v;
                best = static_cast<int>(gi);
            }
        }
        if (best >= 0) {
            gt_confused[best] = 1;
            ++out.at(gts[best].first, p.class_id);
        } else {
            ++out.at(bg, p.class_id);
        }
    }
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (gt_matched[gi]) continue;
        ++out.per_class[gts[gi].first].fn;
        if (!gt_confused[gi]) ++out.at(gts[gi].first, bg);
    }
    return out;
}

template MatchOutcome match_detections(const std::vector<ScoredAabb>&,
                                       const std::vector<std::pair<int, AxisAlignedBox>>&, int,
                                       const MatchConfig&);
template MatchOutcome match_detections(const std::vector<ScoredObb>&,
                                       const std::vector<std::pair<int, OrientedBox>>&, int,
                                       const MatchConfig&);

namespace {

template <class BoxT>
MatchOutcome evaluate_impl(std::span<const LabeledImage<BoxT>> images, int num_classes,
                           const MatchConfig& cfg, bool parallel) {
    std::vector<MatchOutcome> partial(images.size(), MatchOutcome(num_classes));
    std::exception_ptr failure;
    const std::int64_t n = static_cast<std::int64_t>(images.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            partial[i] = match_detections(images[i].preds, images[i].gts, num_classes, cfg);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    MatchOutcome total(num_classes);
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace

template <class BoxT>
MatchOutcome evaluate_images(std::span<const LabeledImage<BoxT>> images, int num_classes,
                             const MatchConfig& cfg) {
    return evaluate_impl(images, num_classes, cfg, true);
}

template <class BoxT>
MatchOutcome evaluate_images_serial(std::span<const LabeledImage<BoxT>> images, int num_classes,
                                    const MatchConfig& cfg) {
    return evaluate_impl(images, num_classes, cfg, false);
}

template MatchOutcome evaluate_images(std::span<const LabeledImage<AxisAlignedBox>>, int,
                                      const MatchConfig&);
template MatchOutcome evaluate_images(std::span<const LabeledImage<OrientedBox>>, int,
                                      const MatchConfig&);
template MatchOutcome evaluate_images_serial(std::span<const LabeledImage<AxisAlignedBox>>, int,
                                             const MatchConfig&);
template MatchOutcome evaluate_images_serial(std::span<const LabeledImage<OrientedBox>>, int,
                                             const MatchConfig&);

std::int64_t ConfusionMatrix::row_support(int row) const {
    const std::size_t k = class_names.size() + 1;
    std::int64_t s = 0;
    for (std::size_t c = 0; c < k; ++c) s += counts[std::size_t(row) * k + c];
    return s;
}

std::vector<double> ConfusionMatrix::normalized() const {
    const std::size_t k = class_names.size() + 1;
    std::vector<double> norm(counts.size(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const std::int64_t s = row_support(static_cast<int>(r));
        if (s == 0) continue;
        for (std::size_t c = 0; c < k; ++c)
            norm[r * k + c] = double(counts[r * k + c]) / double(s);
    }
    return norm;
}

std::vector<std::string> ConfusionMatrix::no_support_rows() const {
    std::vector<std::string> rows;
    for (std::size_t r = 0; r < class_names.size(); ++r)
        if (row_support(static_cast<int>(r)) == 0) rows.push_back(class_names[r]);
    if (row_support(static_cast<int>(class_names.size())) == 0) rows.push_back("background");
    return rows;
}

ConfusionMatrix confusion_matrix(const MatchOutcome& outcome,
                                 std::span<const std::string> class_names) {
    if (static_cast<int>(class_names.size()) != outcome.num_classes())
        throw ValidationError("class name list does not match the outcome taxonomy");
    ConfusionMatrix m;
    m.class_names.assign(class_names.begin(), class_names.end());
    m.counts = outcome.confusion;
    return m;
}

namespace {

std::string normalize_field_value(std::string_view v) {
    std::string s = trim(collapse_whitespace(nfc_normalize(v)));
    if (is_ascii_alpha_only(s)) s = ascii_lower(s);
    return s;
}

std::map<std::string, std::string> normalize_field_map(
    const std::map<std::string, std::string>& m) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : m) out[trim(ascii_lower(k))] = normalize_field_value(v);
    return out;
}

}  // namespace

ClassCounts field_level_eval(const std::map<std::string, std::string>& predicted,
                             const std::map<std::string, std::string>& truth) {
    const auto p = normalize_field_map(predicted);
    const auto t = normalize_field_map(truth);
    ClassCounts c;
    for (const auto& [k, v] : p) {
        const auto it = t.find(k);
        if (it != t.end() && it->second == v) ++c.tp;
        else ++c.fp;
    }
    for (const auto& [k, v] : t) {
        const auto it = p.find(k);
        if (it == p.end() || it->second != v) ++c.fn;
    }
    return c;
}

EvalReport build_report(const MatchOutcome& outcome, std::span<const std::string> class_names,
                        const MatchConfig& cfg) {
    EvalReport r;
    r.class_names.assign(class_names.begin(), class_names.end());
    r.counts = outcome.per_class;
    for (const auto& c : outcome.per_class) r.per_class.push_back(prf_from_counts(c));
    r.overall = macro_aggregate(r.per_class);
    r.confusion = confusion_matrix(outcome, class_names);
    r.config = cfg;
    return r;
}

namespace {

nlohmann::json metrics_to_json(const ClassMetrics& m) {
    return {{"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"hallucination", m.hallucination}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["config"] = {{"iou_threshold", report.config.iou_threshold},
                   {"iou_kind", report.config.iou_kind == MatchConfig::IouKind::Oriented
                                    ? "oriented"
                                    : "axis_aligned"}};
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t i = 0; i < report.class_names.size(); ++i) {
        nlohmann::json c = metrics_to_json(report.per_class[i]);
        c["tp"] = report.counts[i].tp;
        c["fp"] = report.counts[i].fp;
        c["fn"] = report.counts[i].fn;
        per[report.class_names[i]] = std::move(c);
    }
    j["per_class"] = std::move(per);
    j["overall"] = metrics_to_json(report.overall);

    const std::size_t k = report.class_names.size() + 1;
    nlohmann::json labels = report.class_names;
    labels.push_back("background");
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json norm = nlohmann::json::array();
    const auto normalized = report.confusion.normalized();
    for (std::size_t r = 0; r < k; ++r) {
        nlohmann::json crow = nlohmann::json::array();
        nlohmann::json nrow = nlohmann::json::array();
        for (std::size_t c = 0; c < k; ++c) {
            crow.push_back(report.confusion.counts[r * k + c]);
            nrow.push_back(normalized[r * k + c]);
        }
        counts.push_back(std::move(crow));
        norm.push_back(std::move(nrow));
    }
    j["confusion"] = {{"labels", labels},
                      {"counts", counts},
                      {"normalized", norm},
                      {"no_support", report.confusion.no_support_rows()}};
    return j.dump() + "\n";
}

std::string report_to_csv(const EvalReport& report) {
    std::string out = "class,precision,recall,f1,hallucination,tp,fp,fn\n";
    for (std::size_t i = 0; i < report.class_names.size(); ++i) {
        const auto& m = report.per_class[i];
        const auto& c = report.counts[i];
        out += report.class_names[i] + ',' + format_double(m.precision) + ',' +
               format_double(m.recall) + ',' + format_double(m.f1) + ',' +
               format_double(m.hallucination) + ',' + std::to_string(c.tp) + ',' +
               std::to_string(c.fp) + ',' + std::to_string(c.fn) + '\n';
    }
    const auto& o = report.overall;
    out += "overall," + format_double(o.precision) + ',' + format_double(o.recall) + ',' +
           format_double(o.f1) + ',' + format_double(o.hallucination) + ",,,\n";
    return out;
}

}  // namespace drawparse
