#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "drawparse/geometry.hpp"

namespace drawparse {

struct MatchConfig {
    enum class IouKind { AxisAligned, Oriented };
    double iou_threshold = 0.5;
    IouKind iou_kind = IouKind::AxisAligned;
};

struct ClassCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    ClassCounts& operator+=(const ClassCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    bool operator==(const ClassCounts&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double hallucination = 0.0;

    bool operator==(const ClassMetrics&) const = default;
};

// P = tp/(tp+fp), R = tp/(tp+fn), both 0 on empty denominators. F1 is the
// harmonic mean; hallucination is 1 - P when at least one prediction exists
// and 0 otherwise.
ClassMetrics prf_from_counts(const ClassCounts& c);

// 2pr/(p+r), 0 when p + r == 0.
double f1_from_pr(double p, double r);

// Unweighted arithmetic mean per field; F1 is averaged directly, never
// recomputed from the averaged P and R. Rejects an empty list.
ClassMetrics macro_aggregate(std::span<const ClassMetrics> per_class);

// Matching outcome for one class taxonomy: per-class counts plus a
// (k+1)x(k+1) confusion table (row = ground truth, column = prediction,
// index k = background). Merges associatively across images.
struct MatchOutcome {
    std::vector<ClassCounts> per_class;
    std::vector<std::int64_t> confusion;  // row-major (k+1)^2

    explicit MatchOutcome(int num_classes = 0)
        : per_class(num_classes), confusion(std::size_t(num_classes + 1) * (num_classes + 1)) {}

    int num_classes() const { return static_cast<int>(per_class.size()); }
    std::int64_t& at(int gt_class, int pred_class) {
        return confusion[std::size_t(gt_class) * (per_class.size() + 1) + pred_class];
    }
    std::int64_t at(int gt_class, int pred_class) const {
        return confusion[std::size_t(gt_class) * (per_class.size() + 1) + pred_class];
    }
    void merge(const MatchOutcome& other);
};

// Greedy detection matching: predictions by confidence descending (ties by
// input index), each takes the unmatched same-class ground truth of highest
// IoU >= threshold (ties by ground-truth index). Unmatched predictions are
// fp, unmatched ground truths fn. A second pass attributes unmatched
// predictions that still overlap (>= threshold) a leftover ground truth of
// another class to that off-diagonal confusion cell; everything else hits
// the background row/column.
template <class BoxT>
MatchOutcome match_detections(const std::vector<Scored<BoxT>>& preds,
                              const std::vector<std::pair<int, BoxT>>& gts, int num_classes,
                              const MatchConfig& cfg);

extern template MatchOutcome match_detections(const std::vector<ScoredAabb>&,
                                              const std::vector<std::pair<int, AxisAlignedBox>>&,
                                              int, const MatchConfig&);
extern template MatchOutcome match_detections(const std::vector<ScoredObb>&,
                                              const std::vector<std::pair<int, OrientedBox>>&, int,
                                              const MatchConfig&);

template <class BoxT>
struct LabeledImage {
    std::string id;
    std::vector<Scored<BoxT>> preds;
    std::vector<std::pair<int, BoxT>> gts;
};

// Per-image matching with an associative reduction. The OpenMP path and the
// serial reference produce identical outcomes.
template <class BoxT>
MatchOutcome evaluate_images(std::span<const LabeledImage<BoxT>> images, int num_classes,
                             const MatchConfig& cfg);
template <class BoxT>
MatchOutcome evaluate_images_serial(std::span<const LabeledImage<BoxT>> images, int num_classes,
                                    const MatchConfig& cfg);

extern template MatchOutcome evaluate_images(std::span<const LabeledImage<AxisAlignedBox>>, int,
                                             const MatchConfig&);
extern template MatchOutcome evaluate_images(std::span<const LabeledImage<OrientedBox>>, int,
                                             const MatchConfig&);
extern template MatchOutcome evaluate_images_serial(std::span<const LabeledImage<AxisAlignedBox>>,
                                                    int, const MatchConfig&);
extern template MatchOutcome evaluate_images_serial(std::span<const LabeledImage<OrientedBox>>,
                                                    int, const MatchConfig&);

struct ConfusionMatrix {
    std::vector<std::string> class_names;  // k entries; background is implicit row/col k
    std::vector<std::int64_t> counts;      // (k+1)^2 row-major

    std::int64_t row_support(int row) const;
    // Rows with support normalized to sum 1; zero-support rows stay zero.
    std::vector<double> normalized() const;
    std::vector<std::string> no_support_rows() const;
};

ConfusionMatrix confusion_matrix(const MatchOutcome& outcome,
                                 std::span<const std::string> class_names);

// Strict field-level comparison of key/value extractions. Keys are
// lowercased and trimmed; values are NFC-normalized, whitespace-collapsed,
// trimmed, and case-folded when purely alphabetic. tp = exact pair matches,
// fp = predicted pairs absent from truth, fn = truth pairs absent from the
// prediction.
ClassCounts field_level_eval(const std::map<std::string, std::string>& predicted,
                             const std::map<std::string, std::string>& truth);

struct EvalReport {
    std::vector<std::string> class_names;
    std::vector<ClassCounts> counts;
    std::vector<ClassMetrics> per_class;
    ClassMetrics overall;
    ConfusionMatrix confusion;
    MatchConfig config;
};

EvalReport build_report(const MatchOutcome& outcome, std::span<const std::string> class_names,
                        const MatchConfig& cfg);

std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

}  // namespace drawparse
