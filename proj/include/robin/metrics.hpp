#pragma once

#include "robin/types.hpp"

namespace robin {

struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

struct MetricsReport {
    scalar accuracy = 0, precision = 0, sensitivity = 0, specificity = 0,
           f1 = 0, auc = 0;
    bool degenerate = false;  // some metric hit a zero denominator
};

ConfusionCounts confusion(const Vector& pred_labels, const Vector& true_labels);

/// Confusion-derived metrics; zero-denominator cases yield 0 and set the
/// degenerate flag. AuC is left at 0 (fill via roc_auc).
MetricsReport metrics_from_counts(const ConfusionCounts& c);

/// Trapezoidal ROC area over all distinct thresholds; ties get half credit,
/// so this equals P(score+ > score-) + 0.5 P(tie). Requires both classes.
scalar roc_auc(const Vector& scores, const Vector& labels);

/// Full report from probabilistic scores at a 0.5 threshold.
MetricsReport evaluate_scores(const Vector& scores, const Vector& labels,
                              scalar threshold = 0.5);

}  // namespace robin
