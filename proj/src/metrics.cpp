#include "robin/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace robin {

ConfusionCounts confusion(const Vector& pred_labels, const Vector& true_labels) {
    if (pred_labels.size() != true_labels.size())
        throw ShapeError("confusion: prediction/label length mismatch");
    ConfusionCounts c;
    for (index_t i = 0; i < pred_labels.size(); ++i) {
        const bool p = pred_labels(i) != 0.0;
        const bool y = true_labels(i) != 0.0;
        if (p && y) ++c.tp;
        else if (!p && !y) ++c.tn;
        else if (p && !y) ++c.fp;
        else ++c.fn;
    }
    return c;
}

MetricsReport metrics_from_counts(const ConfusionCounts& c) {
    if (c.total() <= 0) throw DataError("metrics_from_counts: empty counts");
    MetricsReport r;
    auto ratio = [&r](scalar num, scalar den) {
        if (den <= 0) {
            r.degenerate = true;
            return scalar(0);
        }
        return num / den;
    };
    const scalar tp = static_cast<scalar>(c.tp), tn = static_cast<scalar>(c.tn);
    const scalar fp = static_cast<scalar>(c.fp), fn = static_cast<scalar>(c.fn);
    r.accuracy = (tp + tn) / (tp + tn + fp + fn);
    r.precision = ratio(tp, tp + fp);
    r.sensitivity = ratio(tp, tp + fn);
    r.specificity = ratio(tn, tn + fp);
    r.f1 = ratio(2.0 * r.precision * r.sensitivity, r.precision + r.sensitivity);
    return r;
}

scalar roc_auc(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size())
        throw ShapeError("roc_auc: scores/labels length mismatch");
    long pos = 0, neg = 0;
    for (index_t i = 0; i < labels.size(); ++i)
        (labels(i) != 0.0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw DataError("AuC undefined: single-class labels");

    std::vector<index_t> order(scores.size());
    std::iota(order.begin(), order.end(), index_t(0));
    std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
        return scores(a) > scores(b);
    });

    // sweep thresholds; groups of tied scores advance together (trapezoid
    // through the tie block = half credit per tied +/- pair)
    scalar area = 0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long dtp = 0, dfp = 0;
        while (j < order.size() && scores(order[j]) == scores(order[i])) {
            (labels(order[j]) != 0.0 ? dtp : dfp)++;
            ++j;
        }
        area += static_cast<scalar>(dfp) *
                (static_cast<scalar>(tp) + static_cast<scalar>(dtp) / 2.0);
        tp += dtp;
        fp += dfp;
        i = j;
    }
    return area / (static_cast<scalar>(pos) * static_cast<scalar>(neg));
}

MetricsReport evaluate_scores(const Vector& scores, const Vector& labels,
                              scalar threshold) {
    const Vector preds = (scores.array() >= threshold).cast<scalar>();
    MetricsReport r = metrics_from_counts(confusion(preds, labels));
    r.auc = roc_auc(scores, labels);
    return r;
}

}  // namespace robin
