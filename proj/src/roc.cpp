#include "sitedelta/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "sitedelta/error.hpp"

namespace sitedelta::eval {

RocCurve compute_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ValueError("scores and labels must be non-empty and equally sized");
    std::size_t pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1) ++pos;
        else if (y == -1) ++neg;
        else throw ValueError("labels must be -1 or +1");
    }
    if (pos == 0 || neg == 0) throw ValueError("ROC requires both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve roc;
    roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        // everything tied at this score flips together
        while (i < order.size() && scores[order[i]] == s) {
            if (labels[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                              static_cast<double>(tp) / static_cast<double>(pos), s});
    }
    return roc;
}

double auc(const RocCurve& roc) {
    double area = 0.0;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        const auto& a = roc.points[i - 1];
        const auto& b = roc.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

OperatingPoint dr_at_fp(const RocCurve& roc, double fp_target) {
    // points run from the strictest threshold down, so the first point that
    // reaches a given TPR carries the largest threshold achieving it
    OperatingPoint best;
    best.threshold = std::numeric_limits<double>::infinity();
    for (const auto& p : roc.points) {
        if (p.fpr > fp_target) continue;
        if (p.tpr > best.detection_rate) {
            best.detection_rate = p.tpr;
            best.threshold = p.threshold;
            best.fpr = p.fpr;
        }
    }
    return best;
}

double tpr_at_fpr(const RocCurve& roc, double fp_target) {
    double best = 0.0;
    for (const auto& p : roc.points)
        if (p.fpr <= fp_target) best = std::max(best, p.tpr);
    return best;
}

}  // namespace sitedelta::eval
