#pragma once

#include <cstdint>
#include <vector>

namespace sitedelta::eval {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

/// Points ordered by descending threshold, starting at (0, 0, +inf). A page
/// counts as positive when its score is >= the threshold; tied scores flip
/// together.
struct RocCurve {
    std::vector<RocPoint> points;
};

/// Labels are -1 / +1; throws when a class is missing.
RocCurve compute_roc(const std::vector<double>& scores, const std::vector<int>& labels);

double auc(const RocCurve& roc);

struct OperatingPoint {
    double detection_rate = 0.0;
    double threshold = 0.0;
    double fpr = 0.0;
};

/// Highest TPR at FPR <= fp_target, no interpolation; of the thresholds
/// achieving it, the largest (most conservative) is returned.
OperatingPoint dr_at_fp(const RocCurve& roc, double fp_target);

/// Step-function TPR at the given FPR bound (used for vertical averaging).
double tpr_at_fpr(const RocCurve& roc, double fp_target);

}  // namespace sitedelta::eval
