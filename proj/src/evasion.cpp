#include "sitedelta/evasion.hpp"

#include <algorithm>

#include "sitedelta/error.hpp"

namespace sitedelta::evasion {

AttackResult optimal_html_attack(const learn::LinearSvmModel& model,
                                 const html::HtmlDeltaVector& delta1, AttackBudget budget) {
    constexpr int dim = static_cast<int>(html::HtmlDeltaVector::kDim);
    if (model.weights.size() != html::HtmlDeltaVector::kDim)
        throw ValueError("attack requires an 11-feature HTML model");
    if (budget.max_features < 0 || budget.max_features > dim)
        throw ValueError("attack budget must lie in 0..11");

    auto values = delta1.values();
    std::array<bool, html::HtmlDeltaVector::kDim> modified{};

    AttackResult result;
    for (int step = 0; step < budget.max_features; ++step) {
        int best_i = -1;
        double best_decrease = 0.0;
        double best_target = 0.0;
        for (int i = 0; i < dim; ++i) {
            if (modified[i]) continue;
            const double w = model.weights[i];
            const double target = w < 0.0 ? 1.0 : 0.0;  // argmin over {0,1} of w*t
            const double decrease = w * values[i] - w * target;
            if (decrease > best_decrease) {  // strict: ties keep the lowest index
                best_decrease = decrease;
                best_i = i;
                best_target = target;
            }
        }
        if (best_i < 0) break;  // nothing left that strictly lowers the score
        values[best_i] = best_target;
        modified[best_i] = true;
        result.trace.modified_indices.push_back(best_i);
        double score = model.bias;
        for (int i = 0; i < dim; ++i) score += model.weights[i] * values[i];
        result.trace.scores.push_back(score);
    }
    result.vector = html::HtmlDeltaVector::from_values(values);
    return result;
}

}  // namespace sitedelta::evasion
