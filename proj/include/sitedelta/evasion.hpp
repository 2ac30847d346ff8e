#pragma once

#include <array>
#include <vector>

#include "sitedelta/html_delta.hpp"
#include "sitedelta/svm.hpp"

namespace sitedelta::evasion {

struct AttackBudget {
    int max_features = 0;  // 0..11
};

struct AttackTrace {
    std::vector<int> modified_indices;  // in modification order
    std::vector<double> scores;         // HTML score after each step
};

struct AttackResult {
    html::HtmlDeltaVector vector;
    AttackTrace trace;
};

/// Perfect-knowledge greedy attack on the linear HTML model: each step sets
/// the unmodified feature whose best {0,1} assignment buys the largest score
/// decrease (ties to the lowest index), stopping at the budget or when no
/// change strictly decreases the score. Greedy is globally optimal here
/// because the model is linear over an independent box.
AttackResult optimal_html_attack(const learn::LinearSvmModel& model,
                                 const html::HtmlDeltaVector& delta1, AttackBudget budget);

}  // namespace sitedelta::evasion
