#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sitedelta::learn {

using Matrix = std::vector<std::vector<double>>;  // row-major samples

/// Maps each feature's training 5th percentile to 0 and 95th to 1, clipping
/// outside; constant features map to 0.5.
class PercentileScaler {
public:
    PercentileScaler() = default;
    static PercentileScaler fit(const Matrix& rows);

    std::vector<double> transform(const std::vector<double>& row) const;
    Matrix transform(const Matrix& rows) const;

    const std::vector<double>& low() const { return low_; }
    const std::vector<double>& high() const { return high_; }
    static PercentileScaler from_state(std::vector<double> low, std::vector<double> high);

private:
    std::vector<double> low_;
    std::vector<double> high_;
};

/// Training min -> 0 and max -> 1, clipped at application time.
class MinMaxNormalizer {
public:
    MinMaxNormalizer() = default;
    static MinMaxNormalizer fit(const std::vector<double>& scores);
    double transform(double score) const;
    double low() const { return low_; }
    double high() const { return high_; }
    static MinMaxNormalizer from_state(double low, double high);

private:
    double low_ = 0.0;
    double high_ = 1.0;
};

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double c_param = 1.0;
};

struct RbfCombinerModel {
    std::vector<std::array<double, 2>> support_scores;
    std::vector<double> dual_coefs;  // y_i * alpha_i
    double bias = 0.0;
    double gamma = 1.0;
    double c_param = 1.0;
    std::size_t n_train = 0;
};

struct TrainDiagnostics {
    double dual_objective = 0.0;
    double primal_objective = 0.0;  // linear kernel only
    double duality_gap = 0.0;       // linear kernel only
    int iterations = 0;
};

struct SvmOptions {
    double tolerance = 1e-5;         // KKT stopping tolerance
    long max_iterations = 10000000;  // working-set updates
    double positive_weight = 1.0;    // optional class weighting; 1 = unweighted
};

/// L2-regularized hinge-loss SVM with an unregularized bias, solved in the
/// dual by pairwise working-set optimization. Deterministic for a fixed
/// data ordering. Throws on single-class input.
LinearSvmModel train_linear_svm(const Matrix& X, const std::vector<int>& y, double c_param,
                                const SvmOptions& options = SvmOptions(),
                                TrainDiagnostics* diagnostics = nullptr);

double score_linear(const LinearSvmModel& model, const std::vector<double>& features);

/// Full linear-kernel Gram matrix of X (symmetric, n x n).
std::vector<std::vector<double>> linear_gram(const Matrix& X);

/// Same optimum as train_linear_svm on the selected rows, but reuses a
/// precomputed Gram matrix; the workhorse behind cross-validated tuning.
LinearSvmModel train_linear_svm_gram(const Matrix& X,
                                     const std::vector<std::vector<double>>& gram,
                                     const std::vector<std::size_t>& subset,
                                     const std::vector<int>& y_subset, double c_param,
                                     const SvmOptions& options = SvmOptions());

RbfCombinerModel train_rbf_svm(const std::vector<std::array<double, 2>>& S,
                               const std::vector<int>& y, double c_param, double gamma,
                               const SvmOptions& options = SvmOptions(),
                               TrainDiagnostics* diagnostics = nullptr);

double score_rbf(const RbfCombinerModel& model, const std::array<double, 2>& s);

double rbf_kernel(const std::array<double, 2>& a, const std::array<double, 2>& b, double gamma);

/// Linear interpolation between order statistics, the convention used by
/// PercentileScaler::fit (exposed for tests and reports).
double percentile(std::vector<double> values, double q);

}  // namespace sitedelta::learn
