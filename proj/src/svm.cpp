#include "sitedelta/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sitedelta/error.hpp"

namespace sitedelta::learn {

namespace {

constexpr double kTau = 1e-12;

void check_labels(const std::vector<int>& y) {
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else throw ValueError("labels must be -1 or +1");
    }
    if (!pos || !neg) throw ValueError("training data must contain both classes");
}

// Dual solver for min 1/2 a'Qa - e'a with 0 <= a_i <= C_i and y'a = 0,
// where Q_ij = y_i y_j K_ij. Second-order working-set selection. The KKT
// tolerance is tightened until the relative duality gap drops below 1e-4,
// so the returned model always meets the trainer contract.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    double dual_objective = 0.0;
    double primal_objective = 0.0;
    int iterations = 0;
};

constexpr double kRelativeGapTarget = 1e-4;

SmoResult solve_smo(const std::vector<std::vector<double>>& K, const std::vector<int>& y,
                    const std::vector<double>& C, double tolerance, long max_iterations) {
    const std::size_t n = y.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // grad_i = (Q alpha)_i - 1

    auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i][j]; };

    long iter = 0;
    double eps = tolerance;
    double m_up = 0.0, m_low = 0.0;
    for (; iter < max_iterations; ++iter) {
        // i: most violating index in I_up
        int i = -1;
        m_up = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            bool in_up = (y[t] == 1 && alpha[t] < C[t]) || (y[t] == -1 && alpha[t] > 0.0);
            if (!in_up) continue;
            double v = -y[t] * grad[t];
            if (v > m_up) {
                m_up = v;
                i = static_cast<int>(t);
            }
        }
        // j: best second-order gain in I_low
        int j = -1;
        m_low = std::numeric_limits<double>::infinity();
        double best_gain = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C[t]);
            if (!in_low) continue;
            double v = -y[t] * grad[t];
            m_low = std::min(m_low, v);
            if (i < 0) continue;
            double grad_diff = m_up - v;
            if (grad_diff > 0.0) {
                double quad = K[i][i] + K[t][t] - 2.0 * K[i][t];
                if (quad <= 0.0) quad = kTau;
                double gain = grad_diff * grad_diff / quad;
                if (gain > best_gain) {
                    best_gain = gain;
                    j = static_cast<int>(t);
                }
            }
        }
        if (i < 0 || j < 0 || m_up - m_low < eps) {
            // candidate stop: accept only if the duality gap is small enough
            double sum_free = 0.0;
            int n_free = 0;
            for (std::size_t t = 0; t < n; ++t) {
                if (alpha[t] > 0.0 && alpha[t] < C[t]) {
                    sum_free += -y[t] * grad[t];
                    ++n_free;
                }
            }
            const double b = n_free > 0 ? sum_free / n_free : (m_up + m_low) / 2.0;
            double quad = 0.0, lin = 0.0, hinge = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                quad += alpha[t] * (grad[t] + 1.0);  // = a'Qa
                lin += alpha[t];
                double f = y[t] * (grad[t] + 1.0);  // decision value sans bias
                hinge += C[t] * std::max(0.0, 1.0 - y[t] * (f + b));
            }
            const double dual = lin - 0.5 * quad;
            const double primal = 0.5 * quad + hinge;
            if (i < 0 || j < 0 ||
                primal - dual <= kRelativeGapTarget * (1.0 + std::abs(primal)) ||
                eps <= 1e-12) {
                SmoResult result;
                result.iterations = static_cast<int>(iter);
                result.bias = b;
                result.dual_objective = dual;
                result.primal_objective = primal;
                result.alpha = std::move(alpha);
                return result;
            }
            eps *= 0.1;  // keep optimizing from the current iterate
        }

        const std::size_t ii = static_cast<std::size_t>(i);
        const std::size_t jj = static_cast<std::size_t>(j);
        const double old_ai = alpha[ii];
        const double old_aj = alpha[jj];

        double quad = K[ii][ii] + K[jj][jj] - 2.0 * K[ii][jj];
        if (quad <= 0.0) quad = kTau;
        if (y[ii] != y[jj]) {
            double delta = (-grad[ii] - grad[jj]) / quad;
            double diff = alpha[ii] - alpha[jj];
            alpha[ii] += delta;
            alpha[jj] += delta;
            if (diff > 0.0) {
                if (alpha[jj] < 0.0) {
                    alpha[jj] = 0.0;
                    alpha[ii] = diff;
                }
            } else {
                if (alpha[ii] < 0.0) {
                    alpha[ii] = 0.0;
                    alpha[jj] = -diff;
                }
            }
            if (diff > C[ii] - C[jj]) {
                if (alpha[ii] > C[ii]) {
                    alpha[ii] = C[ii];
                    alpha[jj] = C[ii] - diff;
                }
            } else {
                if (alpha[jj] > C[jj]) {
                    alpha[jj] = C[jj];
                    alpha[ii] = C[jj] + diff;
                }
            }
        } else {
            double delta = (grad[ii] - grad[jj]) / quad;
            double sum = alpha[ii] + alpha[jj];
            alpha[ii] -= delta;
            alpha[jj] += delta;
            if (sum > C[ii]) {
                if (alpha[ii] > C[ii]) {
                    alpha[ii] = C[ii];
                    alpha[jj] = sum - C[ii];
                }
            } else {
                if (alpha[jj] < 0.0) {
                    alpha[jj] = 0.0;
                    alpha[ii] = sum;
                }
            }
            if (sum > C[jj]) {
                if (alpha[jj] > C[jj]) {
                    alpha[jj] = C[jj];
                    alpha[ii] = sum - C[jj];
                }
            } else {
                if (alpha[ii] < 0.0) {
                    alpha[ii] = 0.0;
                    alpha[jj] = sum;
                }
            }
        }

        const double dai = alpha[ii] - old_ai;
        const double daj = alpha[jj] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, ii) * dai + q(t, jj) * daj;
    }

    // iteration budget exhausted
    SmoResult result;
    result.iterations = static_cast<int>(iter);
    double sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C[t]) {
            sum_free += -y[t] * grad[t];
            ++n_free;
        }
    }
    result.bias = n_free > 0 ? sum_free / n_free : (m_up + m_low) / 2.0;
    double quad = 0.0, lin = 0.0, hinge = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        quad += alpha[t] * (grad[t] + 1.0);
        lin += alpha[t];
        double f = y[t] * (grad[t] + 1.0);
        hinge += C[t] * std::max(0.0, 1.0 - y[t] * (f + result.bias));
    }
    result.dual_objective = lin - 0.5 * quad;
    result.primal_objective = 0.5 * quad + hinge;
    result.alpha = std::move(alpha);
    return result;
}

}  // namespace

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValueError("percentile of empty sample");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double h = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo >= values.size() - 1) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

PercentileScaler PercentileScaler::fit(const Matrix& rows) {
    if (rows.size() < 2) throw ValueError("percentile scaler needs at least 2 rows");
    const std::size_t dim = rows[0].size();
    PercentileScaler scaler;
    scaler.low_.resize(dim);
    scaler.high_.resize(dim);
    std::vector<double> column(rows.size());
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != dim) throw ValueError("ragged feature matrix");
            column[i] = rows[i][d];
        }
        scaler.low_[d] = percentile(column, 0.05);
        scaler.high_[d] = percentile(column, 0.95);
    }
    return scaler;
}

PercentileScaler PercentileScaler::from_state(std::vector<double> low, std::vector<double> high) {
    if (low.size() != high.size()) throw ValueError("scaler state size mismatch");
    PercentileScaler scaler;
    scaler.low_ = std::move(low);
    scaler.high_ = std::move(high);
    return scaler;
}

std::vector<double> PercentileScaler::transform(const std::vector<double>& row) const {
    if (row.size() != low_.size()) throw ValueError("feature dimension mismatch in scaler");
    std::vector<double> out(row.size());
    for (std::size_t d = 0; d < row.size(); ++d) {
        double range = high_[d] - low_[d];
        if (range <= 0.0) {
            out[d] = 0.5;
        } else {
            out[d] = std::clamp((row[d] - low_[d]) / range, 0.0, 1.0);
        }
    }
    return out;
}

Matrix PercentileScaler::transform(const Matrix& rows) const {
    Matrix out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(transform(r));
    return out;
}

MinMaxNormalizer MinMaxNormalizer::fit(const std::vector<double>& scores) {
    if (scores.size() < 2) throw ValueError("min-max normalizer needs at least 2 values");
    auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*lo == *hi) throw ValueError("min-max normalizer undefined for constant scores");
    MinMaxNormalizer n;
    n.low_ = *lo;
    n.high_ = *hi;
    return n;
}

MinMaxNormalizer MinMaxNormalizer::from_state(double low, double high) {
    MinMaxNormalizer n;
    n.low_ = low;
    n.high_ = high;
    return n;
}

double MinMaxNormalizer::transform(double score) const {
    return std::clamp((score - low_) / (high_ - low_), 0.0, 1.0);
}

LinearSvmModel train_linear_svm(const Matrix& X, const std::vector<int>& y, double c_param,
                                const SvmOptions& options, TrainDiagnostics* diagnostics) {
    if (X.empty() || X.size() != y.size()) throw ValueError("bad training data shape");
    check_labels(y);
    if (c_param <= 0.0) throw ValueError("C must be positive");
    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    for (const auto& row : X) {
        if (row.size() != dim) throw ValueError("ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw ValueError("non-finite feature value");
    }

    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += X[i][d] * X[j][d];
            K[i][j] = K[j][i] = dot;
        }
    }
    std::vector<double> C(n);
    for (std::size_t i = 0; i < n; ++i)
        C[i] = y[i] == 1 ? c_param * options.positive_weight : c_param;

    SmoResult sol = solve_smo(K, y, C, options.tolerance, options.max_iterations);

    LinearSvmModel model;
    model.c_param = c_param;
    model.bias = sol.bias;
    model.weights.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sol.alpha[i] == 0.0) continue;
        double coef = sol.alpha[i] * y[i];
        for (std::size_t d = 0; d < dim; ++d) model.weights[d] += coef * X[i][d];
    }

    if (diagnostics) {
        diagnostics->iterations = sol.iterations;
        diagnostics->dual_objective = sol.dual_objective;
        double norm2 = 0.0;
        for (double w : model.weights) norm2 += w * w;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double margin = y[i] * score_linear(model, X[i]);
            hinge += C[i] * std::max(0.0, 1.0 - margin);
        }
        diagnostics->primal_objective = 0.5 * norm2 + hinge;
        diagnostics->duality_gap = diagnostics->primal_objective - sol.dual_objective;
    }
    return model;
}

std::vector<std::vector<double>> linear_gram(const Matrix& X) {
    const std::size_t n = X.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double dot = 0.0;
            const auto& a = X[i];
            const auto& b = X[j];
            for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
            K[i][j] = K[j][i] = dot;
        }
    }
    return K;
}

LinearSvmModel train_linear_svm_gram(const Matrix& X,
                                     const std::vector<std::vector<double>>& gram,
                                     const std::vector<std::size_t>& subset,
                                     const std::vector<int>& y_subset, double c_param,
                                     const SvmOptions& options) {
    if (subset.empty() || subset.size() != y_subset.size())
        throw ValueError("bad training subset shape");
    check_labels(y_subset);
    if (c_param <= 0.0) throw ValueError("C must be positive");
    const std::size_t n = subset.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) K[i][j] = gram[subset[i]][subset[j]];
    std::vector<double> C(n);
    for (std::size_t i = 0; i < n; ++i)
        C[i] = y_subset[i] == 1 ? c_param * options.positive_weight : c_param;

    SmoResult sol = solve_smo(K, y_subset, C, options.tolerance, options.max_iterations);

    LinearSvmModel model;
    model.c_param = c_param;
    model.bias = sol.bias;
    model.weights.assign(X[subset[0]].size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sol.alpha[i] == 0.0) continue;
        double coef = sol.alpha[i] * y_subset[i];
        const auto& row = X[subset[i]];
        for (std::size_t d = 0; d < row.size(); ++d) model.weights[d] += coef * row[d];
    }
    return model;
}

double score_linear(const LinearSvmModel& model, const std::vector<double>& features) {
    if (features.size() != model.weights.size())
        throw ValueError("feature dimension does not match model");
    double s = model.bias;
    for (std::size_t d = 0; d < features.size(); ++d) s += model.weights[d] * features[d];
    return s;
}

double rbf_kernel(const std::array<double, 2>& a, const std::array<double, 2>& b, double gamma) {
    double d0 = a[0] - b[0];
    double d1 = a[1] - b[1];
    return std::exp(-gamma * (d0 * d0 + d1 * d1));
}

RbfCombinerModel train_rbf_svm(const std::vector<std::array<double, 2>>& S,
                               const std::vector<int>& y, double c_param, double gamma,
                               const SvmOptions& options, TrainDiagnostics* diagnostics) {
    if (S.empty() || S.size() != y.size()) throw ValueError("bad training data shape");
    check_labels(y);
    if (c_param <= 0.0 || gamma <= 0.0) throw ValueError("C and gamma must be positive");
    const std::size_t n = S.size();

    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) K[i][j] = K[j][i] = rbf_kernel(S[i], S[j], gamma);

    std::vector<double> C(n);
    for (std::size_t i = 0; i < n; ++i)
        C[i] = y[i] == 1 ? c_param * options.positive_weight : c_param;

    SmoResult sol = solve_smo(K, y, C, options.tolerance, options.max_iterations);

    RbfCombinerModel model;
    model.gamma = gamma;
    model.c_param = c_param;
    model.bias = sol.bias;
    model.n_train = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (sol.alpha[i] > kTau) {
            model.support_scores.push_back(S[i]);
            model.dual_coefs.push_back(sol.alpha[i] * y[i]);
        }
    }
    if (diagnostics) {
        diagnostics->iterations = sol.iterations;
        diagnostics->dual_objective = sol.dual_objective;
    }
    return model;
}

double score_rbf(const RbfCombinerModel& model, const std::array<double, 2>& s) {
    double out = model.bias;
    for (std::size_t i = 0; i < model.support_scores.size(); ++i)
        out += model.dual_coefs[i] * rbf_kernel(s, model.support_scores[i], model.gamma);
    return out;
}

}  // namespace sitedelta::learn
