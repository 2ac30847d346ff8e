#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sitedelta {

// Deterministic RNG wrapper. std::mt19937_64 output is fixed by the standard,
// but the std distributions are not, so all draws are derived here from raw
// 64-bit words. Every seeded result in the library is reproducible bit-exact.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is < 2^-64 per draw and identical across runs
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = next_double();
            if (u <= 0.0) u = 0x1.0p-53;
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u <= 0.0) u = 0x1.0p-53;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) in (0, 1).
    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        double s = x + y;
        if (s <= 0.0) return 0.5;
        return x / s;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sitedelta
