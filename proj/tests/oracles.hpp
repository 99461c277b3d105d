#pragma once

// Test-only reference computations. Deliberately naive: plain loops, no
// compensated sums, no early exits, no shared code with the library's search
// routines beyond the problem types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "mseq/problem_model.hpp"

namespace oracle {

struct Argmin {
    std::size_t level = 0;
    double value = 0.0;
};

/// Scans every D in 0..N-1 of Q^2/a_{D+1}^2 + sigma^2 sum_{j<=D} s_j^-2.
inline Argmin truncation_scan(const mseq::SequenceProblem& pr) {
    const auto& s = pr.spectrum.values();
    const auto& a = pr.smoothness.weights();
    const double q = pr.smoothness.radius();
    Argmin best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t d = 0; d < s.size(); ++d) {
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += 1.0 / (s[j] * s[j]);
        const double total = q * q / (a[d] * a[d]) + pr.sigma * pr.sigma * var;
        if (total < best.value) best = {d, total};
    }
    return best;
}

inline double J(const std::vector<double>& r, const mseq::SequenceProblem& pr) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double s = pr.spectrum.values()[i];
        sum += std::min(r[i], pr.sigma * pr.sigma / (s * s));
    }
    return sum;
}

/// Exhaustive enumeration of the LP vertex candidates of max J over the
/// squared ellipsoid: each coordinate at 0, at its cap, or (for at most one
/// coordinate) at whatever budget is left, clipped to its cap.
inline double knapsack_vertices(const mseq::SequenceProblem& pr) {
    const std::size_t n = pr.dimension();
    const double budget = pr.smoothness.radius() * pr.smoothness.radius();
    std::vector<double> cap(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = pr.spectrum.values()[i];
        cap[i] = pr.sigma * pr.sigma / (s * s);
        w[i] = pr.smoothness.weights()[i] * pr.smoothness.weights()[i];
    }
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    double best = 0.0;
    std::vector<double> r(n);
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t c = code;
        std::size_t free_count = 0, free_idx = 0;
        double used = 0.0;
        for (std::size_t i = 0; i < n; ++i, c /= 3) {
            const std::size_t state = c % 3;
            r[i] = state == 1 ? cap[i] : 0.0;
            if (state == 2) { ++free_count; free_idx = i; }
            used += w[i] * r[i];
        }
        if (free_count > 1 || used > budget * (1 + 1e-12)) continue;
        if (free_count == 1) r[free_idx] = std::clamp((budget - used) / w[free_idx], 0.0, cap[free_idx]);
        best = std::max(best, J(r, pr));
    }
    return best;
}

/// Exact maximum of J over the grid r_i = Q^2 t_i / a_i^2, t_i multiples of
/// `step`, sum t_i <= 1. Dynamic programming over budget units; equivalent to
/// enumerating every grid point because J is separable.
inline double knapsack_grid(const mseq::SequenceProblem& pr, double step) {
    const std::size_t n = pr.dimension();
    const auto units = static_cast<std::size_t>(std::llround(1.0 / step));
    const double budget = pr.smoothness.radius() * pr.smoothness.radius();
    std::vector<double> best(units + 1, 0.0), next(units + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = pr.spectrum.values()[i];
        const double cap = pr.sigma * pr.sigma / (s * s);
        const double w = pr.smoothness.weights()[i] * pr.smoothness.weights()[i];
        for (std::size_t k = 0; k <= units; ++k) {
            double v = -1.0;
            for (std::size_t t = 0; t <= k; ++t)
                v = std::max(v, best[k - t] + std::min(budget * static_cast<double>(t) * step / w, cap));
            next[k] = v;
        }
        std::swap(best, next);
    }
    return best[units];
}

/// Random valid problem with explicit spectrum and weights.
inline mseq::SequenceProblem random_problem(std::mt19937_64& rng, std::size_t n, double sigma_lo = 0.01,
                                            double sigma_hi = 1.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> s(n), a(n);
    for (auto& v : s) v = 0.05 + 0.95 * unit(rng);
    for (auto& v : a) v = 0.5 + 4.5 * unit(rng);
    std::sort(s.begin(), s.end(), std::greater<>());
    std::sort(a.begin(), a.end());
    mseq::SequenceProblem pr;
    pr.spectrum = mseq::SingularSpectrum::explicit_values(s);
    pr.smoothness = mseq::EllipsoidClass::explicit_values(a, 0.3 + 1.7 * unit(rng));
    pr.sigma = std::exp(std::log(sigma_lo) + (std::log(sigma_hi) - std::log(sigma_lo)) * unit(rng));
    return pr;
}

} // namespace oracle
