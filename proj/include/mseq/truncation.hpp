#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "problem_model.hpp"

namespace mseq {

/// Coefficient vector theta_1..theta_N (0-based storage).
using Element = std::vector<double>;

enum class Provenance { simulated, mapped_from_operator, external };

struct Observations {
    std::vector<double> values;
    Provenance provenance = Provenance::external;
    std::uint64_t seed = 0;  ///< meaningful for simulated observations only
};

/// rho_n^2 = sum_{j<=n} 1/s_j^2, ascending j, compensated.
inline double rho_squared(const SingularSpectrum& spectrum, std::size_t n) {
    if (n > spectrum.size())
        throw OutOfRange("rho_squared: n = " + std::to_string(n) + " exceeds N = " + std::to_string(spectrum.size()));
    CompensatedSum sum;
    for (std::size_t j = 1; j <= n; ++j) {
        const double s = spectrum.at(j);
        sum.add(1.0 / (s * s));
    }
    return sum.value();
}

/// All prefix sums rho_0^2 .. rho_N^2, accumulated in the same order as rho_squared.
inline std::vector<double> rho_squared_prefix(const SingularSpectrum& spectrum) {
    std::vector<double> out(spectrum.size() + 1, 0.0);
    CompensatedSum sum;
    for (std::size_t j = 1; j <= spectrum.size(); ++j) {
        const double s = spectrum.at(j);
        sum.add(1.0 / (s * s));
        out[j] = sum.value();
    }
    return out;
}

struct RiskDecomposition {
    std::size_t level = 0;
    double bias_sq = 0.0;
    double variance = 0.0;
    double total = 0.0;

    double rmse() const { return std::sqrt(total); }
};

namespace detail {

inline double tail_bias_sq(const EllipsoidClass& cls, std::size_t k) {
    const double q = cls.radius();
    const double a = cls.at(k);
    return (q * q) / (a * a);
}

inline RiskDecomposition make_risk(std::size_t level, double bias_sq, double variance) {
    return {level, bias_sq, variance, bias_sq + variance};
}

} // namespace detail

/// Worst-case squared risk of the level-D truncated estimator over the class:
/// Q^2/a_{D+1}^2 + sigma^2 rho_D^2.
inline RiskDecomposition truncation_risk(const SequenceProblem& problem, std::size_t level) {
    const std::size_t n = problem.dimension();
    if (level >= n)
        throw OutOfRange("truncation level D = " + std::to_string(level) + " needs a_{D+1}; N = " + std::to_string(n));
    const double s2 = problem.sigma * problem.sigma;
    const double variance = s2 == 0.0 ? 0.0 : s2 * rho_squared(problem.spectrum, level);
    return detail::make_risk(level, detail::tail_bias_sq(problem.smoothness, level + 1), variance);
}

struct TruncationChoice {
    std::size_t d_star = 0;
    double bound = 0.0;     ///< sqrt of the minimal total
    double bound_sq = 0.0;
    bool saturated = false; ///< d_star == N-1: the finite search range may be too short
};

/// Exhaustive argmin over D in {0..N-1}, smallest D on ties. Stops once the
/// variance term alone exceeds the incumbent total.
inline TruncationChoice optimal_truncation(const SequenceProblem& problem) {
    require_valid(problem);
    const std::size_t n = problem.dimension();
    const double s2 = problem.sigma * problem.sigma;
    const auto rho = rho_squared_prefix(problem.spectrum);

    TruncationChoice best;
    best.bound_sq = detail::tail_bias_sq(problem.smoothness, 1);
    for (std::size_t d = 1; d < n; ++d) {
        const double variance = s2 == 0.0 ? 0.0 : s2 * rho[d];
        if (variance > best.bound_sq) break;
        const double total = detail::tail_bias_sq(problem.smoothness, d + 1) + variance;
        if (total < best.bound_sq) {
            best.bound_sq = total;
            best.d_star = d;
        }
    }
    best.bound = std::sqrt(best.bound_sq);
    best.saturated = best.d_star + 1 == n;
    return best;
}

/// Spike Q/a_{D+1} at coordinate D+1; attains the worst-case bias of level D.
inline Element least_favorable(const SequenceProblem& problem, std::size_t level) {
    const std::size_t n = problem.dimension();
    if (level >= n)
        throw OutOfRange("least_favorable: D = " + std::to_string(level) + " must be below N = " + std::to_string(n));
    Element theta(n, 0.0);
    theta[level] = problem.smoothness.radius() / problem.smoothness.at(level + 1);
    return theta;
}

/// sum_j a_j^2 theta_j^2, compensated in ascending order.
inline double ellipsoid_norm_sq(const EllipsoidClass& cls, const Element& theta) {
    if (theta.size() != cls.size())
        throw InvalidInput("element length " + std::to_string(theta.size()) + " differs from N = " +
                           std::to_string(cls.size()));
    CompensatedSum sum;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double v = cls.weights()[j] * theta[j];
        sum.add(v * v);
    }
    return sum.value();
}

/// Uniform squared risk of the estimator keeping the 1-based coordinates in `kept`:
/// Q^2/a_k^2 + sigma^2 sum_{j in kept} 1/s_j^2, with k the smallest index not kept.
inline double subset_truncation_risk(const SequenceProblem& problem, const std::set<std::size_t>& kept) {
    const std::size_t n = problem.dimension();
    for (std::size_t j : kept)
        if (j < 1 || j > n) throw OutOfRange("subset index " + std::to_string(j) + " outside 1..N");
    std::size_t k = 1;
    while (k <= n && kept.count(k)) ++k;
    if (k > n) throw OutOfRange("subset covers 1..N; the finite model has no uncovered coordinate");

    const double s2 = problem.sigma * problem.sigma;
    CompensatedSum variance;
    if (s2 != 0.0)
        for (std::size_t j : kept) {
            const double s = problem.spectrum.at(j);
            variance.add(1.0 / (s * s));
        }
    return detail::tail_bias_sq(problem.smoothness, k) + s2 * variance.value();
}

/// Truncated series estimate: keeps z_1..z_D.
inline Element estimate(const Observations& obs, std::size_t level) {
    if (level > obs.values.size())
        throw OutOfRange("estimate: D = " + std::to_string(level) + " exceeds N = " + std::to_string(obs.values.size()));
    Element out(obs.values.size(), 0.0);
    std::copy_n(obs.values.begin(), level, out.begin());
    return out;
}

/// Estimator keeping an arbitrary index set (1-based).
inline Element estimate_subset(const Observations& obs, const std::set<std::size_t>& kept) {
    Element out(obs.values.size(), 0.0);
    for (std::size_t j : kept) {
        if (j < 1 || j > out.size()) throw OutOfRange("subset index " + std::to_string(j) + " outside 1..N");
        out[j - 1] = obs.values[j - 1];
    }
    return out;
}

} // namespace mseq
