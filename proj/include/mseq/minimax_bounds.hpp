#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "problem_model.hpp"
#include "random.hpp"
#include "truncation.hpp"

namespace mseq {

/// Ratio between the best truncation RMS risk and the minimax RMS risk.
inline constexpr double kRmsSandwichFactor = 2.2;
/// The same ratio on squared risk (2.2^2).
inline constexpr double kSquaredSandwichFactor = 4.84;
/// Relative slack for the certificate and chain checks.
inline constexpr double kCertificateTolerance = 1e-9;

/// Noise cap sigma^2/s_i^2 of coordinate i (1-based).
inline double noise_cap(const SingularSpectrum& spectrum, double sigma, std::size_t i) {
    if (sigma == 0.0) return 0.0;
    const double s = spectrum.at(i);
    return (sigma * sigma) / (s * s);
}

/// J(r) = sum_i min{r_i, sigma^2/s_i^2}: best truncation risk on the hyperrectangle |theta_i|^2 <= r_i.
inline double hyperrectangle_J(const std::vector<double>& r, const SingularSpectrum& spectrum, double sigma) {
    if (r.size() != spectrum.size())
        throw InvalidInput("hyperrectangle_J: r has length " + std::to_string(r.size()) + ", N = " +
                           std::to_string(spectrum.size()));
    CompensatedSum sum;
    for (std::size_t i = 1; i <= r.size(); ++i) {
        const double ri = r[i - 1];
        if (!(ri >= 0.0)) throw InvalidInput("hyperrectangle_J: r_" + std::to_string(i) + " is negative");
        sum.add(std::min(ri, noise_cap(spectrum, sigma, i)));
    }
    return sum.value();
}

/// Maximizer r* of J over the squared positive ellipsoid {r >= 0 : sum a_i^2 r_i <= Q^2}.
struct KnapsackSolution {
    std::vector<double> r_star;
    double value = 0.0;
    std::set<std::size_t> set_P;    ///< {i : r*_i >= sigma^2/s_i^2}, 1-based
    std::set<std::size_t> set_Qeq;  ///< {i : r*_i == sigma^2/s_i^2}, 1-based
    double budget_used = 0.0;
    std::optional<std::size_t> pivot;  ///< coordinate with a fractional fill, if any
};

inline double budget_of(const EllipsoidClass& cls, const std::vector<double>& r) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double a = cls.weights()[i];
        sum.add(a * a * r[i]);
    }
    return sum.value();
}

/// Builds the solution record (sets, value, budget) for an arbitrary allocation.
/// Used both for the maximizer and for checking candidate allocations.
inline KnapsackSolution describe_allocation(const SequenceProblem& problem, std::vector<double> r) {
    KnapsackSolution sol;
    sol.value = hyperrectangle_J(r, problem.spectrum, problem.sigma);
    sol.budget_used = budget_of(problem.smoothness, r);
    for (std::size_t i = 1; i <= r.size(); ++i) {
        const double cap = noise_cap(problem.spectrum, problem.sigma, i);
        if (r[i - 1] >= cap) sol.set_P.insert(i);
        if (r[i - 1] == cap) sol.set_Qeq.insert(i);
        if (r[i - 1] > 0.0 && r[i - 1] < cap && !sol.pivot) sol.pivot = i;
    }
    sol.r_star = std::move(r);
    return sol;
}

/// Fractional knapsack: J is linear below the caps, so spend Q^2 on coordinates in
/// ascending order of a_i^2 (ties by index), filling each to its cap, and put the
/// remainder on the first coordinate that does not fit.
inline KnapsackSolution maximize_J_over_ellipsoid(const SequenceProblem& problem) {
    require_valid(problem);
    const std::size_t n = problem.dimension();
    const auto& a = problem.smoothness.weights();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x] * a[x] < a[y] * a[y]; });

    const double q = problem.smoothness.radius();
    double remaining = q * q;
    std::vector<double> r(n, 0.0);
    for (std::size_t i : order) {
        const double cap = noise_cap(problem.spectrum, problem.sigma, i + 1);
        const double w = a[i] * a[i];
        const double cost = w * cap;
        if (cost <= remaining) {
            r[i] = cap;
            remaining -= cost;
        } else if (remaining > 0.0) {
            r[i] = remaining / w;
            remaining = 0.0;
        }
    }
    return describe_allocation(problem, std::move(r));
}

inline bool is_feasible(const SequenceProblem& problem, const std::vector<double>& r) {
    if (r.size() != problem.dimension()) return false;
    for (double v : r)
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
    const double q2 = problem.smoothness.radius() * problem.smoothness.radius();
    return budget_of(problem.smoothness, r) <= q2 * (1.0 + 1e-12);
}

/// Directional derivative of J at the solution towards a feasible r:
/// sum_{i not in P} h_i - sum_{i in Q_eq} (h_i)_-, h = r - r*.
/// Non-positive for every feasible r exactly when the solution is a maximizer.
/// The fractional pivot is outside P, so it contributes h_i.
inline double gateaux_derivative_J(const KnapsackSolution& solution, const std::vector<double>& r,
                                   const SequenceProblem& problem) {
    if (!is_feasible(problem, r)) throw InvalidInput("gateaux_derivative_J: direction endpoint r is not feasible");
    if (solution.r_star.size() != r.size()) throw InvalidInput("gateaux_derivative_J: length mismatch");
    CompensatedSum sum;
    for (std::size_t i = 1; i <= r.size(); ++i) {
        const double h = r[i - 1] - solution.r_star[i - 1];
        if (!solution.set_P.count(i))
            sum.add(h);
        else if (solution.set_Qeq.count(i) && h < 0.0)
            sum.add(h);  // -(h)_- == h for h < 0
    }
    return sum.value();
}

/// Draws a feasible allocation. Even draws scatter mass over random coordinates
/// and spend a random share of the budget (half of them all of it); odd draws
/// perturb the reference allocation and rescale into the feasible set.
inline std::vector<double> random_feasible_allocation(const SequenceProblem& problem, const std::vector<double>& reference,
                                                      std::uint64_t seed, std::uint64_t draw) {
    const std::size_t n = problem.dimension();
    const KeyedStream stream(seed, draw);
    const double q2 = problem.smoothness.radius() * problem.smoothness.radius();
    std::vector<double> r(n, 0.0);
    std::uint64_t next = 0;
    if (draw % 2 == 0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double keep = stream.uniform(next, 0);
            const double u = stream.uniform(next++, 1);
            r[i] = keep < 0.3 ? 0.0 : u;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double u = stream.uniform(next++, 0) - 0.5;
            const double scale = std::max(reference[i], q2 / (problem.smoothness.weights()[i] * problem.smoothness.weights()[i]) * 1e-3);
            r[i] = std::max(0.0, reference[i] + u * scale);
        }
    }
    const double used = budget_of(problem.smoothness, r);
    if (used > 0.0) {
        const double share = stream.uniform(next, 0) < 0.5 ? 1.0 : stream.uniform(next, 1);
        const double target = (draw % 2 == 0 || used > q2) ? share * q2 : used;
        const double factor = target / used;
        for (double& v : r) v *= factor;
        // rounding may leave the budget a few ulps over
        while (budget_of(problem.smoothness, r) > q2)
            for (double& v : r) v *= (1.0 - 1e-15);
    }
    return r;
}

struct CertificateResult {
    double max_value = 0.0;  ///< largest directional derivative seen
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool ok = false;
};

/// Evaluates the Gateaux certificate at `samples` random feasible allocations.
inline CertificateResult certify(const SequenceProblem& problem, const KnapsackSolution& solution,
                                 std::size_t samples, std::uint64_t seed) {
    CertificateResult res;
    res.samples = samples;
    res.seed = seed;
    res.max_value = samples == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (double v : solution.r_star) scale = std::max(scale, v);
    scale = std::max(scale, solution.value);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto r = random_feasible_allocation(problem, solution.r_star, seed, k);
        res.max_value = std::max(res.max_value, gateaux_derivative_J(solution, r, problem));
    }
    res.tolerance = kCertificateTolerance * scale;
    res.ok = res.max_value <= res.tolerance;
    return res;
}

/// Uniform squared risk of the estimator keeping the coordinates in P.
/// Bounded by 2 J(r*) at the maximizer.
inline double p_estimator_risk(const SequenceProblem& problem, const KnapsackSolution& solution) {
    return subset_truncation_risk(problem, solution.set_P);
}

struct SandwichReport {
    double sigma = 0.0;
    std::size_t d_star = 0;
    double upper = 0.0;   ///< best truncation RMS risk
    double lower = 0.0;   ///< upper / 2.2
    double j_star = 0.0;  ///< J(r*)
    bool chain_ok = false;
    bool saturated = false;  ///< D* = N-1, or r* fills every cap; N is too small either way
};

/// Certified interval [upper/2.2, upper] for the minimax RMS risk, together with
/// the computable chain J(r*) <= upper^2 <= 2 J(r*).
inline SandwichReport minimax_sandwich(const SequenceProblem& problem) {
    const auto choice = optimal_truncation(problem);
    const auto knap = maximize_J_over_ellipsoid(problem);
    SandwichReport rep;
    rep.sigma = problem.sigma;
    rep.d_star = choice.d_star;
    rep.upper = choice.bound;
    rep.lower = choice.bound / kRmsSandwichFactor;
    rep.j_star = knap.value;
    rep.saturated = choice.saturated || knap.set_P.size() == problem.dimension();
    const double up2 = choice.bound_sq;
    const double tol = kCertificateTolerance;
    rep.chain_ok = knap.value <= up2 * (1.0 + tol) && up2 <= 2.0 * knap.value * (1.0 + tol);
    return rep;
}

struct SourceSetBound {
    std::size_t d_star = 0;
    double bound_sq = 0.0;  ///< inf_D phi^2(s_{D+1}^2) + sigma^2 rho_D^2
    double lower_sq = 0.0;  ///< bound_sq / 4.84
    bool saturated = false;
};

/// Two-sided bound over the source set {phi(T*T) v : |v| <= 1}. Cross-checked
/// against the ellipsoid route a_j = 1/phi(s_j^2), Q = 1.
inline SourceSetBound source_set_bound(const IndexFunction& phi, const SingularSpectrum& spectrum, double sigma) {
    // validates the domain of phi on every s_j^2
    SequenceProblem as_ellipsoid{spectrum, ellipsoid_from_source_set(phi, spectrum), sigma};
    require_valid(as_ellipsoid);

    const std::size_t n = spectrum.size();
    const double s2 = sigma * sigma;
    const auto rho = rho_squared_prefix(spectrum);
    SourceSetBound out;
    for (std::size_t d = 0; d < n; ++d) {
        const double sd = spectrum.at(d + 1);
        const double f = phi(sd * sd);
        const double total = f * f + (s2 == 0.0 ? 0.0 : s2 * rho[d]);
        if (d == 0 || total < out.bound_sq) {
            out.bound_sq = total;
            out.d_star = d;
        }
    }
    out.lower_sq = out.bound_sq / kSquaredSandwichFactor;
    out.saturated = out.d_star + 1 == n;

    const auto via_ellipsoid = optimal_truncation(as_ellipsoid);
    if (std::abs(via_ellipsoid.bound_sq - out.bound_sq) > 1e-12 * std::max(out.bound_sq, 1e-300) + 1e-300)
        throw std::logic_error("source_set_bound: ellipsoid route disagrees");
    return out;
}

} // namespace mseq
