#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "problem_model.hpp"
#include "random.hpp"
#include "truncation.hpp"

namespace mseq {

struct SimulationConfig {
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;  ///< 0: MSEQ_THREADS, else hardware concurrency
};

struct RiskEstimate {
    double mean_sq_error = 0.0;
    double std_error = 0.0;  ///< sample standard deviation / sqrt(R)
    std::size_t replications = 0;
    std::uint64_t seed = 0;
};

/// z_k = theta_k + sigma / s_k * xi_k, xi_k standard normal from the stream
/// keyed by (seed, replication) at counter k.
inline Observations sample_observations(const Element& theta, const SequenceProblem& problem, std::uint64_t seed,
                                        std::uint64_t replication = 0) {
    const std::size_t n = problem.dimension();
    if (theta.size() != n)
        throw InvalidInput("sample_observations: theta has length " + std::to_string(theta.size()) + ", N = " +
                           std::to_string(n));
    Observations obs;
    obs.provenance = Provenance::simulated;
    obs.seed = seed;
    obs.values = theta;
    if (problem.sigma == 0.0) return obs;
    const KeyedStream stream(seed, replication);
    for (std::size_t k = 0; k < n; ++k)
        obs.values[k] += problem.sigma / problem.spectrum.values()[k] * stream.normal(k);
    return obs;
}

inline double squared_distance(const Element& x, const Element& y) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum.add(d * d);
    }
    return sum.value();
}

/// Mean and standard error of per-replication values, reduced in index order.
inline RiskEstimate summarize(const std::vector<double>& per_rep, std::uint64_t seed) {
    RiskEstimate est;
    est.replications = per_rep.size();
    est.seed = seed;
    if (per_rep.empty()) return est;
    const auto [lo, hi] = std::minmax_element(per_rep.begin(), per_rep.end());
    if (*lo == *hi) {
        est.mean_sq_error = *lo;
        return est;
    }
    const double r = static_cast<double>(per_rep.size());
    est.mean_sq_error = compensated_sum(per_rep) / r;
    if (per_rep.size() > 1) {
        CompensatedSum ss;
        for (double v : per_rep) ss.add((v - est.mean_sq_error) * (v - est.mean_sq_error));
        est.std_error = std::sqrt(ss.value() / (r - 1.0)) / std::sqrt(r);
    }
    return est;
}

/// Monte Carlo estimate of E|theta - theta_hat_D|^2. Replication i uses the
/// stream (master_seed, i); results do not depend on the thread count.
inline RiskEstimate monte_carlo_risk(const SequenceProblem& problem, const Element& theta, std::size_t level,
                                     const SimulationConfig& config) {
    require_valid(problem);
    if (config.replications < 1) throw InvalidParameter("simulation needs at least one replication");
    if (level > problem.dimension())
        throw OutOfRange("monte_carlo_risk: D = " + std::to_string(level) + " exceeds N");
    if (theta.size() != problem.dimension()) throw InvalidInput("monte_carlo_risk: theta length differs from N");

    std::vector<double> per_rep(config.replications);
    parallel_for(config.replications, worker_count(config.threads), [&](std::size_t i) {
        const auto z = sample_observations(theta, problem, config.master_seed, i);
        per_rep[i] = squared_distance(theta, estimate(z, level));
    });
    return summarize(per_rep, config.master_seed);
}

inline bool in_ellipsoid(const SequenceProblem& problem, const Element& theta) {
    const double q = problem.smoothness.radius();
    return ellipsoid_norm_sq(problem.smoothness, theta) <= q * q * (1.0 + 1e-12);
}

/// Spikes Q/a_k at k = D+1 .. D+count (capped at N).
inline std::vector<Element> spike_candidates(const SequenceProblem& problem, std::size_t level, std::size_t count) {
    std::vector<Element> out;
    for (std::size_t k = level; k < problem.dimension() && out.size() < count; ++k)
        out.push_back(least_favorable(problem, k));
    return out;
}

struct WorstCase {
    std::size_t index = 0;
    Element element;
    RiskEstimate risk;
};

/// Largest Monte Carlo risk among the candidates. All candidates share the
/// same random numbers, so differences reflect theta only.
inline WorstCase empirical_worst_case(const SequenceProblem& problem, std::size_t level,
                                      const std::vector<Element>& candidates, const SimulationConfig& config) {
    if (candidates.empty()) throw InvalidInput("empirical_worst_case: no candidates");
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (candidates[c].size() != problem.dimension())
            throw InvalidInput("candidate " + std::to_string(c) + " has the wrong length");
        if (!in_ellipsoid(problem, candidates[c]))
            throw InvalidInput("candidate " + std::to_string(c) + " lies outside the ellipsoid");
    }
    WorstCase worst;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto est = monte_carlo_risk(problem, candidates[c], level, config);
        if (c == 0 || est.mean_sq_error > worst.risk.mean_sq_error) {
            worst.index = c;
            worst.risk = est;
        }
    }
    worst.element = candidates[worst.index];
    return worst;
}

} // namespace mseq
