#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mseq/minimax_bounds.hpp"
#include "mseq/rates_lab.hpp"
#include "oracles.hpp"

using namespace mseq;

namespace {

SequenceProblem harmonic(double sigma, std::size_t n = 50) {
    return {make_power_spectrum(1.0, n), EllipsoidClass::power(1.0, 1.0, n), sigma};
}

SequenceProblem flat3() {
    // a = (1,2,3), Q = 1, sigma = 1, s = 1: caps all 1
    return {SingularSpectrum::explicit_values({1, 1, 1}), EllipsoidClass::explicit_values({1, 2, 3}, 1.0), 1.0};
}

} // namespace

TEST(HyperrectangleJ, Examples) {
    const auto s = make_power_spectrum(1.0, 4);
    EXPECT_EQ(hyperrectangle_J({0, 0, 0, 0}, s, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(hyperrectangle_J({1e9, 1e9, 1e9, 1e9}, s, 0.5), 0.25 * rho_squared(s, 4));
    EXPECT_NEAR(hyperrectangle_J({0.01, 0.01}, SingularSpectrum::explicit_values({1.0, 0.1}), 0.1), 0.02, 1e-17);
    EXPECT_THROW(hyperrectangle_J({0.1, -0.1, 0, 0}, s, 0.5), InvalidInput);
    EXPECT_THROW(hyperrectangle_J({0.1}, s, 0.5), InvalidInput);
}

TEST(Knapsack, FlatExample) {
    const auto pr = flat3();
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_EQ(sol.r_star, (std::vector<double>{1, 0, 0}));
    EXPECT_EQ(sol.value, 1.0);
    EXPECT_EQ(sol.set_P, (std::set<std::size_t>{1}));
    EXPECT_EQ(sol.set_Qeq, (std::set<std::size_t>{1}));
    EXPECT_FALSE(sol.pivot.has_value());
    EXPECT_NEAR(oracle::knapsack_grid(pr, 1e-3), 1.0, 1e-12);
    EXPECT_NEAR(oracle::knapsack_vertices(pr), 1.0, 1e-12);
}

TEST(Knapsack, HarmonicHandComputed) {
    // caps 0.01 i^2 cost 0.01 i^4: 0.01 + 0.16 + 0.81 = 0.98, then 0.02/16 on i = 4
    const auto sol = maximize_J_over_ellipsoid(harmonic(0.1));
    EXPECT_NEAR(sol.value, 0.14125, 1e-15);
    EXPECT_EQ(sol.set_P, (std::set<std::size_t>{1, 2, 3}));
    EXPECT_EQ(sol.set_Qeq, (std::set<std::size_t>{1, 2, 3}));
    ASSERT_TRUE(sol.pivot.has_value());
    EXPECT_EQ(*sol.pivot, 4u);
    EXPECT_NEAR(sol.r_star[3], 0.00125, 1e-16);
    EXPECT_NEAR(sol.budget_used, 1.0, 1e-15);
}

TEST(Knapsack, NoiselessIsZero) {
    const auto sol = maximize_J_over_ellipsoid(harmonic(0.0, 10));
    EXPECT_EQ(sol.value, 0.0);
    for (double v : sol.r_star) EXPECT_EQ(v, 0.0);
}

TEST(Knapsack, AmpleBudgetSaturatesEveryCap) {
    SequenceProblem pr{make_power_spectrum(1.0, 6), EllipsoidClass::power(1.0, 100.0, 6), 0.1};
    const double needed = [&] {
        double c = 0;
        for (std::size_t i = 1; i <= 6; ++i) c += double(i * i) * noise_cap(pr.spectrum, 0.1, i);
        return c;
    }();
    ASSERT_GE(100.0 * 100.0, needed);
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_NEAR(sol.value, 0.01 * rho_squared(pr.spectrum, 6), 1e-15);
    EXPECT_EQ(sol.set_P.size(), 6u);
}

TEST(Knapsack, ExhaustedBudgetPivotIsInNoSet) {
    // budget exactly covers coordinate 1; coordinate 2 gets nothing
    SequenceProblem pr{SingularSpectrum::explicit_values({1, 1}), EllipsoidClass::explicit_values({1, 2}, 1.0), 1.0};
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_EQ(sol.r_star, (std::vector<double>{1, 0}));
    EXPECT_FALSE(sol.set_P.count(2));
    EXPECT_FALSE(sol.set_Qeq.count(2));
}

TEST(Knapsack, TiesBrokenByIndex) {
    SequenceProblem pr{SingularSpectrum::explicit_values({1, 1, 1}), EllipsoidClass::explicit_values({1, 1, 1}, 1.5), 1.0};
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_EQ(sol.r_star, (std::vector<double>{1, 1, 0.25}));
}

TEST(Knapsack, InvariantsProperty) {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 200; ++t) {
        const auto pr = oracle::random_problem(rng, 1 + t % 30, 1e-3, 2.0);
        const auto sol = maximize_J_over_ellipsoid(pr);
        const double q2 = pr.smoothness.radius() * pr.smoothness.radius();
        EXPECT_LE(sol.budget_used, q2 * (1 + 1e-12));
        for (std::size_t i : sol.set_Qeq) EXPECT_TRUE(sol.set_P.count(i));
        // initial segment when a is strictly increasing (random weights are a.s.)
        std::size_t expect = 1;
        for (std::size_t i : sol.set_P) EXPECT_EQ(i, expect++);
        EXPECT_NEAR(sol.value, oracle::J(sol.r_star, pr), 1e-12);
    }
}

TEST(Knapsack, MatchesVertexEnumerationAndGrid) {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 50; ++t) {
        const auto pr = oracle::random_problem(rng, 1 + t % 4, 0.05, 2.0);
        const auto sol = maximize_J_over_ellipsoid(pr);
        EXPECT_NEAR(sol.value, oracle::knapsack_vertices(pr), 1e-6);
        const double grid = oracle::knapsack_grid(pr, 1e-3);
        const double amin = pr.smoothness.weights().front();
        EXPECT_LE(grid, sol.value + 1e-12);
        EXPECT_GE(grid, sol.value - pr.dimension() * 1e-3 * pr.smoothness.radius() * pr.smoothness.radius() / (amin * amin));
    }
}

TEST(Gateaux, ZeroAtMaximizer) {
    const auto pr = harmonic(0.1, 20);
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_EQ(gateaux_derivative_J(sol, sol.r_star, pr), 0.0);
}

TEST(Gateaux, CertificateHoldsAtMaximizer) {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 30; ++t) {
        const auto pr = oracle::random_problem(rng, 1 + t % 12, 1e-3, 2.0);
        const auto sol = maximize_J_over_ellipsoid(pr);
        const auto cert = certify(pr, sol, 1000, 1000 + t);
        EXPECT_TRUE(cert.ok) << "max derivative " << cert.max_value;
        EXPECT_LE(cert.max_value, 1e-9);
    }
}

TEST(Gateaux, DetectsSuboptimalAllocation) {
    // swap the allocations of coordinates 1 and 2 in the flat example
    const auto pr = flat3();
    const auto fake = describe_allocation(pr, {0.0, 0.25, 0.0});
    ASSERT_LT(fake.value, maximize_J_over_ellipsoid(pr).value);
    EXPECT_GT(gateaux_derivative_J(fake, {1.0, 0.0, 0.0}, pr), 0.0);
    EXPECT_FALSE(certify(pr, fake, 1000, 9).ok);
}

TEST(Gateaux, RejectsInfeasibleDirection) {
    const auto pr = flat3();
    const auto sol = maximize_J_over_ellipsoid(pr);
    EXPECT_THROW(gateaux_derivative_J(sol, {2.0, 0.0, 0.0}, pr), InvalidInput);
    EXPECT_THROW(gateaux_derivative_J(sol, {-0.1, 0.0, 0.0}, pr), InvalidInput);
}

TEST(Gateaux, RandomAllocationsAreFeasible) {
    const auto pr = harmonic(0.1, 15);
    const auto sol = maximize_J_over_ellipsoid(pr);
    for (std::uint64_t k = 0; k < 500; ++k) EXPECT_TRUE(is_feasible(pr, random_feasible_allocation(pr, sol.r_star, 3, k)));
}

TEST(Sandwich, HarmonicChain) {
    const auto rep = minimax_sandwich(harmonic(0.1));
    EXPECT_TRUE(rep.chain_ok);
    EXPECT_EQ(rep.d_star, 2u);
    EXPECT_EQ(rep.lower, rep.upper / 2.2);
    const double up2 = rep.upper * rep.upper;
    EXPECT_LE(rep.j_star, up2);
    EXPECT_LE(up2, 2 * rep.j_star);
}

TEST(Sandwich, ChainOnRegimeGrid) {
    for (auto tag : {RegimeTag::pp, RegimeTag::pe, RegimeTag::ep, RegimeTag::ee})
        for (double sigma : {1e-2, 1e-4, 1e-6}) {
            RegimeSpec spec{tag, 1.0, 1.5, 1.0, 400, {sigma}};
            const auto rep = minimax_sandwich(make_regime_problem(spec, 300, sigma));
            EXPECT_FALSE(rep.saturated);
            EXPECT_TRUE(rep.chain_ok) << regime_name(tag) << " sigma " << sigma;
        }
}

TEST(Sandwich, ChainRandomProblems) {
    std::mt19937_64 rng(53);
    int unsaturated = 0;
    for (int t = 0; t < 300; ++t) {
        const auto pr = oracle::random_problem(rng, 2 + t % 30, 1e-3, 3.0);
        const auto rep = minimax_sandwich(pr);
        if (rep.saturated) {
            continue;
        }
        ++unsaturated;
        EXPECT_TRUE(rep.chain_ok);
        // factor-2 estimator from P
        const auto sol = maximize_J_over_ellipsoid(pr);
        if (sol.set_P.size() < pr.dimension()) {
            EXPECT_LE(p_estimator_risk(pr, sol), 2 * sol.value * (1 + 1e-9));
        }
    }
    EXPECT_GT(unsaturated, 100);
}

TEST(Sandwich, NoiselessSaturates) {
    const auto rep = minimax_sandwich(harmonic(0.0, 30));
    EXPECT_TRUE(rep.saturated);
    EXPECT_EQ(rep.d_star, 29u);
    EXPECT_DOUBLE_EQ(rep.upper, 1.0 / 30.0);
}

TEST(Sandwich, UpperMonotoneInSigma) {
    std::mt19937_64 rng(59);
    for (int t = 0; t < 40; ++t) {
        auto pr = oracle::random_problem(rng, 25);
        double prev = 0.0;
        for (double sigma = 1e-5; sigma < 10; sigma *= 1.7) {
            pr.sigma = sigma;
            const double up = minimax_sandwich(pr).upper;
            EXPECT_GE(up, prev);
            prev = up;
        }
    }
}

TEST(SourceSetBound, MatchesEllipsoidRoute) {
    const auto spec = make_power_spectrum(1.0, 200);
    const auto b = source_set_bound(IndexFunction::power(1.0, 1.0), spec, 0.01);
    const auto c = optimal_truncation(SequenceProblem{spec, EllipsoidClass::power(1.0, 1.0, 200), 0.01});
    EXPECT_EQ(b.d_star, c.d_star);
    EXPECT_NEAR(b.bound_sq, c.bound_sq, 1e-15);
    EXPECT_DOUBLE_EQ(b.bound_sq / b.lower_sq, 4.84);
}

TEST(SourceSetBound, LogPowerOverExponential) {
    const auto spec = make_exponential_spectrum(1.0, 60);
    const auto b = source_set_bound(IndexFunction::log_power(1.0), spec, 1e-4);
    EXPECT_FALSE(b.saturated);
    EXPECT_GT(b.bound_sq, 0.0);
    EXPECT_THROW(source_set_bound(IndexFunction::log_power(1.0), make_power_spectrum(1.0, 10), 0.1), DomainError);
}
