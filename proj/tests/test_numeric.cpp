#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "mseq/numeric.hpp"
#include "mseq/random.hpp"
#include "mseq/report.hpp"

using namespace mseq;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(KeyedStream, StatelessAndDistinct) {
    const KeyedStream a(42, 3), b(42, 3), c(43, 3), d(42, 4);
    EXPECT_EQ(a.normal(17), b.normal(17));
    EXPECT_NE(a.normal(17), c.normal(17));
    EXPECT_NE(a.normal(17), d.normal(17));
    EXPECT_NE(a.normal(17), a.normal(18));
}

TEST(KeyedStream, NormalMoments) {
    const KeyedStream s(2024, 0);
    const std::size_t n = 200000;
    CompensatedSum m1, m2;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = s.normal(i);
        m1.add(x);
        m2.add(x * x);
    }
    const double mean = m1.value() / n, var = m2.value() / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(KeyedStream, UniformInOpenInterval) {
    const KeyedStream s(1, 1);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = s.uniform(i, i % 2);
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(CompensatedSum, RecoversCancellation) {
    CompensatedSum s;
    s.add(1e16).add(1.0).add(-1e16);
    EXPECT_EQ(s.value(), 1.0);
    CompensatedSum big;
    big.add(1e308).add(1e308).add(1.0);
    EXPECT_EQ(big.value(), std::numeric_limits<double>::infinity());
    std::vector<double> xs(1000000, 0.1);
    EXPECT_NEAR(compensated_sum(xs), 100000.0, 1e-9);
}

TEST(FitLine, ExactLine) {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{3, 5, 7, 9, 11};
    const auto f = fit_line(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-13);
    EXPECT_NEAR(f.max_residual, 0.0, 1e-13);
}

TEST(FitLine, Degenerate) {
    EXPECT_THROW(fit_line(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), FitError);
    EXPECT_THROW(fit_line(std::vector<double>{1}, std::vector<double>{1}), FitError);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
    for (unsigned workers : {1u, 3u, 8u}) {
        std::vector<std::atomic<int>> hits(1001);
        parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
}

TEST(Report, SeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(1.0), "1");
    Json j;
    j["b"] = 0.1;
    j["a"] = 2;
    EXPECT_EQ(emit_json(j), "{\n  \"b\": 0.10000000000000001,\n  \"a\": 2\n}\n");
}
