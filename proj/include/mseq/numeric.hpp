#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

#include "error.hpp"

namespace mseq {

/// Neumaier-compensated accumulator. Order of add() calls fixes the result.
class CompensatedSum {
public:
    CompensatedSum& add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }

    /// Overflowed sums report the plain running sum (+-inf) rather than NaN.
    double value() const noexcept { return std::isfinite(sum_) ? sum_ + comp_ : sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// max |y_i - (slope x_i + intercept)|
    double max_residual = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw FitError("fit_line: x and y differ in length");
    if (x.size() < 2)
        throw FitError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = compensated_sum(x) / n;
    const double my = compensated_sum(y) / n;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        sxx.add(dx * dx);
        sxy.add(dx * (y[i] - my));
    }
    if (!(sxx.value() > 0.0))
        throw FitError("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.max_residual = std::max(fit.max_residual,
                                    std::abs(y[i] - (fit.slope * x[i] + fit.intercept)));
    if (!std::isfinite(fit.slope) || !std::isfinite(fit.max_residual))
        throw FitError("fit_line: non-finite fit");
    return fit;
}

/// Worker count: explicit request, else MSEQ_THREADS (0 = auto), else hardware.
inline unsigned worker_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MSEQ_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `workers` threads, in contiguous blocks.
/// The body must only write to slots it owns.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
}

} // namespace mseq
