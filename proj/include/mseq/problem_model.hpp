#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace mseq {

enum class SpectrumKind { power, exponential, explicit_values };

/// Operator singular values s_1..s_N, positive and non-increasing.
/// Stored 0-based: values()[j-1] == s_j.
class SingularSpectrum {
public:
    SingularSpectrum() = default;

    static SingularSpectrum power(double p, std::size_t n_max) {
        check_generator(p, n_max);
        std::vector<double> s(n_max);
        for (std::size_t j = 1; j <= n_max; ++j)
            s[j - 1] = std::pow(static_cast<double>(j), -p);
        return SingularSpectrum(SpectrumKind::power, p, std::move(s));
    }

    static SingularSpectrum exponential(double p, std::size_t n_max) {
        check_generator(p, n_max);
        std::vector<double> s(n_max);
        for (std::size_t j = 1; j <= n_max; ++j)
            s[j - 1] = std::exp(-p * static_cast<double>(j));
        return SingularSpectrum(SpectrumKind::exponential, p, std::move(s));
    }

    /// Explicit values are taken as given; validate_problem reports violations.
    static SingularSpectrum explicit_values(std::vector<double> values) {
        return SingularSpectrum(SpectrumKind::explicit_values, 0.0, std::move(values));
    }

    SpectrumKind kind() const noexcept { return kind_; }
    /// Decay parameter for generated spectra; 0 for explicit ones.
    double parameter() const noexcept { return parameter_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    /// s_j, 1-based.
    double at(std::size_t j) const { return values_.at(j - 1); }

private:
    SingularSpectrum(SpectrumKind kind, double parameter, std::vector<double> values)
        : kind_(kind), parameter_(parameter), values_(std::move(values)) {}

    static void check_generator(double p, std::size_t n_max) {
        if (!(p > 0.0) || !std::isfinite(p))
            throw InvalidParameter("spectrum decay parameter p must be positive, got " + std::to_string(p));
        if (n_max < 1)
            throw InvalidParameter("spectrum length n_max must be at least 1");
    }

    SpectrumKind kind_ = SpectrumKind::explicit_values;
    double parameter_ = 0.0;
    std::vector<double> values_;
};

inline SingularSpectrum make_power_spectrum(double p, std::size_t n_max) {
    return SingularSpectrum::power(p, n_max);
}

inline SingularSpectrum make_exponential_spectrum(double p, std::size_t n_max) {
    return SingularSpectrum::exponential(p, n_max);
}

enum class EllipsoidKind { power, exponential, from_source_set, explicit_values };

/// Smoothness class {theta : sum a_j^2 theta_j^2 <= Q^2}, truncated to N weights.
class EllipsoidClass {
public:
    EllipsoidClass() = default;

    static EllipsoidClass power(double kappa, double radius, std::size_t n) {
        check_generator(kappa, radius, n);
        std::vector<double> a(n);
        for (std::size_t j = 1; j <= n; ++j)
            a[j - 1] = std::pow(static_cast<double>(j), kappa);
        return EllipsoidClass(EllipsoidKind::power, kappa, radius, std::move(a));
    }

    static EllipsoidClass exponential(double kappa, double radius, std::size_t n) {
        check_generator(kappa, radius, n);
        std::vector<double> a(n);
        for (std::size_t j = 1; j <= n; ++j)
            a[j - 1] = std::exp(kappa * static_cast<double>(j));
        return EllipsoidClass(EllipsoidKind::exponential, kappa, radius, std::move(a));
    }

    static EllipsoidClass explicit_values(std::vector<double> weights, double radius) {
        return EllipsoidClass(EllipsoidKind::explicit_values, 0.0, radius, std::move(weights));
    }

    static EllipsoidClass from_source_set(std::vector<double> weights) {
        return EllipsoidClass(EllipsoidKind::from_source_set, 0.0, 1.0, std::move(weights));
    }

    EllipsoidKind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return parameter_; }
    double radius() const noexcept { return radius_; }
    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// a_j, 1-based.
    double at(std::size_t j) const { return weights_.at(j - 1); }

private:
    EllipsoidClass(EllipsoidKind kind, double parameter, double radius, std::vector<double> weights)
        : kind_(kind), parameter_(parameter), radius_(radius), weights_(std::move(weights)) {}

    static void check_generator(double kappa, double radius, std::size_t n) {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw InvalidParameter("smoothness kappa must be positive, got " + std::to_string(kappa));
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw InvalidParameter("ellipsoid radius Q must be positive, got " + std::to_string(radius));
        if (n < 1)
            throw InvalidParameter("ellipsoid length must be at least 1");
    }

    EllipsoidKind kind_ = EllipsoidKind::explicit_values;
    double parameter_ = 0.0;
    double radius_ = 1.0;
    std::vector<double> weights_;
};

enum class IndexFunctionKind { power, log_power, exp_power, custom };

/// Continuous non-decreasing phi on (0, t_max] with phi(0+) = 0.
class IndexFunction {
public:
    /// phi(t) = t^{kappa/(2p)}
    static IndexFunction power(double kappa, double p) {
        check_positive(kappa, "kappa");
        check_positive(p, "p");
        const double e = kappa / (2.0 * p);
        return IndexFunction(IndexFunctionKind::power, kappa, p,
                             std::numeric_limits<double>::infinity(),
                             [e](double t) { return std::pow(t, e); });
    }

    /// phi(t) = log^{-kappa}(1/t), defined for t < 1.
    static IndexFunction log_power(double kappa) {
        check_positive(kappa, "kappa");
        return IndexFunction(IndexFunctionKind::log_power, kappa, 0.0, 1.0,
                             [kappa](double t) { return std::pow(std::log(1.0 / t), -kappa); });
    }

    /// phi(t) = exp(-kappa t^{-1/(2p)})
    static IndexFunction exp_power(double kappa, double p) {
        check_positive(kappa, "kappa");
        check_positive(p, "p");
        const double e = -1.0 / (2.0 * p);
        return IndexFunction(IndexFunctionKind::exp_power, kappa, p,
                             std::numeric_limits<double>::infinity(),
                             [kappa, e](double t) { return std::exp(-kappa * std::pow(t, e)); });
    }

    static IndexFunction custom(std::function<double(double)> phi, double t_max) {
        if (!phi) throw InvalidParameter("custom index function is empty");
        check_positive(t_max, "t_max");
        return IndexFunction(IndexFunctionKind::custom, 0.0, 0.0, t_max, std::move(phi));
    }

    IndexFunctionKind kind() const noexcept { return kind_; }
    double t_max() const noexcept { return t_max_; }
    double kappa() const noexcept { return kappa_; }
    double p() const noexcept { return p_; }

    /// True if t lies in the evaluation domain. log_power excludes t = 1.
    bool in_domain(double t) const noexcept {
        if (!(t > 0.0)) return false;
        if (kind_ == IndexFunctionKind::log_power) return t < 1.0;
        return t <= t_max_;
    }

    double operator()(double t) const { return phi_(t); }

    /// Checks the index-function properties at the given sample points (sorted internally).
    /// Returns a description of the first failure, or nothing.
    std::optional<std::string> check_samples(std::vector<double> ts) const {
        std::sort(ts.begin(), ts.end());
        double prev = 0.0;
        for (double t : ts) {
            if (!in_domain(t)) return "sample t=" + std::to_string(t) + " outside domain";
            const double v = phi_(t);
            if (!std::isfinite(v) || !(v > 0.0)) return "phi not positive at t=" + std::to_string(t);
            if (v < prev) return "phi decreasing at t=" + std::to_string(t);
            prev = v;
        }
        if (!ts.empty() && !(phi_(ts.front() * 1e-12) < phi_(ts.front()) || phi_(ts.front()) == 0.0))
            return "phi does not decay towards 0";
        return std::nullopt;
    }

private:
    IndexFunction(IndexFunctionKind kind, double kappa, double p, double t_max,
                  std::function<double(double)> phi)
        : kind_(kind), kappa_(kappa), p_(p), t_max_(t_max), phi_(std::move(phi)) {}

    static void check_positive(double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidParameter(std::string("index function parameter ") + name + " must be positive");
    }

    IndexFunctionKind kind_;
    double kappa_;
    double p_;
    double t_max_;
    std::function<double(double)> phi_;
};

/// a_j = 1 / phi(s_j^2), Q = 1. For v in the unit ball, theta_j = phi(s_j^2) v_j lies in the class.
inline EllipsoidClass ellipsoid_from_source_set(const IndexFunction& phi, const SingularSpectrum& spectrum) {
    if (phi.kind() == IndexFunctionKind::log_power && !(spectrum.size() > 0 && spectrum.at(1) * spectrum.at(1) < 1.0))
        throw DomainError(1, "log-power index function requires s_1^2 < 1");
    std::vector<double> a(spectrum.size());
    for (std::size_t j = 1; j <= spectrum.size(); ++j) {
        const double t = spectrum.at(j) * spectrum.at(j);
        if (!phi.in_domain(t))
            throw DomainError(j, "s_j^2 = " + std::to_string(t) + " outside the index function domain");
        const double v = phi(t);
        if (!std::isfinite(v) || !(v > 0.0))
            throw DomainError(j, "phi(s_j^2) is zero or undefined");
        a[j - 1] = 1.0 / v;
    }
    return EllipsoidClass::from_source_set(std::move(a));
}

/// Spectrum + smoothness class + noise level over a common finite dimension N.
struct SequenceProblem {
    SingularSpectrum spectrum;
    EllipsoidClass smoothness;
    double sigma = 0.0;

    std::size_t dimension() const noexcept { return spectrum.size(); }
};

struct Violation {
    std::size_t index = 0;  ///< 1-based position, 0 when not tied to a coordinate
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool passed() const noexcept { return violations.empty(); }
};

/// Reports every invariant violation; never throws.
inline ValidationReport validate_problem(const SequenceProblem& problem) {
    ValidationReport report;
    auto flag = [&](std::size_t idx, std::string rule, std::string detail) {
        report.violations.push_back({idx, std::move(rule), std::move(detail)});
    };

    const auto& s = problem.spectrum.values();
    const auto& a = problem.smoothness.weights();
    if (s.empty()) flag(0, "spectrum non-empty", "spectrum has no values");
    if (a.empty()) flag(0, "a non-empty", "class has no weights");
    if (s.size() != a.size())
        flag(0, "length mismatch",
             "spectrum length " + std::to_string(s.size()) + ", class length " + std::to_string(a.size()));

    for (std::size_t j = 1; j <= s.size(); ++j) {
        const double v = s[j - 1];
        if (!std::isfinite(v) || !(v > 0.0))
            flag(j, "s positive", "s_" + std::to_string(j) + " = " + std::to_string(v));
        if (j >= 2 && s[j - 1] > s[j - 2])
            flag(j, "s non-increasing", "s_" + std::to_string(j) + " > s_" + std::to_string(j - 1));
    }
    for (std::size_t j = 1; j <= a.size(); ++j) {
        const double v = a[j - 1];
        if (!std::isfinite(v) || !(v > 0.0))
            flag(j, "a positive", "a_" + std::to_string(j) + " = " + std::to_string(v));
        if (j >= 2 && a[j - 1] < a[j - 2])
            flag(j, "a non-decreasing", "a_" + std::to_string(j) + " < a_" + std::to_string(j - 1));
    }
    const double q = problem.smoothness.radius();
    if (!std::isfinite(q) || !(q > 0.0)) flag(0, "Q positive", "Q = " + std::to_string(q));
    if (!std::isfinite(problem.sigma) || problem.sigma < 0.0)
        flag(0, "sigma non-negative", "sigma = " + std::to_string(problem.sigma));
    return report;
}

/// Throws InvalidInput listing the first violation if the problem is not valid.
inline void require_valid(const SequenceProblem& problem) {
    const auto report = validate_problem(problem);
    if (!report.passed()) {
        const auto& v = report.violations.front();
        throw InvalidInput("invalid problem: " + v.rule + " (" + v.detail + ")");
    }
}

} // namespace mseq
