#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "minimax_bounds.hpp"
#include "numeric.hpp"
#include "problem_model.hpp"
#include "report.hpp"
#include "truncation.hpp"

namespace mseq {

enum class Decay { power, exponential };

/// Regime tags name smoothness first, spectrum second:
/// pp power/power, pe power smoothness over exponential spectrum,
/// ep exponential smoothness over power spectrum, ee exponential/exponential.
enum class RegimeTag { pp, pe, ep, ee };

inline const char* regime_name(RegimeTag t) {
    switch (t) {
    case RegimeTag::pp: return "pp";
    case RegimeTag::pe: return "pe";
    case RegimeTag::ep: return "ep";
    default: return "ee";
    }
}

inline RegimeTag parse_regime(const std::string& s) {
    if (s == "pp") return RegimeTag::pp;
    if (s == "pe") return RegimeTag::pe;
    if (s == "ep") return RegimeTag::ep;
    if (s == "ee") return RegimeTag::ee;
    throw InvalidParameter("unknown regime '" + s + "' (expected pp, pe, ep or ee)");
}

inline Decay smoothness_decay(RegimeTag t) { return t == RegimeTag::pp || t == RegimeTag::pe ? Decay::power : Decay::exponential; }
inline Decay spectrum_decay(RegimeTag t) { return t == RegimeTag::pp || t == RegimeTag::ep ? Decay::power : Decay::exponential; }

struct RegimeSpec {
    RegimeTag tag = RegimeTag::pp;
    double p = 1.0;       ///< spectrum decay
    double kappa = 1.0;   ///< smoothness
    double radius = 1.0;  ///< Q
    std::size_t n = 0;    ///< model dimension; 0 picks it automatically
    std::vector<double> sigma_grid;  ///< strictly decreasing, positive
};

/// Log-spaced grid from hi down to lo (inclusive), `points` values.
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw InvalidParameter("grid needs 0 < lo < hi and at least two points");
    std::vector<double> g(points);
    const double l0 = std::log10(hi), l1 = std::log10(lo);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(points - 1));
    g.front() = hi;
    g.back() = lo;
    return g;
}

inline SequenceProblem make_regime_problem(const RegimeSpec& spec, std::size_t n, double sigma) {
    SequenceProblem problem;
    problem.spectrum = spectrum_decay(spec.tag) == Decay::power ? make_power_spectrum(spec.p, n)
                                                                : make_exponential_spectrum(spec.p, n);
    problem.smoothness = smoothness_decay(spec.tag) == Decay::power ? EllipsoidClass::power(spec.kappa, spec.radius, n)
                                                                    : EllipsoidClass::exponential(spec.kappa, spec.radius, n);
    problem.sigma = sigma;
    return problem;
}

struct LevelValue {
    std::size_t level = 0;
    double value = 0.0;
    bool saturated = false;
};

/// Squared testing separation radius: inf_D max{Q^2/a_{D+1}^2, sigma^2 (sum_{j<=D} s_j^-4)^{1/2}}.
inline LevelValue testing_radius_sq(const SequenceProblem& problem) {
    require_valid(problem);
    const std::size_t n = problem.dimension();
    const double q2 = problem.smoothness.radius() * problem.smoothness.radius();
    const double s2 = problem.sigma * problem.sigma;
    LevelValue best;
    CompensatedSum fourth;
    for (std::size_t d = 0; d < n; ++d) {
        if (d > 0) {
            const double inv = 1.0 / (problem.spectrum.at(d) * problem.spectrum.at(d));
            fourth.add(inv * inv);
        }
        const double a = problem.smoothness.at(d + 1);
        const double noise = s2 == 0.0 ? 0.0 : s2 * std::sqrt(fourth.value());
        const double v = std::max(q2 / (a * a), noise);
        if (d == 0 || v < best.value) best = {d, v, false};
    }
    best.saturated = best.level + 1 == n;
    return best;
}

/// Deterministic-noise rate: inf_D {Q^2/a_{D+1}^2 + sigma^2/s_D^2}, the D = 0 term bias only.
inline LevelValue deterministic_rate_sq(const SequenceProblem& problem) {
    require_valid(problem);
    const std::size_t n = problem.dimension();
    const double q2 = problem.smoothness.radius() * problem.smoothness.radius();
    const double s2 = problem.sigma * problem.sigma;
    LevelValue best;
    for (std::size_t d = 0; d < n; ++d) {
        const double a = problem.smoothness.at(d + 1);
        double v = q2 / (a * a);
        if (d > 0 && s2 != 0.0) {
            const double s = problem.spectrum.at(d);
            v += s2 / (s * s);
        }
        if (d == 0 || v < best.value) best = {d, v, false};
    }
    best.saturated = best.level + 1 == n;
    return best;
}

struct SweepRow {
    double sigma = 0.0;
    std::size_t d_star = 0;
    double upper = 0.0;
    double lower = 0.0;
    double j_star = 0.0;
    double testing_sq = 0.0;
    double deterministic_sq = 0.0;
    bool chain_ok = false;
};

struct SweepTable {
    RegimeTag tag = RegimeTag::pp;
    double p = 0.0;
    double kappa = 0.0;
    double radius = 1.0;
    std::size_t n = 0;
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings;
};

namespace detail {

struct SweepAttempt {
    std::vector<SweepRow> rows;
    bool estimation_saturated = false;
    bool other_saturated = false;
    double saturated_sigma = 0.0;
};

inline SweepAttempt run_sweep(const RegimeSpec& spec, std::size_t n, unsigned threads) {
    const SequenceProblem base = make_regime_problem(spec, n, spec.sigma_grid.front());
    require_valid(base);
    SweepAttempt out;
    out.rows.resize(spec.sigma_grid.size());
    std::vector<char> est_sat(out.rows.size(), 0), other_sat(out.rows.size(), 0);
    parallel_for(out.rows.size(), worker_count(threads), [&](std::size_t i) {
        SequenceProblem problem = base;
        problem.sigma = spec.sigma_grid[i];
        const auto sandwich = minimax_sandwich(problem);
        const auto testing = testing_radius_sq(problem);
        const auto det = deterministic_rate_sq(problem);
        out.rows[i] = {problem.sigma, sandwich.d_star, sandwich.upper, sandwich.lower,
                       sandwich.j_star, testing.value, det.value, sandwich.chain_ok};
        est_sat[i] = sandwich.saturated;
        other_sat[i] = testing.saturated || det.saturated;
    });
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        if (est_sat[i] && !out.estimation_saturated) {
            out.estimation_saturated = true;
            out.saturated_sigma = out.rows[i].sigma;
        }
        out.other_saturated = out.other_saturated || other_sat[i];
    }
    return out;
}

inline bool generators_representable(const RegimeSpec& spec, std::size_t n) {
    const double nn = static_cast<double>(n);
    if (spectrum_decay(spec.tag) == Decay::exponential && !(std::exp(-spec.p * nn) > 0.0)) return false;
    if (smoothness_decay(spec.tag) == Decay::exponential && !std::isfinite(std::exp(spec.kappa * nn))) return false;
    return true;
}

} // namespace detail

/// One row per sigma: optimal level, sandwich bounds, J(r*), testing and
/// deterministic rates. With spec.n == 0 the dimension starts at 16 and doubles
/// until no level saturates at N-1.
inline SweepTable sweep(const RegimeSpec& spec, unsigned threads = 0) {
    if (spec.sigma_grid.empty()) throw InvalidParameter("sweep: empty sigma grid");
    for (std::size_t i = 0; i < spec.sigma_grid.size(); ++i) {
        const double s = spec.sigma_grid[i];
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("sweep: sigma values must be positive");
        if (i > 0 && !(s < spec.sigma_grid[i - 1])) throw InvalidParameter("sweep: sigma grid must be strictly decreasing");
    }

    SweepTable table;
    table.tag = spec.tag;
    table.p = spec.p;
    table.kappa = spec.kappa;
    table.radius = spec.radius;

    auto saturation_error = [](std::size_t n, double sigma) {
        return ResolutionError("model of dimension N = " + std::to_string(n) + " saturated (D* = N-1 or r* fills every cap) at sigma = " +
                               format_double(sigma) + "; increase N");
    };

    if (spec.n > 0) {
        auto attempt = detail::run_sweep(spec, spec.n, threads);
        if (attempt.estimation_saturated) throw saturation_error(spec.n, attempt.saturated_sigma);
        if (attempt.other_saturated)
            table.warnings.push_back("testing or deterministic level reached N-1; increase N");
        table.n = spec.n;
        table.rows = std::move(attempt.rows);
        return table;
    }

    constexpr std::size_t kMaxDimension = std::size_t{1} << 22;
    for (std::size_t n = 16; n <= kMaxDimension; n *= 2) {
        if (!detail::generators_representable(spec, n))
            throw ResolutionError("sweep: model dimension " + std::to_string(n) +
                                  " not representable in double precision before saturation cleared");
        auto attempt = detail::run_sweep(spec, n, threads);
        if (attempt.estimation_saturated || attempt.other_saturated) continue;
        table.n = n;
        table.rows = std::move(attempt.rows);
        return table;
    }
    throw ResolutionError("sweep: no dimension up to 2^22 clears saturation");
}

struct RateFit {
    RegimeTag tag = RegimeTag::pp;
    double p = 0.0;
    double kappa = 0.0;
    double fitted = 0.0;
    double theory = 0.0;
    double residual = 0.0;  ///< max abs deviation in fit coordinates
    std::vector<std::pair<double, std::size_t>> d_star_trace;
};

/// Rate exponent of each regime, in the coordinates fit_rate uses.
inline double theory_exponent(RegimeTag tag, double p, double kappa) {
    switch (tag) {
    case RegimeTag::pp: return kappa / (kappa + p + 0.5);
    case RegimeTag::ee: return kappa / (p + kappa);
    case RegimeTag::pe: return -kappa;
    default: return p + 0.5;
    }
}

/// Regime-specific least squares on (sigma, bound):
///   pp, ee: log bound against log sigma
///   pe:     log bound against log log(1/sigma)
///   ep:     log(bound/sigma) against log log(1/sigma)
inline RateFit fit_rate_series(RegimeTag tag, double p, double kappa, const std::vector<double>& sigma,
                               const std::vector<double>& bound) {
    if (sigma.size() != bound.size()) throw FitError("fit_rate: sigma and bound differ in length");
    if (sigma.size() < 5) throw FitError("fit_rate: need at least 5 grid points, got " + std::to_string(sigma.size()));
    std::vector<double> x(sigma.size()), y(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double s = sigma[i], b = bound[i];
        if (!(s > 0.0) || !(s < 1.0) || !(b > 0.0) || !std::isfinite(b))
            throw FitError("fit_rate: need 0 < sigma < 1 and a positive finite bound at every point");
        switch (tag) {
        case RegimeTag::pp:
        case RegimeTag::ee: x[i] = std::log(s); y[i] = std::log(b); break;
        case RegimeTag::pe: x[i] = std::log(std::log(1.0 / s)); y[i] = std::log(b); break;
        case RegimeTag::ep: x[i] = std::log(std::log(1.0 / s)); y[i] = std::log(b / s); break;
        }
    }
    const auto line = fit_line(x, y);
    RateFit fit;
    fit.tag = tag;
    fit.p = p;
    fit.kappa = kappa;
    fit.fitted = line.slope;
    fit.theory = theory_exponent(tag, p, kappa);
    fit.residual = line.max_residual;
    return fit;
}

inline RateFit fit_rate(const SweepTable& table) {
    std::vector<double> sigma, bound;
    for (const auto& r : table.rows) {
        sigma.push_back(r.sigma);
        bound.push_back(r.upper);
    }
    auto fit = fit_rate_series(table.tag, table.p, table.kappa, sigma, bound);
    for (const auto& r : table.rows) fit.d_star_trace.emplace_back(r.sigma, r.d_star);
    return fit;
}

enum class IllposednessLabel { mild, moderate, severe };

inline const char* label_name(IllposednessLabel l) {
    switch (l) {
    case IllposednessLabel::mild: return "mild";
    case IllposednessLabel::moderate: return "moderate";
    default: return "severe";
    }
}

/// Fits whose log-coordinate residual exceeds this are not classified.
inline constexpr double kClassificationResidual = 0.25;
/// A power-rate slope at or above this counts as linear in sigma.
inline constexpr double kLinearSlope = 0.95;

/// mild: bound/sigma grows at most polylogarithmically; severe: bound decays
/// polylogarithmically; moderate: power-type rate.
inline IllposednessLabel classify_illposedness(const RateFit& fit) {
    if (!(fit.residual <= kClassificationResidual))
        throw ClassificationError("fit residual " + format_double(fit.residual) + " above " +
                                  format_double(kClassificationResidual));
    switch (fit.tag) {
    case RegimeTag::pp:
    case RegimeTag::ee:
        if (!(fit.fitted > 0.0)) throw ClassificationError("power fit shows no decay in sigma");
        return fit.fitted >= kLinearSlope ? IllposednessLabel::mild : IllposednessLabel::moderate;
    case RegimeTag::pe:
        if (!(fit.fitted < 0.0)) throw ClassificationError("log-rate fit shows no decay in log(1/sigma)");
        return IllposednessLabel::severe;
    case RegimeTag::ep:
        if (!(fit.fitted >= 0.0)) throw ClassificationError("log-factor fit decreases");
        return IllposednessLabel::mild;
    }
    throw ClassificationError("unknown regime");
}

/// D* / log(1/sigma) at the smallest sigma of the table.
inline double d_star_log_ratio(const SweepTable& table) {
    if (table.rows.empty()) throw FitError("empty table");
    const auto& last = table.rows.back();
    return static_cast<double>(last.d_star) / std::log(1.0 / last.sigma);
}

// ---- CSV ----------------------------------------------------------------

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols{"sigma", "d_star", "upper", "lower", "j_star", "testing_sq", "deterministic_sq"};
    return cols;
}

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    const std::string meta = std::string("regime=") + regime_name(table.tag) + " p=" + format_double(table.p) +
                             " kappa=" + format_double(table.kappa) + " Q=" + format_double(table.radius) +
                             " N=" + std::to_string(table.n);
    CsvWriter csv(os, sweep_columns(), meta);
    for (const auto& r : table.rows)
        csv.row(r.sigma, r.d_star, r.upper, r.lower, r.j_star, r.testing_sq, r.deterministic_sq);
}

inline SweepTable read_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kSchemaHeader)
        throw InvalidInput(std::string("sweep CSV must start with '") + kSchemaHeader + "'");

    std::map<std::string, std::string> meta;
    std::string header;
    while (std::getline(is, line)) {
        if (line.rfind("#", 0) == 0) {
            std::istringstream fields(line.substr(1));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq != std::string::npos) meta[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            continue;
        }
        header = line;
        break;
    }
    std::string expected;
    for (const auto& c : sweep_columns()) expected += (expected.empty() ? "" : ",") + c;
    if (header != expected) throw InvalidInput("sweep CSV header must be '" + expected + "'");
    for (const char* key : {"regime", "p", "kappa"})
        if (!meta.count(key)) throw InvalidInput(std::string("sweep CSV metadata lacks '") + key + "'");

    auto number = [](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') throw InvalidInput("sweep CSV: bad number '" + s + "'");
        return v;
    };

    SweepTable table;
    table.tag = parse_regime(meta["regime"]);
    table.p = number(meta["p"]);
    table.kappa = number(meta["kappa"]);
    if (meta.count("Q")) table.radius = number(meta["Q"]);
    if (meta.count("N")) table.n = static_cast<std::size_t>(number(meta["N"]));
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != sweep_columns().size())
            throw InvalidInput("sweep CSV row has " + std::to_string(cells.size()) + " cells");
        SweepRow r;
        r.sigma = number(cells[0]);
        r.d_star = static_cast<std::size_t>(number(cells[1]));
        r.upper = number(cells[2]);
        r.lower = number(cells[3]);
        r.j_star = number(cells[4]);
        r.testing_sq = number(cells[5]);
        r.deterministic_sq = number(cells[6]);
        table.rows.push_back(r);
    }
    return table;
}

} // namespace mseq
