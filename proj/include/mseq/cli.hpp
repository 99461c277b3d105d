#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "error.hpp"
#include "matrix_io.hpp"
#include "minimax_bounds.hpp"
#include "operator_frontend.hpp"
#include "problem_json.hpp"
#include "rates_lab.hpp"
#include "report.hpp"
#include "simulation.hpp"
#include "truncation.hpp"

namespace mseq::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kValidation = 2,
    kResolution = 3,
    kUsage = 64,
};

/// Experiment config: a problem document plus optional command parameters.
struct ExperimentConfig {
    SequenceProblem problem;
    std::optional<std::size_t> d;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
};

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput("config '" + path + "' is not valid JSON: " + e.what());
    }
    ExperimentConfig cfg;
    cfg.problem = problem_from_json(doc, {"d", "reps", "seed"});
    auto count = [&](const char* key) -> std::optional<std::uint64_t> {
        if (!doc.contains(key)) return std::nullopt;
        const auto& v = doc.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw InvalidInput(std::string("config key '") + key + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    };
    if (auto v = count("d")) cfg.d = static_cast<std::size_t>(*v);
    if (auto v = count("reps")) cfg.reps = static_cast<std::size_t>(*v);
    cfg.seed = count("seed");
    return cfg;
}

namespace detail {

inline Json indices(const std::set<std::size_t>& s) {
    Json a = Json::array();
    for (auto i : s) a.push_back(i);
    return a;
}

/// Picks the flag value over the config value and records which one won.
template <class T>
T resolve(const char* name, const std::optional<T>& flag, const std::optional<T>& config, std::ostringstream& meta) {
    if (flag) {
        meta << " " << name << "=" << *flag << "(flag)";
        return *flag;
    }
    if (config) {
        meta << " " << name << "=" << *config << "(config)";
        return *config;
    }
    throw InvalidInput(std::string("missing parameter '") + name + "' (flag or config key)");
}

inline std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::istringstream ss(spec);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw InvalidParameter("--grid expects LO:HI:POINTS");
    const double lo = mseq::detail::parse_number(parts[0], "--grid");
    const double hi = mseq::detail::parse_number(parts[1], "--grid");
    const double pts = mseq::detail::parse_number(parts[2], "--grid");
    if (pts < 1 || pts != std::floor(pts)) throw InvalidParameter("--grid POINTS must be a positive integer");
    if (pts == 1) {
        if (lo != hi) throw InvalidParameter("--grid with one point needs LO == HI");
        return {lo};
    }
    return log_grid(lo, hi, static_cast<std::size_t>(pts));
}

inline Json risk_json(const RiskDecomposition& r) {
    Json j;
    j["D"] = r.level;
    j["bias_sq"] = r.bias_sq;
    j["variance"] = r.variance;
    j["total"] = r.total;
    j["rmse"] = r.rmse();
    return j;
}

} // namespace detail

inline Json sandwich_json(const SandwichReport& s) {
    Json j;
    j["sigma"] = s.sigma;
    j["D_star"] = s.d_star;
    j["upper"] = s.upper;
    j["lower"] = s.lower;
    j["j_star"] = s.j_star;
    j["chain_ok"] = s.chain_ok;
    return j;
}

inline Json risk_estimate_json(const RiskEstimate& e) {
    Json j;
    j["mse"] = e.mean_sq_error;
    j["stderr"] = e.std_error;
    j["R"] = e.replications;
    j["seed"] = e.seed;
    return j;
}

inline Json rate_json(const RateFit& fit, const std::optional<IllposednessLabel>& label) {
    Json j;
    j["regime"] = regime_name(fit.tag);
    j["fitted"] = fit.fitted;
    j["theory"] = fit.theory;
    j["residual"] = fit.residual;
    j["label"] = label ? Json(label_name(*label)) : Json(nullptr);
    return j;
}

/// Runs the command line `args` (without the program name). Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimax rates for linear ill-posed problems in the Gaussian sequence model", "mseq"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, matrix_path, data_path, regime, grid;
    std::optional<std::size_t> d_flag, reps_flag;
    std::optional<std::uint64_t> seed_flag;
    std::size_t samples = 1000, n_flag = 0;
    std::uint64_t cert_seed = 0;
    double p = 1.0, kappa = 1.0, radius = 1.0;
    std::size_t invert_d = 0;

    auto* risk = app.add_subcommand("risk", "worst-case risk of the level-D truncated estimator");
    risk->add_option("--config", config_path, "problem JSON")->required();
    risk->add_option("--d", d_flag, "truncation level D");

    auto* optimal = app.add_subcommand("optimal", "optimal truncation level and certified minimax interval");
    optimal->add_option("--config", config_path, "problem JSON")->required();

    auto* jmax = app.add_subcommand("jmax", "maximize the hyperrectangle functional J over the ellipsoid");
    jmax->add_option("--config", config_path, "problem JSON")->required();
    jmax->add_option("--samples", samples, "random feasible directions for the certificate");
    jmax->add_option("--seed", cert_seed, "certificate seed");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo risk at the least-favorable element");
    simulate->add_option("--config", config_path, "problem JSON")->required();
    simulate->add_option("--d", d_flag, "truncation level D");
    simulate->add_option("--reps", reps_flag, "replications R");
    simulate->add_option("--seed", seed_flag, "master seed");

    auto* sweep_cmd = app.add_subcommand("sweep", "rate table over a sigma grid");
    sweep_cmd->add_option("--regime", regime, "pp, pe, ep or ee (smoothness then spectrum)")->required();
    sweep_cmd->add_option("--p", p, "spectrum decay p")->required();
    sweep_cmd->add_option("--kappa", kappa, "smoothness kappa")->required();
    sweep_cmd->add_option("--grid", grid, "LO:HI:POINTS, log-spaced sigma values")->required();
    sweep_cmd->add_option("--out", out_path, "CSV output file (stdout if omitted)");
    sweep_cmd->add_option("--Q", radius, "ellipsoid radius");
    sweep_cmd->add_option("--N", n_flag, "model dimension (0: automatic)");

    auto* rates = app.add_subcommand("rates", "fit the rate exponent of a sweep CSV");
    rates->add_option("--in", in_path, "sweep CSV")->required();

    auto* invert = app.add_subcommand("invert", "spectral cut-off reconstruction for a matrix operator");
    invert->add_option("--matrix", matrix_path, "matrix (CSV or MSEQ1 binary)")->required();
    invert->add_option("--data", data_path, "observation vector CSV")->required();
    invert->add_option("--d", invert_d, "cut-off level")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "mseq: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        std::ostringstream meta;
        if (risk->parsed()) {
            const auto cfg = load_config(config_path);
            meta << "# config=" << config_path;
            const auto d = detail::resolve<std::size_t>("d", d_flag, cfg.d, meta);
            err << meta.str() << "\n";
            out << emit_json(detail::risk_json(truncation_risk(cfg.problem, d)));
        } else if (optimal->parsed()) {
            const auto cfg = load_config(config_path);
            const auto rep = minimax_sandwich(cfg.problem);
            if (rep.saturated)
                err << "mseq: warning: D* = " << rep.d_star << " or r* fills every cap at N = " << cfg.problem.dimension()
                    << "; the finite model may be too small\n";
            out << emit_json(sandwich_json(rep));
        } else if (jmax->parsed()) {
            const auto cfg = load_config(config_path);
            const auto sol = maximize_J_over_ellipsoid(cfg.problem);
            const auto cert = certify(cfg.problem, sol, samples, cert_seed);
            Json j;
            j["r_star"] = json_array(sol.r_star);
            j["value"] = sol.value;
            j["set_P"] = detail::indices(sol.set_P);
            j["set_Qeq"] = detail::indices(sol.set_Qeq);
            j["budget_used"] = sol.budget_used;
            Json c;
            c["samples"] = cert.samples;
            c["seed"] = cert.seed;
            c["max_derivative"] = cert.max_value;
            c["tolerance"] = cert.tolerance;
            c["ok"] = cert.ok;
            j["certificate"] = std::move(c);
            out << emit_json(j);
        } else if (simulate->parsed()) {
            const auto cfg = load_config(config_path);
            meta << "# config=" << config_path;
            const auto d = detail::resolve<std::size_t>("d", d_flag, cfg.d, meta);
            const auto reps = detail::resolve<std::size_t>("reps", reps_flag, cfg.reps, meta);
            const auto seed = detail::resolve<std::uint64_t>("seed", seed_flag, cfg.seed, meta);
            err << meta.str() << "\n";
            const auto closed = truncation_risk(cfg.problem, d);
            const auto theta = least_favorable(cfg.problem, d);
            const auto est = monte_carlo_risk(cfg.problem, theta, d, SimulationConfig{reps, seed, 0});
            Json j;
            j["estimate"] = risk_estimate_json(est);
            j["closed_form"] = closed.total;
            j["deviation"] = est.mean_sq_error - closed.total;
            j["deviation_in_stderr"] =
                est.std_error > 0.0 ? Json((est.mean_sq_error - closed.total) / est.std_error) : Json(nullptr);
            out << emit_json(j);
        } else if (sweep_cmd->parsed()) {
            RegimeSpec spec;
            spec.tag = parse_regime(regime);
            spec.p = p;
            spec.kappa = kappa;
            spec.radius = radius;
            spec.n = n_flag;
            spec.sigma_grid = detail::parse_grid(grid);
            const auto table = sweep(spec);
            for (const auto& w : table.warnings) err << "mseq: warning: " << w << "\n";
            if (out_path.empty()) {
                write_sweep_csv(out, table);
            } else {
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw InvalidInput("cannot write '" + out_path + "'");
                write_sweep_csv(f, table);
            }
        } else if (rates->parsed()) {
            std::ifstream f(in_path);
            if (!f) throw InvalidInput("cannot open '" + in_path + "'");
            const auto table = read_sweep_csv(f);
            const auto fit = fit_rate(table);
            out << emit_json(rate_json(fit, classify_illposedness(fit)));
        } else if (invert->parsed()) {
            const auto model = decompose(load_matrix(matrix_path));
            const auto x = reconstruct(load_vector(data_path), model, invert_d);
            Json j;
            j["D"] = invert_d;
            j["rank"] = model.rank;
            j["kernel_dim"] = model.kernel_dimension();
            j["x"] = json_array(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
            out << emit_json(j);
        }
    } catch (const ResolutionError& e) {
        err << "mseq: resolution error: " << e.what() << "\n";
        return kResolution;
    } catch (const Error& e) {
        err << "mseq: error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "mseq: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

} // namespace mseq::cli
