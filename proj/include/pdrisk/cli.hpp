#pragma once

// Experiment configuration, presets and the command implementations behind
// the pdrisk executable. Commands render their CSV in memory; write_atomic
// puts it on disk so that a failed run never leaves a partial file.

#include <pdrisk/analytic_risk.hpp>
#include <pdrisk/cs_ext.hpp>
#include <pdrisk/csv.hpp>
#include <pdrisk/geometry.hpp>
#include <pdrisk/mc_lab.hpp>
#include <pdrisk/types.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace pdrisk::cli {

inline const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names{
        "sweep", "analytic", "bestloss", "gmw", "denoise1d", "cs-sweep", "n0"};
    return names;
}

struct ExperimentConfig {
    std::string command;
    std::vector<ProgramKind> programs{std::begin(all_programs),
                                      std::end(all_programs)};
    std::int64_t s = 20;
    std::int64_t bigN = 1000;
    double eta = 1e-3;
    double entry_scale = 0.0; ///< 0 means N
    int k = 25;
    int n = 101;
    double span = 2.0;
    bool shared_noise = false;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out; ///< empty or "-" writes to stdout

    // analytic
    std::string quantity = "risk"; ///< risk | derivative | lambda_star
    std::string grid_var = "N";    ///< N | lambda
    double grid_min = 1e2;
    double grid_max = 1e15;
    int grid_points = 131;
    std::vector<double> u_values{0.99, 0.999, 2.0};

    // bestloss
    double n_min = 1e2;
    double n_max = 1e5;
    int n_count = 25;
    int n_sigma = 31;

    // gmw (dimension is bigN)
    double l1_radius = 1.0;
    double l2_radius = 0.1;
    std::int64_t samples = 2000;

    // cs-sweep
    std::int64_t m = 128;
    int max_iter = 20000;
    double tol = 1e-12;

    // n0
    double a1 = 1.45;
    double c1 = 5.0;
    double c2 = 4.0;
    double bigL = 3.78;

    double resolved_entry_scale() const {
        return entry_scale != 0.0 ? entry_scale : static_cast<double>(bigN);
    }

    void validate() const;
};

namespace detail {

using pdrisk::detail::require;

inline bool known_command(const std::string &c) {
    for (const auto &n : command_names())
        if (n == c)
            return true;
    return false;
}

} // namespace detail

inline void ExperimentConfig::validate() const {
    using detail::require;
    require(detail::known_command(command), "config: unknown command");
    require(!programs.empty(), "config: no programs selected");
    require(bigN >= 1, "config: N must be >= 1");
    if (command != "gmw" && command != "n0")
        require(s >= 0 && s <= bigN, "config: need 0 <= s <= N");
    require(std::isfinite(eta) && eta >= 0.0, "config: eta must be finite and >= 0");
    require(std::isfinite(entry_scale), "config: entry scale must be finite");
    require(k >= 1, "config: k must be >= 1");
    require(n >= 1 && n % 2 == 1, "config: n must be odd and >= 1");
    require(std::isfinite(span) && span >= 1.0, "config: span must be >= 1");
    require(workers >= 1, "config: workers must be >= 1");

    if (command == "sweep" || command == "cs-sweep")
        require(eta > 0.0, "config: eta must be > 0");
    if (command == "analytic") {
        require(quantity == "risk" || quantity == "derivative" ||
                    quantity == "lambda_star",
                "config: quantity must be risk, derivative or lambda_star");
        require(grid_var == "N" || grid_var == "lambda",
                "config: grid_var must be N or lambda");
        require(grid_var == "N" || quantity != "lambda_star",
                "config: lambda_star needs the N grid");
        require(grid_points >= 1, "config: grid_points must be >= 1");
        require(std::isfinite(grid_min) && std::isfinite(grid_max) &&
                    grid_min > 0.0 && grid_min <= grid_max,
                "config: need 0 < grid_min <= grid_max");
        if (grid_var == "N") {
            require(grid_min >= 2.0 && grid_max <= 9e18,
                    "config: N grid must lie in [2, 9e18]");
            require(!u_values.empty() || quantity == "lambda_star",
                    "config: u grid is empty");
            for (double u : u_values)
                require(std::isfinite(u) && u >= 0.0, "config: u must be >= 0");
        } else {
            require(bigN >= 2, "config: N must be >= 2");
        }
        require(s >= 1, "config: analytic risk needs s >= 1");
    }
    if (command == "bestloss") {
        require(eta > 0.0, "config: eta must be > 0");
        require(n_count >= 1 && n_sigma >= 1, "config: counts must be >= 1");
        require(std::isfinite(n_min) && std::isfinite(n_max) && n_min >= 2.0 &&
                    n_min <= n_max,
                "config: need 2 <= n_min <= n_max");
        require(s <= static_cast<std::int64_t>(n_min), "config: need s <= n_min");
    }
    if (command == "gmw") {
        require(samples >= 2, "config: samples must be >= 2");
        require(std::isfinite(l1_radius) && l1_radius > 0.0 &&
                    std::isfinite(l2_radius) && l2_radius > 0.0,
                "config: radii must be finite and > 0");
    }
    if (command == "denoise1d")
        require(pdrisk::detail::is_power_of_two(bigN), "config: N must be a power of 2");
    if (command == "cs-sweep") {
        require(m >= 1, "config: m must be >= 1");
        require(max_iter >= 1 && std::isfinite(tol) && tol >= 0.0,
                "config: invalid solver settings");
    }
}

/// Per-command defaults, before any preset or flag.
inline ExperimentConfig defaults_for(const std::string &command) {
    ExperimentConfig c;
    c.command = command;
    if (command == "analytic") {
        c.s = 1;
        c.bigN = 1'000'000'000'000'000;
    } else if (command == "bestloss") {
        c.s = 1;
        c.eta = 1.0;
    } else if (command == "gmw") {
        c.bigN = 200;
    } else if (command == "denoise1d") {
        c.s = 10;
        c.bigN = 4096;
        c.eta = 4096.0 / 100.0;
        c.n = 501;
    } else if (command == "cs-sweep") {
        c.s = 5;
        c.bigN = 256;
        c.m = 128;
        c.eta = 1e-3;
        c.entry_scale = 1e3;
        c.k = 5;
        c.n = 21;
    }
    return c;
}

struct Preset {
    std::string command;
    void (*apply)(ExperimentConfig &);
};

inline const std::map<std::string, Preset> &presets() {
    static const std::map<std::string, Preset> table{
        {"fig3a", {"sweep", [](ExperimentConfig &c) {
             c.s = 20; c.bigN = 1000; c.eta = 1e-3; c.k = 150; c.n = 301;
             c.span = 2.0;
         }}},
        // Full scale uses k = 50.
        {"fig3b", {"sweep", [](ExperimentConfig &c) {
             c.s = 20; c.bigN = 1'000'000; c.eta = 1e-3; c.k = 10; c.n = 301;
             c.span = 2.0;
         }}},
        // Full scale uses N = 1e7.
        {"fig5a", {"sweep", [](ExperimentConfig &c) {
             c.s = 1; c.bigN = 100'000; c.eta = 1.0; c.k = 10; c.n = 237;
             c.span = 4.0;
         }}},
        {"stability", {"sweep", [](ExperimentConfig &c) {
             c.s = 2500; c.bigN = 10'000; c.eta = 233.0; c.k = 25; c.n = 401;
             c.span = 2.0;
         }}},
        {"fig4a", {"analytic", [](ExperimentConfig &c) {
             c.quantity = "risk"; c.grid_var = "N"; c.s = 1;
             c.grid_min = 1e2; c.grid_max = 1e15; c.grid_points = 131;
             c.u_values = {0.99, 0.999, 2.0};
         }}},
        {"fig4b", {"analytic", [](ExperimentConfig &c) {
             c.quantity = "risk"; c.grid_var = "lambda"; c.s = 1;
             c.bigN = 1'000'000'000'000'000;
             c.grid_min = 0.5; c.grid_max = 20.0; c.grid_points = 400;
         }}},
        {"fig4c", {"analytic", [](ExperimentConfig &c) {
             c.quantity = "derivative"; c.grid_var = "N"; c.s = 1;
             c.grid_min = 1e2; c.grid_max = 1e15; c.grid_points = 131;
             c.u_values = {0.99, 0.999, 2.0};
         }}},
        // Full range extends to N = 1e7.
        {"fig6b", {"bestloss", [](ExperimentConfig &c) {
             c.s = 1; c.eta = 1.0; c.k = 25; c.n_sigma = 31;
             c.n_min = 1e2; c.n_max = 1e5; c.n_count = 25;
         }}},
        {"gmw", {"gmw", [](ExperimentConfig &c) {
             c.bigN = 1000; c.l1_radius = 1.0; c.l2_radius = 0.3; c.samples = 2000;
         }}},
        {"denoise1d", {"denoise1d", [](ExperimentConfig &c) {
             c.s = 10; c.bigN = 4096; c.eta = 4096.0 / 100.0; c.k = 25; c.n = 501;
             c.span = 2.0;
         }}},
        {"denoise1d-high", {"denoise1d", [](ExperimentConfig &c) {
             c.s = 10; c.bigN = 4096; c.eta = 4096.0 / 10.0; c.k = 25; c.n = 501;
             c.span = 2.0;
         }}},
        // Full scale is (N, s, m) = (6418, 416, 3110).
        {"cs-sweep", {"cs-sweep", [](ExperimentConfig &c) {
             c.s = 5; c.bigN = 256; c.m = 128; c.eta = 1e-3; c.entry_scale = 1e3;
             c.k = 5; c.n = 21; c.span = 2.0;
         }}},
        {"n0a", {"n0", [](ExperimentConfig &c) {
             c.a1 = 1.45; c.c1 = 5.0; c.c2 = 4.0; c.bigL = 3.78;
         }}},
        {"n0b", {"n0", [](ExperimentConfig &c) {
             c.a1 = 1.58; c.c1 = 4.04; c.c2 = 4.0; c.bigL = 3.62;
         }}},
    };
    return table;
}

inline void apply_preset(ExperimentConfig &cfg, const std::string &name) {
    const auto it = presets().find(name);
    if (it == presets().end())
        throw InvalidParameter("unknown preset '" + name + "'");
    if (it->second.command != cfg.command)
        throw InvalidParameter("preset '" + name + "' belongs to command '" +
                               it->second.command + "'");
    it->second.apply(cfg);
}

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        g[static_cast<std::size_t>(i)] =
            std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    return g;
}

inline std::vector<std::int64_t> integer_log_grid(double lo, double hi, int n) {
    std::vector<std::int64_t> out;
    for (double v : log_grid(lo, hi, n))
        out.push_back(std::llround(v));
    return out;
}

inline void append_curve(csv::Writer &w, const RiskCurve &c) {
    for (const auto &p : c.points)
        w.row(to_string(c.program), p.rho, p.param_value, p.mean_nnse,
              p.stderr_nnse, c.k, c.bigN, c.s, c.eta, c.seed);
}

inline SweepGrid grid_of(const ExperimentConfig &cfg) {
    return SweepGrid::logarithmic(cfg.n, cfg.span);
}

/// The param* search scores candidates on the same number of draws as the
/// sweep itself.
inline OptimalParamOptions search_options(const ExperimentConfig &cfg) {
    OptimalParamOptions o;
    o.k = cfg.k;
    o.workers = cfg.workers;
    return o;
}

} // namespace detail

inline csv::Writer sweep_writer() {
    return csv::Writer({"program", "rho", "param_value", "mean_nnse",
                        "stderr_nnse", "k", "N", "s", "eta", "seed"});
}

inline std::string cmd_sweep(const ExperimentConfig &cfg) {
    cfg.validate();
    const auto inst = make_instance(cfg.s, cfg.bigN, cfg.eta,
                                    cfg.resolved_entry_scale(), cfg.seed);
    const auto grid = detail::grid_of(cfg);
    SweepOptions opts;
    opts.workers = cfg.workers;
    opts.noise = cfg.shared_noise ? NoiseMode::Shared : NoiseMode::Independent;
    auto w = sweep_writer();
    for (auto kind : cfg.programs) {
        const double star = optimal_param(kind, inst, detail::search_options(cfg));
        detail::append_curve(w, sweep(kind, grid, inst, cfg.k, star, opts));
    }
    return w.str();
}

inline std::string cmd_analytic(const ExperimentConfig &cfg) {
    cfg.validate();
    csv::Writer w({"quantity", "grid_var", "grid_value", "s", "N",
                   "u_or_lambda", "value"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cfg.grid_var == "N") {
        for (std::int64_t n :
             detail::integer_log_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points)) {
            const auto nd = static_cast<double>(n);
            if (cfg.quantity == "lambda_star") {
                w.row(cfg.quantity, cfg.grid_var, nd, cfg.s, n, nan,
                      lambda_star(cfg.s, n));
                continue;
            }
            for (double u : cfg.u_values) {
                const double v = cfg.quantity == "risk"
                                     ? qp_risk(u * lambda_bar(n), cfg.s, n)
                                     : qp_risk_derivative(u, cfg.s, n);
                w.row(cfg.quantity, cfg.grid_var, nd, cfg.s, n, u, v);
            }
        }
    } else {
        for (double lam : detail::log_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points)) {
            const double v = cfg.quantity == "risk"
                                 ? qp_risk(lam, cfg.s, cfg.bigN)
                                 : qp_risk_lambda_derivative(lam, cfg.s, cfg.bigN);
            w.row(cfg.quantity, cfg.grid_var, lam, cfg.s, cfg.bigN, lam, v);
        }
    }
    return w.str();
}

inline std::string cmd_bestloss(const ExperimentConfig &cfg) {
    cfg.validate();
    std::vector<Index> grid;
    for (auto n : detail::integer_log_grid(cfg.n_min, cfg.n_max, cfg.n_count))
        grid.push_back(static_cast<Index>(n));
    const auto rows = best_loss_vs_N(grid, cfg.s, cfg.eta, cfg.k, cfg.n_sigma,
                                     cfg.seed, cfg.workers);
    csv::Writer w({"N", "mean_best_nnse", "std_best_nnse", "k", "n_sigma", "s",
                   "eta", "seed"});
    for (const auto &r : rows)
        w.row(r.bigN, r.mean_best, r.std_best, cfg.k, cfg.n_sigma, cfg.s,
              cfg.eta, cfg.seed);
    return w.str();
}

/// Bellec bounds for l1_radius (B_1 cap gamma B_2), gamma = l2/l1 capped at
/// 1. A bound whose precondition fails is reported as its trivial value:
/// 0 for the lower bound.
inline std::string cmd_gmw(const ExperimentConfig &cfg) {
    cfg.validate();
    const GmwSetSpec spec{cfg.l1_radius, cfg.l2_radius, cfg.bigN};
    const auto est = gmw_estimate(spec, cfg.samples, cfg.seed);
    const double gamma = std::min(1.0, cfg.l2_radius / cfg.l1_radius);
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    if (cfg.bigN >= 2) {
        upper = cfg.l1_radius * bellec_upper(cfg.bigN, gamma, cfg.bigN);
        if (static_cast<double>(cfg.bigN) * gamma * gamma / 5.0 >= 1.0)
            lower = cfg.l1_radius * bellec_lower(cfg.bigN, gamma, 1.0);
    }
    csv::Writer w({"dim", "l1_radius", "l2_radius", "samples", "mean", "stderr",
                   "bellec_lower", "bellec_upper", "seed"});
    w.row(cfg.bigN, cfg.l1_radius, cfg.l2_radius, cfg.samples, est.mean,
          est.std_error, lower, upper, cfg.seed);
    return w.str();
}

inline std::string cmd_denoise1d(const ExperimentConfig &cfg) {
    cfg.validate();
    const auto prob = make_haar_problem(cfg.s, cfg.bigN, cfg.eta,
                                        cfg.resolved_entry_scale(), cfg.seed);
    const auto grid = detail::grid_of(cfg);
    auto w = sweep_writer();
    for (auto kind : cfg.programs) {
        const double star =
            haar_optimal_param(kind, prob, detail::search_options(cfg));
        detail::append_curve(
            w, haar_sweep(kind, grid, prob, cfg.k, star, cfg.workers));
    }
    return w.str();
}

inline std::string cmd_cs_sweep(const ExperimentConfig &cfg) {
    cfg.validate();
    const auto prob = make_cs_problem(cfg.s, cfg.bigN, cfg.m, cfg.eta,
                                      cfg.resolved_entry_scale(), cfg.seed);
    BpGeneralOptions opts;
    opts.inner.max_iter = cfg.max_iter;
    opts.inner.tol = cfg.tol;
    const auto grid = detail::grid_of(cfg);
    csv::Writer w({"program", "rho", "param_value", "mean_nnse", "stderr_nnse",
                   "k", "N", "s", "eta", "seed", "m"});
    for (auto kind : cfg.programs) {
        const auto c = cs_sweep(kind, grid, prob, cfg.k,
                                cs_reference_param(kind, prob), opts, cfg.workers);
        for (const auto &p : c.points)
            w.row(to_string(c.program), p.rho, p.param_value, p.mean_nnse,
                  p.stderr_nnse, c.k, c.bigN, c.s, c.eta, c.seed, cfg.m);
    }
    return w.str();
}

inline std::string cmd_n0(const ExperimentConfig &cfg) {
    cfg.validate();
    const auto est = n0_estimate({cfg.a1, cfg.c1, cfg.c2, cfg.bigL});
    csv::Writer w({"a1", "c1", "c2", "L", "d1", "d2", "d5", "n0_2a", "n0_1a",
                   "d2_ok"});
    w.row(cfg.a1, cfg.c1, cfg.c2, cfg.bigL, est.d1, est.d2, est.d5, est.n0_2a,
          est.n0_1a, est.d2_ok ? 1 : 0);
    return w.str();
}

inline std::string run_to_string(const ExperimentConfig &cfg) {
    const auto &c = cfg.command;
    if (c == "sweep") return cmd_sweep(cfg);
    if (c == "analytic") return cmd_analytic(cfg);
    if (c == "bestloss") return cmd_bestloss(cfg);
    if (c == "gmw") return cmd_gmw(cfg);
    if (c == "denoise1d") return cmd_denoise1d(cfg);
    if (c == "cs-sweep") return cmd_cs_sweep(cfg);
    if (c == "n0") return cmd_n0(cfg);
    throw InvalidParameter("unknown command '" + c + "'");
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::string &path, const std::string &text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f << text;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move output into '" + path + "'");
    }
}

enum ExitCode : int { exit_ok = 0, exit_invalid_config = 2, exit_runtime_failure = 3 };

/// Runs a configured command and maps failures to exit codes. Diagnostics go
/// to `err`.
inline int execute(const ExperimentConfig &cfg, std::ostream &out,
                   std::ostream &err) {
    std::string text;
    try {
        text = run_to_string(cfg);
    } catch (const InvalidParameter &e) {
        err << "pdrisk: invalid configuration: " << e.what() << '\n';
        return exit_invalid_config;
    } catch (const DegenerateInput &e) {
        err << "pdrisk: invalid configuration: " << e.what() << '\n';
        return exit_invalid_config;
    } catch (const std::exception &e) {
        err << "pdrisk: " << cfg.command << " failed: " << e.what() << '\n';
        return exit_runtime_failure;
    }
    try {
        if (cfg.out.empty() || cfg.out == "-")
            out << text << std::flush;
        else
            write_atomic(cfg.out, text);
    } catch (const std::exception &e) {
        err << "pdrisk: " << e.what() << '\n';
        return exit_runtime_failure;
    }
    return exit_ok;
}

} // namespace pdrisk::cli
