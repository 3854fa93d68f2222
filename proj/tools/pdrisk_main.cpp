// pdrisk: command-line front end for the risk experiments.
//
//   pdrisk <command> [--preset NAME] [--seed U64] [--out PATH] [--workers N] ...
//
// Values come from the command defaults, then the preset, then explicit flags.

#include <pdrisk/cli.hpp>

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using pdrisk::cli::ExperimentConfig;

/// Collects flag bindings that are applied on top of a preset.
class Overlay {
  public:
    template <class T>
    void add(CLI::App *app, const std::string &flag, T ExperimentConfig::*member,
             const std::string &help) {
        auto store = std::make_shared<T>();
        CLI::Option *opt = app->add_option(flag, *store, help);
        appliers_.push_back([opt, store, member](ExperimentConfig &cfg) {
            if (opt->count() > 0)
                cfg.*member = *store;
        });
    }

    void add_programs(CLI::App *app) {
        auto store = std::make_shared<std::vector<std::string>>();
        CLI::Option *opt =
            app->add_option("--programs", *store, "subset of LS,QP,BP")->delimiter(',');
        appliers_.push_back([opt, store](ExperimentConfig &cfg) {
            if (opt->count() == 0)
                return;
            cfg.programs.clear();
            for (const auto &p : *store)
                cfg.programs.push_back(pdrisk::program_from_string(p));
        });
    }

    void add_flag(CLI::App *app, const std::string &flag,
                  bool ExperimentConfig::*member, const std::string &help) {
        CLI::Option *opt = app->add_flag(flag, help);
        appliers_.push_back([opt, member](ExperimentConfig &cfg) {
            if (opt->count() > 0)
                cfg.*member = true;
        });
    }

    void apply(ExperimentConfig &cfg) const {
        for (const auto &f : appliers_)
            f(cfg);
    }

  private:
    std::vector<std::function<void(ExperimentConfig &)>> appliers_;
};

struct Command {
    CLI::App *app = nullptr;
    Overlay overlay;
};

void add_common(Command &c) {
    auto *a = c.app;
    auto &o = c.overlay;
    o.add(a, "--seed", &ExperimentConfig::seed, "master seed");
    o.add(a, "--out", &ExperimentConfig::out, "output CSV path (default stdout)");
    o.add(a, "--workers", &ExperimentConfig::workers, "worker threads");
}

void add_sweep_flags(Command &c) {
    auto *a = c.app;
    auto &o = c.overlay;
    o.add(a, "-s", &ExperimentConfig::s, "sparsity");
    o.add(a, "-N", &ExperimentConfig::bigN, "dimension");
    o.add(a, "--eta", &ExperimentConfig::eta, "noise level");
    o.add(a, "-k", &ExperimentConfig::k, "realizations per grid point");
    o.add(a, "-n", &ExperimentConfig::n, "grid points (odd)");
    o.add(a, "--span", &ExperimentConfig::span, "grid covers [1/span, span]");
    o.add(a, "--entry-scale", &ExperimentConfig::entry_scale,
          "value of the nonzero entries (0: N)");
    o.add_programs(a);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Risk and parameter sensitivity of l1 proximal denoising"};
    app.require_subcommand(1);
    std::string preset;

    std::vector<std::unique_ptr<Command>> commands;
    auto make = [&](const std::string &name, const std::string &help) -> Command & {
        commands.push_back(std::make_unique<Command>());
        Command &c = *commands.back();
        c.app = app.add_subcommand(name, help);
        c.app->add_option("--preset", preset, "named parameter set");
        add_common(c);
        return c;
    };

    {
        auto &c = make("sweep", "average loss vs normalized parameter");
        add_sweep_flags(c);
        c.overlay.add_flag(c.app, "--shared-noise", &ExperimentConfig::shared_noise,
                           "reuse the same k noise draws at every grid point");
    }
    {
        auto &c = make("analytic", "closed-form QP risk tables");
        auto &o = c.overlay;
        o.add(c.app, "--quantity", &ExperimentConfig::quantity,
              "risk | derivative | lambda_star");
        o.add(c.app, "--grid-var", &ExperimentConfig::grid_var, "N | lambda");
        o.add(c.app, "--grid-min", &ExperimentConfig::grid_min, "grid start");
        o.add(c.app, "--grid-max", &ExperimentConfig::grid_max, "grid end");
        o.add(c.app, "--grid-points", &ExperimentConfig::grid_points, "grid size");
        o.add(c.app, "--u", &ExperimentConfig::u_values, "multiples of lambda_bar");
        o.add(c.app, "-s", &ExperimentConfig::s, "sparsity");
        o.add(c.app, "-N", &ExperimentConfig::bigN, "dimension for the lambda grid");
    }
    {
        auto &c = make("bestloss", "BP best loss over sigma as a function of N");
        auto &o = c.overlay;
        o.add(c.app, "-s", &ExperimentConfig::s, "sparsity");
        o.add(c.app, "--eta", &ExperimentConfig::eta, "noise level");
        o.add(c.app, "-k", &ExperimentConfig::k, "realizations per N");
        o.add(c.app, "--n-sigma", &ExperimentConfig::n_sigma, "sigma grid size");
        o.add(c.app, "--n-min", &ExperimentConfig::n_min, "smallest N");
        o.add(c.app, "--n-max", &ExperimentConfig::n_max, "largest N");
        o.add(c.app, "--n-count", &ExperimentConfig::n_count, "number of N values");
    }
    {
        auto &c = make("gmw", "Gaussian mean width of a capped l1 ball");
        auto &o = c.overlay;
        o.add(c.app, "-N", &ExperimentConfig::bigN, "dimension");
        o.add(c.app, "--l1-radius", &ExperimentConfig::l1_radius, "l1 radius");
        o.add(c.app, "--l2-radius", &ExperimentConfig::l2_radius, "l2 radius");
        o.add(c.app, "--samples", &ExperimentConfig::samples, "Monte-Carlo samples");
    }
    {
        auto &c = make("denoise1d", "Haar-domain denoising sweep");
        add_sweep_flags(c);
    }
    {
        auto &c = make("cs-sweep", "compressed-sensing sweep with a Gaussian matrix");
        add_sweep_flags(c);
        auto &o = c.overlay;
        o.add(c.app, "-m", &ExperimentConfig::m, "measurements");
        o.add(c.app, "--max-iter", &ExperimentConfig::max_iter, "solver iterations");
        o.add(c.app, "--tol", &ExperimentConfig::tol, "relative objective decrease");
    }
    {
        auto &c = make("n0", "minimal dimension from theorem constants");
        auto &o = c.overlay;
        o.add(c.app, "--a1", &ExperimentConfig::a1, "a1");
        o.add(c.app, "--c1", &ExperimentConfig::c1, "C1");
        o.add(c.app, "--c2", &ExperimentConfig::c2, "C2");
        o.add(c.app, "-L", &ExperimentConfig::bigL, "L");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pdrisk::cli::exit_invalid_config;
    }

    for (const auto &c : commands) {
        if (!c->app->parsed())
            continue;
        ExperimentConfig cfg;
        try {
            cfg = pdrisk::cli::defaults_for(c->app->get_name());
            cfg.workers = pdrisk::default_workers();
            if (!preset.empty())
                pdrisk::cli::apply_preset(cfg, preset);
            c->overlay.apply(cfg);
        } catch (const std::exception &e) {
            std::cerr << "pdrisk: invalid configuration: " << e.what() << '\n';
            return pdrisk::cli::exit_invalid_config;
        }
        return pdrisk::cli::execute(cfg, std::cout, std::cerr);
    }
    return pdrisk::cli::exit_invalid_config;
}
