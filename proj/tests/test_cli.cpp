#include <pdrisk/cli.hpp>
#include <pdrisk/csv.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace pdrisk;
using namespace pdrisk::cli;
using Catch::Approx;

namespace {

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string &line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');)
        out.push_back(f);
    return out;
}

std::string header_of(const ExperimentConfig &cfg) { return lines(run_to_string(cfg)).front(); }

} // namespace

TEST_CASE("csv formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
        const std::string s = csv::format(v);
        REQUIRE(std::stod(s) == v);
    }
    CHECK(csv::format(std::int64_t{42}) == "42");
    CHECK(csv::format(std::string("LS")) == "LS");
    csv::Writer w({"a", "b"});
    w.row(1, 2.5);
    CHECK(w.str() == "a,b\n1,2.5\n");
    CHECK_THROWS_AS(w.row(1), std::logic_error);
}

TEST_CASE("command headers are fixed") {
    auto sweep = defaults_for("sweep");
    sweep.k = 1;
    sweep.n = 1;
    CHECK(header_of(sweep) == "program,rho,param_value,mean_nnse,stderr_nnse,k,N,s,eta,seed");

    auto an = defaults_for("analytic");
    an.grid_points = 1;
    CHECK(header_of(an) == "quantity,grid_var,grid_value,s,N,u_or_lambda,value");

    auto best = defaults_for("bestloss");
    best.k = 1;
    best.n_sigma = 1;
    best.n_count = 1;
    CHECK(header_of(best) == "N,mean_best_nnse,std_best_nnse,k,n_sigma,s,eta,seed");

    auto g = defaults_for("gmw");
    g.samples = 2;
    CHECK(header_of(g) ==
          "dim,l1_radius,l2_radius,samples,mean,stderr,bellec_lower,bellec_upper,seed");

    auto n0 = defaults_for("n0");
    CHECK(header_of(n0) == "a1,c1,c2,L,d1,d2,d5,n0_2a,n0_1a,d2_ok");

    auto d = defaults_for("denoise1d");
    d.bigN = 64;
    d.s = 2;
    d.k = 1;
    d.n = 1;
    CHECK(header_of(d) == header_of(sweep));

    auto cs = defaults_for("cs-sweep");
    cs.bigN = 16;
    cs.m = 8;
    cs.s = 1;
    cs.k = 1;
    cs.n = 1;
    CHECK(header_of(cs) == "program,rho,param_value,mean_nnse,stderr_nnse,k,N,s,eta,seed,m");
}

TEST_CASE("sweep row counts") {
    auto cfg = defaults_for("sweep");
    cfg.k = 1;
    cfg.n = 1;
    const auto rows = lines(run_to_string(cfg));
    REQUIRE(rows.size() == 4);
    CHECK(fields(rows[1])[0] == "LS");
    CHECK(fields(rows[2])[0] == "QP");
    CHECK(fields(rows[3])[0] == "BP");
    CHECK(fields(rows[1])[1] == "1");

    auto fig = defaults_for("sweep");
    apply_preset(fig, "fig3a");
    CHECK(fig.s == 20);
    CHECK(fig.bigN == 1000);
    CHECK(fig.eta == 1e-3);
    CHECK(fig.k == 150);
    CHECK(fig.n == 301);
    fig.k = 2;
    CHECK(lines(run_to_string(fig)).size() == 1 + 3 * 301);
}

TEST_CASE("same seed gives identical output at any worker count") {
    auto cfg = defaults_for("sweep");
    cfg.k = 3;
    cfg.n = 5;
    cfg.bigN = 200;
    cfg.s = 4;
    const std::string a = run_to_string(cfg);
    CHECK(run_to_string(cfg) == a);
    cfg.workers = 8;
    CHECK(run_to_string(cfg) == a);
    cfg.seed = 2;
    CHECK(run_to_string(cfg) != a);
}

TEST_CASE("analytic single point") {
    auto cfg = defaults_for("analytic");
    cfg.grid_min = cfg.grid_max = 1e6;
    cfg.grid_points = 1;
    cfg.u_values = {2.0};
    const auto rows = lines(run_to_string(cfg));
    REQUIRE(rows.size() == 2);
    const auto f = fields(rows[1]);
    CHECK(f[0] == "risk");
    CHECK(f[1] == "N");
    CHECK(std::stod(f[2]) == 1e6);
    CHECK(std::stod(f[6]) == Approx(qp_risk(2.0 * lambda_bar(1000000), 1, 1000000)).epsilon(1e-15));

    cfg.grid_var = "lambda";
    cfg.grid_min = cfg.grid_max = 3.0;
    const auto lam = lines(run_to_string(cfg));
    REQUIRE(lam.size() == 2);
    const auto lf = fields(lam[1]);
    CHECK(std::stod(lf[2]) == Approx(3.0).epsilon(1e-15));
    CHECK(std::stod(lf[6]) == qp_risk(std::stod(lf[2]), 1, cfg.bigN));

    auto fig = defaults_for("analytic");
    apply_preset(fig, "fig4a");
    const auto rows4 = lines(run_to_string(fig));
    CHECK(rows4.size() == 1 + static_cast<std::size_t>(fig.grid_points) * 3);
}

TEST_CASE("n0 and gmw commands") {
    auto n0 = defaults_for("n0");
    const auto f = fields(lines(run_to_string(n0))[1]);
    CHECK(std::stod(f[7]) == Approx(1.6e6).epsilon(0.01));

    auto g = defaults_for("gmw");
    g.bigN = 1;
    g.l1_radius = 1.0;
    g.l2_radius = 1.0;
    g.samples = 20000;
    const auto gf = fields(lines(run_to_string(g))[1]);
    CHECK(std::stod(gf[4]) == Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("denoise1d without noise is exact for LS at rho = 1") {
    auto cfg = defaults_for("denoise1d");
    cfg.eta = 0.0;
    cfg.k = 2;
    cfg.n = 1;
    cfg.programs = {ProgramKind::ConstrainedLS};
    const auto rows = lines(run_to_string(cfg));
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(fields(rows[1])[3]) <= 1e-20);
}

TEST_CASE("invalid configurations exit with code 2 and leave no file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pdrisk_test_cli";
    fs::create_directories(dir);
    const fs::path target = dir / "out.csv";
    fs::remove(target);

    auto cfg = defaults_for("sweep");
    cfg.n = 4;
    cfg.out = target.string();
    std::ostringstream out, err;
    CHECK(execute(cfg, out, err) == exit_invalid_config);
    CHECK_FALSE(fs::exists(target));
    CHECK_FALSE(fs::exists(target.string() + ".partial"));
    CHECK(err.str().find("invalid configuration") != std::string::npos);

    auto bad = defaults_for("denoise1d");
    bad.bigN = 1000;
    CHECK(execute(bad, out, err) == exit_invalid_config);
    auto unknown = defaults_for("sweep");
    unknown.command = "plot";
    CHECK(execute(unknown, out, err) == exit_invalid_config);
    auto empty = defaults_for("sweep");
    empty.eta = 0.0;
    CHECK(execute(empty, out, err) == exit_invalid_config);

    CHECK_THROWS_AS(apply_preset(cfg, "fig4a"), InvalidParameter);
    CHECK_THROWS_AS(apply_preset(cfg, "nope"), InvalidParameter);

    auto ok = defaults_for("n0");
    ok.out = target.string();
    CHECK(execute(ok, out, err) == exit_ok);
    CHECK(fs::exists(target));
    std::ifstream in(target);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == run_to_string(ok));
    fs::remove_all(dir);
}

TEST_CASE("every preset validates against its command") {
    for (const auto &[name, preset] : presets()) {
        auto cfg = defaults_for(preset.command);
        apply_preset(cfg, name);
        REQUIRE_NOTHROW(cfg.validate());
    }
}
