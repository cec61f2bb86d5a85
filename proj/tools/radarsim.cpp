// radarsim: command-line front end of the mmradar library.
//
//   radarsim simulate [--config FILE] [--preset paper|desk] [--scenario NAME|FILE] ...
//   radarsim scenarios list
//   radarsim selftest

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmradar/mmradar.hpp"

namespace fs = std::filesystem;
using namespace mmradar;

namespace {

struct SimulateArgs {
    std::string config;
    std::optional<std::string> preset, scenario, controller, policy, adaptive, covariance, out;
    std::optional<double> eps, alpha, p_fa;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> n_tx, n_rx;
    bool records = false;
    bool quiet = false;
};

RunConfig build_config(const SimulateArgs& a) {
    Json file = Json::object();
    if (!a.config.empty()) file = detail::read_json_file(a.config);
    std::string preset = a.preset.value_or(detail::get_or<std::string>(file, "preset", "paper"));
    RunConfig cfg = preset_config(preset);
    apply_config_json(cfg, file);

    // Command-line flags win over the file.
    Json over = Json::object();
    if (a.scenario) over["scenario"] = *a.scenario;
    if (a.controller) over["controller"] = *a.controller;
    if (a.policy) over["policy"] = *a.policy;
    if (a.adaptive) over["adaptive"] = *a.adaptive;
    if (a.eps) over["eps"] = *a.eps;
    if (a.alpha) over["alpha"] = *a.alpha;
    if (a.trials) over["trials"] = *a.trials;
    if (a.seed) over["seed"] = *a.seed;
    if (a.threads) over["threads"] = *a.threads;
    if (a.out) over["out"] = *a.out;
    if (a.covariance) over["radar"]["covariance"] = *a.covariance;
    if (a.p_fa) over["radar"]["p_fa"] = *a.p_fa;
    if (a.n_tx) over["radar"]["n_tx"] = *a.n_tx;
    if (a.n_rx) over["radar"]["n_rx"] = *a.n_rx;
    apply_config_json(cfg, over);

    if (cfg.scenario.horizon == 0) throw ConfigError("no scenario given (use --scenario or a config 'scenario' key)");
    cfg.validate();
    return cfg;
}

int simulate(const SimulateArgs& a) {
    const RunConfig cfg = build_config(a);
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);

    const auto t0 = std::chrono::steady_clock::now();
    const auto runs = run_trials(cfg);
    const AggregateMetrics m = aggregate(runs, cfg.scenario.targets.size());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit_csv(m, out / "metrics.csv");
    if (a.records) emit_csv(runs.front(), out / "records_trial1.csv");

    Json summary = Json::array();
    for (std::size_t t = 0; t < m.target_count; ++t) {
        const TargetSpec& ts = cfg.scenario.targets[t];
        summary.push_back({{"target", t + 1},
                           {"bin", ts.bin},
                           {"mean_pd_active", m.mean_pd(t, ts.k_start, ts.k_end)}});
    }
    Json manifest = {
        {"tool", "radarsim"},
        {"config", config_to_json(cfg)},
        {"outputs", a.records ? Json::array({"metrics.csv", "records_trial1.csv"}) : Json::array({"metrics.csv"})},
        {"targets", summary},
        {"final_pfa", m.pfa_running.empty() ? 0.0 : m.pfa_running.back()},
        {"wall_seconds", seconds},
    };
    write_text_file(out / "manifest.json", manifest.dump(2) + "\n");

    if (!a.quiet) {
        std::printf("%s  %s/%s  trials=%d  %.1fs\n", cfg.scenario.name.c_str(), std::string(to_string(cfg.controller)).c_str(),
                    std::string(to_string(cfg.policy)).c_str(), cfg.trials, seconds);
        for (const Json& s : summary)
            std::printf("  target %d (bin %d): mean P_D %.4f\n", s["target"].get<int>(), s["bin"].get<int>(),
                        s["mean_pd_active"].get<double>());
        std::printf("  running P_FA %.3g\n  wrote %s\n", m.pfa_running.empty() ? 0.0 : m.pfa_running.back(),
                    (out / "metrics.csv").string().c_str());
    }
    return 0;
}

int list_scenarios() {
    for (const Scenario& s : scenario_library()) {
        std::printf("%-10s horizon %3d\n", s.name.c_str(), s.horizon);
        for (const TargetSpec& t : s.targets) {
            const auto& bp = t.snr_db.breakpoints();
            std::string snr = bp.size() == 1 ? std::to_string(static_cast<int>(bp[0].second)) + " dB" : "schedule";
            if (bp.size() > 1) {
                snr.clear();
                for (const auto& [k, db] : bp) snr += "(" + std::to_string(k) + ", " + std::to_string(static_cast<int>(db)) + ") ";
                snr += "dB";
            }
            std::printf("  bin %2d  nu %+.2f  k %3d..%-3d  %s\n", t.bin, t.nu, t.k_start, t.k_end, snr.c_str());
        }
    }
    return 0;
}

// Quick oracle checks of the numeric kernels.
int selftest() {
    int failed = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
        failed += ok ? 0 : 1;
    };

    check("threshold(1e-4)", std::abs(threshold(1e-4) - 18.420681) < 1e-6);
    const double lam = threshold(1e-4);
    check("P_D at noise level equals P_FA", std::abs(estimate_pd(2.0, lam) - 1e-4) < 1e-12);
    check("Marcum Q1(a, a), a^2 = 18.42", std::abs(estimate_pd(lam + 2.0, lam) - 0.546802) < 1e-6);

    const AngularGrid grid = make_grid(20);
    check("grid bins 7/16/17", grid.nu(7) == -0.2 && grid.nu(16) == 0.25 && grid.nu(17) == 0.3);

    const ArrayGeometry geom(6, 5);
    const WeightMatrix w = focused_weights({{7, 16}, 1.0}, grid, 6);
    Rng rng(7);
    const CVector y = gen_clutter(geom.virtual_size(), default_clutter_model(), rng);
    bool fast_ok = true;
    for (CovarianceKind kind : {CovarianceKind::banded, CovarianceKind::ar}) {
        const CovarianceEstimate cov = estimate_disturbance_covariance(y, kind, 6);
        for (double nu : {-0.2, 0.05, 0.25}) {
            const CVector h = virtual_response(w, nu, geom);
            cd dense{};
            for (std::size_t i = 0; i < h.size(); ++i)
                for (std::size_t j = 0; j < h.size(); ++j) dense += std::conj(h[i]) * cov.entry(i, j) * h[j];
            const double direct = quadratic_form(h, cov);
            const double fast = wald_statistic(h, y, cov);
            const double kron = KroneckerSignature(transmit_response(w, nu), nu, geom.n_rx).wald_statistic(y, cov);
            fast_ok = fast_ok && std::abs(direct - dense.real()) <= 1e-12 * std::abs(direct) &&
                      std::abs(fast - kron) <= 1e-10 * std::abs(fast);
        }
    }
    check("quadratic form vs dense matrix", fast_ok);

    check("SARSA step 1 + 0.2 (1 + 0.8 - 1)",
          std::abs(sarsa_update(QMatrix(5), 1, 1, 1.0, 2, 2, 0.2, 0.8)(1, 1) - 1.16) < 1e-15);
    check("adaptation branches", std::abs(adapt_value(0.8, 0.2, default_eps_constants()) - 0.64) < 1e-15 &&
                                     std::abs(adapt_value(0.1, 1.0, default_eps_constants()) - 0.2) < 1e-15 &&
                                     adapt_value(0.3, 2.0, default_eps_constants()) == 0.8);

    RunConfig tiny = desk_preset();
    tiny.radar.n_tx = tiny.radar.n_rx = 12;
    tiny.scenario = *find_scenario("scenario2");
    tiny.trials = 2;
    tiny.threads = 1;
    check("seeded trial is reproducible", run_trial(tiny, 3) == run_trial(tiny, 3));

    std::printf("%d check(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cognitive massive-MIMO radar simulator"};
    app.require_subcommand(1);

    SimulateArgs sa;
    CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo campaign and write metrics.csv + manifest.json");
    sim->add_option("--config", sa.config, "JSON run-config file")->check(CLI::ExistingFile);
    sim->add_option("--preset", sa.preset, "paper | desk");
    sim->add_option("--scenario", sa.scenario, "library scenario name or scenario JSON file");
    sim->add_option("--controller", sa.controller, "rl_c | orthogonal | nrl_c | clairvoyant");
    sim->add_option("--policy", sa.policy, "eps | quasi | recovery");
    sim->add_option("--adaptive", sa.adaptive, "on | off | eps-only | alpha-only");
    sim->add_option("--eps", sa.eps, "static exploration rate");
    sim->add_option("--alpha", sa.alpha, "static learning rate");
    sim->add_option("--p-fa", sa.p_fa, "false-alarm probability");
    sim->add_option("--n-tx", sa.n_tx, "transmit elements");
    sim->add_option("--n-rx", sa.n_rx, "receive elements");
    sim->add_option("--covariance", sa.covariance, "ar | banded");
    sim->add_option("--trials", sa.trials, "Monte Carlo trials");
    sim->add_option("--seed", sa.seed, "master seed");
    sim->add_option("--threads", sa.threads, "worker threads (0: all cores)");
    sim->add_option("--out", sa.out, "output directory");
    sim->add_flag("--records", sa.records, "also write per-step records of trial 1");
    sim->add_flag("-q,--quiet", sa.quiet, "no summary on stdout");

    CLI::App* sc = app.add_subcommand("scenarios", "scenario library");
    sc->require_subcommand(1);
    CLI::App* sc_list = sc->add_subcommand("list", "print the built-in scenarios");

    CLI::App* st = app.add_subcommand("selftest", "quick numeric self-checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return simulate(sa);
        if (*sc_list) return list_scenarios();
        if (*st) return selftest();
    } catch (const ConfigError& e) {
        std::cerr << "radarsim: configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "radarsim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
