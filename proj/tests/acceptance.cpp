// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//
// Usage: acceptance [criterion ...]   (default: all of 1..9)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmradar/mmradar.hpp"

using namespace mmradar;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

// Full-scale campaign with one varied factor at a time.
RunConfig campaign(const std::string& scenario) {
    RunConfig c = paper_preset();
    c.scenario = *find_scenario(scenario);
    c.trials = 200;
    c.master_seed = 1;
    return c;
}

Outcome threshold_law() {
    const double lam = threshold(1e-4);
    return {std::abs(lam - 18.420681) <= 1e-6, fmt("threshold(1e-4) = %.7f", lam)};
}

Outcome cfar_desk() {
    RunConfig c = paper_preset();
    c.scenario = Scenario{"h0", 500, {}};
    c.controller = ControllerKind::orthogonal;
    c.radar.p_fa = 1e-2;
    c.trials = 20;
    c.master_seed = 2024;
    const AggregateMetrics m = run_monte_carlo(c);
    const double pfa = m.pfa_running.back();
    const long decisions = 20L * 500 * 20;
    return {std::abs(pfa - 1e-2) <= 0.25e-2 && decisions >= 200000,
            fmt("N = %zu, %ld bin decisions, empirical P_FA = %.5f (nominal 0.01)", c.radar.n_tx * c.radar.n_rx,
                decisions, pfa)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> d;
    auto rvec = [&](std::size_t n) {
        CVector v(n);
        for (auto& x : v) x = {d(rng), d(rng)};
        return v;
    };

    double worst_q = 0.0;
    for (std::size_t n = 1; n <= 64; ++n)
        for (std::size_t b = 0; b <= std::min<std::size_t>(6, n - 1); ++b) {
            const CVector h = rvec(n);
            const CovarianceEstimate cov = estimate_covariance(rvec(n), b);
            cd dense{};
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) dense += std::conj(h[i]) * cov.entry(i, j) * h[j];
            worst_q = std::max(worst_q, std::abs(quadratic_form(h, cov) - dense.real()) / std::abs(dense.real()));
        }

    double worst_h = 0.0;
    for (std::size_t nt = 1; nt <= 8; ++nt)
        for (std::size_t nr = 1; nr <= 8; ++nr) {
            std::vector<cd> e = rvec(nt * nt);
            double p = 0.0;
            for (const cd& v : e) p += std::norm(v);
            const WeightMatrix w(nt, std::move(e), p);
            for (double nu : {-0.5, -0.31, 0.0, 0.12, 0.44}) {
                CVector at(nt), ar(nr), g(nt);
                for (std::size_t m = 0; m < nt; ++m) at[m] = std::polar(1.0, 2.0 * std::numbers::pi * nu * double(m));
                for (std::size_t m = 0; m < nr; ++m) ar[m] = std::polar(1.0, 2.0 * std::numbers::pi * nu * double(m));
                for (std::size_t i = 0; i < nt; ++i)
                    for (std::size_t j = 0; j < nt; ++j) g[i] += w(j, i) * at[j];
                const CVector h = virtual_response(w, nu, ArrayGeometry(nt, nr));
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < nt; ++i)
                    for (std::size_t r = 0; r < nr; ++r) {
                        const cd ref = g[i] * ar[r];
                        num += std::norm(h[i * nr + r] - ref);
                        den += std::norm(ref);
                    }
                worst_h = std::max(worst_h, std::sqrt(num / den));
            }
        }
    return {worst_q <= 1e-12 && worst_h <= 1e-12,
            fmt("max rel err: quadratic form %.2e (N <= 64, b <= 6), virtual response %.2e (N_T, N_R <= 8)", worst_q,
                worst_h)};
}

Outcome algorithm_arithmetic() {
    std::vector<std::string> bad;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) bad.emplace_back(what);
    };
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

    // State index.
    expect(build_report(std::vector<double>{1, 2, 3}, 5.0, 5).state_index == 0, "i_k all below");
    expect(build_report(std::vector<double>(7, 9.0), 5.0, 5).state_index == 5, "i_k capped at K");
    const DetectionReport tie = build_report(std::vector<double>{3, 9, 9, 1}, 5.0, 5);
    expect(tie.state_index == 2 && tie.detections == std::vector<std::uint8_t>{0, 1, 1, 0}, "i_k hand case");
    expect(tie.sorted_bins[0] == 2 && tie.sorted_bins[1] == 3, "tie order");

    // Omega sets.
    const DetectionReport r4 = build_report(std::vector<double>{5, 1, 9, 3}, 4.0, 5);
    expect(omega_set(r4, 0).empty(), "omega action 0");
    expect(omega_set(r4, 2) == std::vector<BinNumber>{3, 1}, "omega action 2");
    expect(omega_set(build_report(std::vector<double>(20, 1.0), 4.0, 5), 5).size() == 5, "omega action K");

    // Reward.
    DetectionReport rr;
    rr.pd_estimates = {0.9, 0.8, 0.3, 0.2, 0.1};
    rr.sorted_bins = {1, 2, 3, 4, 5};
    rr.state_index = 2;
    expect(near(reward(rr, 5), 1.1), "reward 1.7 - 0.6");
    rr.state_index = 0;
    expect(near(reward(rr, 5), -2.3), "reward all penalty");
    rr.state_index = 5;
    expect(near(reward(rr, 5), 2.3), "reward no penalty");

    // SARSA.
    expect(sarsa_update(QMatrix::zeros(5), 0, 0, 1.0, 1, 1, 0.5, 0.8)(0, 0) == 0.5, "sarsa from zero");
    QMatrix c = QMatrix::zeros(3);
    c(1, 2) = c(2, 3) = 0.4;
    expect(sarsa_update(c, 1, 2, 0.0, 2, 3, 0.3, 1.0)(1, 2) == 0.4, "sarsa fixed point");
    expect(near(sarsa_update(QMatrix(5), 1, 1, 1.0, 2, 2, 0.2, 0.8)(1, 1), 1.16), "sarsa 1.16");

    // Adaptation, three branches, default constants.
    const AdaptationConstants e = default_eps_constants(), a = default_alpha_constants();
    expect(near(adapt_value(0.8, 0.2, e), 0.64), "eps decrease");
    expect(near(adapt_value(0.1, 1.0, e), 0.2), "eps increase");
    expect(adapt_value(0.3, 2.0, e) == 0.8, "eps reset");
    expect(near(adapt_value(0.6, 0.2, a), 0.54), "alpha decrease");
    expect(near(adapt_value(0.2, 1.0, a), 0.5), "alpha increase");
    expect(adapt_value(0.3, 2.0, a) == 0.6, "alpha reset");
    expect(near(adapt_value(0.11, 0.1, e), 0.1), "eps floor");

    // Skip rule: two consecutive exploratory actions freeze both values.
    HyperParamState h = HyperParamState::make(true, true, 0.5, 0.5);
    h = adapt_hyperparam(h, 0.2, 1, false, false);
    const double eps1 = h.eps, alpha1 = h.alpha;
    h = adapt_hyperparam(h, 2.4, 2, true, true);
    expect(h.eps == eps1 && h.alpha == alpha1 && h.last_reward == 2.4, "skip rule");
    h = adapt_hyperparam(h, 0.2, 3, true, false);
    expect(h.eps == 0.8 && h.alpha == 0.6, "update after one exploratory step");

    std::string detail = bad.empty() ? "all hand cases match" : "mismatch:";
    for (const auto& b : bad) detail += " [" + b + "]";
    return {bad.empty(), detail};
}

Outcome policy_ordering() {
    RunConfig c = campaign("scenario1");
    c.adaptive = AdaptiveMode::off;
    c.static_eps = 0.5;
    c.static_alpha = 0.5;
    double pd[3];
    const PolicyKind kinds[3] = {PolicyKind::eps_greedy, PolicyKind::quasi, PolicyKind::recovery};
    for (int i = 0; i < 3; ++i) {
        c.policy = kinds[i];
        pd[i] = run_monte_carlo(c).mean_pd(1, 250, 300);
    }
    const bool ok = pd[2] >= pd[1] && pd[1] >= pd[0] && pd[2] - pd[0] >= 0.03;
    return {ok, fmt("target 2 mean P_D over k in [250, 300]: plain %.4f, quasi %.4f, recovery %.4f", pd[0], pd[1], pd[2])};
}

Outcome adaptive_vs_static() {
    RunConfig c = campaign("scenario2");
    c.static_eps = 0.5;
    c.adaptive = AdaptiveMode::alpha_only;
    const double adaptive = run_monte_carlo(c).pd[0].back();
    c.adaptive = AdaptiveMode::off;
    c.static_alpha = c.alpha_constants.x_max;
    const double fixed = run_monte_carlo(c).pd[0].back();
    return {adaptive >= fixed - 0.01, fmt("P_D at k = 100: adaptive alpha %.4f, static alpha = 0.6 %.4f", adaptive, fixed)};
}

Outcome trace_shape() {
    RunConfig c = campaign("scenario4");
    c.adaptive = AdaptiveMode::on;
    const AggregateMetrics m = run_monte_carlo(c);
    auto at = [](const std::vector<double>& v, int k) { return v[static_cast<std::size_t>(k - 1)]; };
    auto window_max = [&](const std::vector<double>& v, int a, int b) {
        double x = at(v, a);
        for (int k = a + 1; k <= b; ++k) x = std::max(x, at(v, k));
        return x;
    };

    bool ok = true;
    std::string detail;
    for (int change : {101, 201, 301}) {
        const double e0 = at(m.eps_mean, change - 1), e1 = window_max(m.eps_mean, change, change + 5);
        const double a0 = at(m.alpha_mean, change - 1), a1 = window_max(m.alpha_mean, change, change + 5);
        ok = ok && e1 > e0 && a1 > a0;
        detail += fmt("k=%d eps %.3f->%.3f alpha %.3f->%.3f; ", change, e0, e1, a0, a1);
    }
    for (auto [lo, hi] : {std::pair{1, 100}, std::pair{101, 200}, std::pair{201, 300}, std::pair{301, 400}}) {
        const double pe = window_max(m.eps_mean, lo, hi), pa = window_max(m.alpha_mean, lo, hi);
        ok = ok && at(m.eps_mean, hi) < pe && at(m.alpha_mean, hi) < pa;
        detail += fmt("[%d,%d] peak/end eps %.3f/%.3f alpha %.3f/%.3f; ", lo, hi, pe, at(m.eps_mean, hi), pa,
                      at(m.alpha_mean, hi));
    }
    // Per-trial bounds, not only the means.
    RunConfig one = c;
    one.trials = 20;
    bool bounded = true;
    for (const auto& run : run_trials(one))
        for (const StepRecord& r : run)
            bounded = bounded && r.eps >= 0.1 - 1e-12 && r.eps <= 0.8 && r.alpha >= 0.2 - 1e-12 && r.alpha <= 0.6;
    for (int k = 1; k <= m.horizon; ++k)
        bounded = bounded && at(m.eps_mean, k) >= 0.1 - 1e-12 && at(m.eps_mean, k) <= 0.8 + 1e-12 &&
                  at(m.alpha_mean, k) >= 0.2 - 1e-12 && at(m.alpha_mean, k) <= 0.6 + 1e-12;
    detail += bounded ? "bounds hold" : "bounds violated";
    return {ok && bounded, detail};
}

Outcome baseline_dominance() {
    RunConfig c = campaign("scenario3");
    auto score = [&](ControllerKind k) {
        c.controller = k;
        const AggregateMetrics m = run_monte_carlo(c);
        return 0.5 * (m.mean_pd(0, 80, 120) + m.mean_pd(1, 80, 120));
    };
    const double rl = score(ControllerKind::rl_c), nrl = score(ControllerKind::nrl_c);
    const double ort = score(ControllerKind::orthogonal), clv = score(ControllerKind::clairvoyant);
    const bool ok = rl > nrl && nrl > ort && clv > rl && clv > nrl && clv > ort;
    return {ok, fmt("mean P_D over both targets, k in [80, 120]: clairvoyant %.4f, RL-C %.4f, NRL-C %.4f, orthogonal %.4f",
                    clv, rl, nrl, ort)};
}

Outcome determinism() {
    RunConfig c = desk_preset();
    c.scenario = *find_scenario("scenario4");
    c.trials = 8;
    c.master_seed = 77;
    const std::string a = metrics_csv(run_monte_carlo(c, 1));
    const std::string b = metrics_csv(run_monte_carlo(c, 1));
    const std::string p = metrics_csv(run_monte_carlo(c, 4));

    const auto dir = std::filesystem::temp_directory_path() / "mmradar_acceptance";
    std::filesystem::create_directories(dir);
    write_text_file(dir / "a.csv", a);
    write_text_file(dir / "p.csv", p);
    auto slurp = [](const std::filesystem::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const bool files_equal = slurp(dir / "a.csv") == slurp(dir / "p.csv");
    std::filesystem::remove_all(dir);
    return {a == b && a == p && files_equal,
            fmt("%zu-byte metrics CSV; repeat %s, 4-thread %s", a.size(), a == b ? "identical" : "differs",
                a == p && files_equal ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"threshold law", threshold_law},
        {"CFAR at desk scale", cfar_desk},
        {"oracle equivalence", oracle_equivalence},
        {"algorithm arithmetic", algorithm_arithmetic},
        {"policy ordering (scenario 1)", policy_ordering},
        {"adaptive vs static alpha (scenario 2)", adaptive_vs_static},
        {"hyper-parameter trace shape (scenario 4)", trace_shape},
        {"baseline dominance (scenario 3)", baseline_dominance},
        {"determinism", determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                    o.detail.c_str(), s);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
