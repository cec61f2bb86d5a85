#ifndef MMRADAR_SIM_HARNESS_HPP
#define MMRADAR_SIM_HARNESS_HPP

// Closed-loop trials and seeded Monte Carlo campaigns.
//
// One step k of a trial: transmit W_k, synthesize the snapshot, run the
// detector on every grid bin, score the report, let the controller choose the
// next focus set, and build W_{k+1}. Trials never share state; each owns two
// engines derived from (master_seed, trial index): one for the environment
// (target phases, clutter) and one for the agent's exploration draws, so
// campaigns that differ only in the controller see identical disturbance.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "mmradar/array_model.hpp"
#include "mmradar/beamformer.hpp"
#include "mmradar/detector.hpp"
#include "mmradar/environment.hpp"
#include "mmradar/errors.hpp"
#include "mmradar/rl_engine.hpp"
#include "mmradar/rng.hpp"

namespace mmradar {

enum class ControllerKind { rl_c, orthogonal, nrl_c, clairvoyant };
enum class AdaptiveMode { on, off, eps_only, alpha_only };

inline ControllerKind parse_controller(std::string_view s) {
    if (s == "rl_c") return ControllerKind::rl_c;
    if (s == "orthogonal") return ControllerKind::orthogonal;
    if (s == "nrl_c") return ControllerKind::nrl_c;
    if (s == "clairvoyant") return ControllerKind::clairvoyant;
    throw ConfigError("unknown controller '" + std::string(s) + "' (expected rl_c|orthogonal|nrl_c|clairvoyant)");
}

inline std::string_view to_string(ControllerKind c) {
    switch (c) {
        case ControllerKind::rl_c: return "rl_c";
        case ControllerKind::orthogonal: return "orthogonal";
        case ControllerKind::nrl_c: return "nrl_c";
        case ControllerKind::clairvoyant: return "clairvoyant";
    }
    return "?";
}

inline AdaptiveMode parse_adaptive(std::string_view s) {
    if (s == "on") return AdaptiveMode::on;
    if (s == "off") return AdaptiveMode::off;
    if (s == "eps-only") return AdaptiveMode::eps_only;
    if (s == "alpha-only") return AdaptiveMode::alpha_only;
    throw ConfigError("unknown adaptive mode '" + std::string(s) + "' (expected on|off|eps-only|alpha-only)");
}

inline std::string_view to_string(AdaptiveMode m) {
    switch (m) {
        case AdaptiveMode::on: return "on";
        case AdaptiveMode::off: return "off";
        case AdaptiveMode::eps_only: return "eps-only";
        case AdaptiveMode::alpha_only: return "alpha-only";
    }
    return "?";
}

struct RadarParams {
    std::size_t n_tx = 100;
    std::size_t n_rx = 100;
    std::size_t grid_size = 20;  // L
    int max_targets = 5;         // K
    double p_max = 1.0;
    double p_fa = 1e-4;
    double gamma = 0.8;
    CovarianceKind covariance = CovarianceKind::ar;
    std::size_t covariance_bandwidth = kDefaultCovarianceBandwidth;  // b (banded) or AR order
};

struct RunConfig {
    std::string preset = "paper";
    Scenario scenario;
    std::string scenario_source;  // library name or file path, for the manifest
    ControllerKind controller = ControllerKind::rl_c;
    PolicyKind policy = PolicyKind::recovery;
    AdaptiveMode adaptive = AdaptiveMode::on;
    double static_eps = 0.5;
    double static_alpha = 0.5;
    AdaptationConstants eps_constants = default_eps_constants();
    AdaptationConstants alpha_constants = default_alpha_constants();
    ClutterModel clutter = default_clutter_model();
    RadarParams radar;
    int trials = 200;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string output_dir = "out";

    void validate() const {
        const RadarParams& r = radar;
        if (r.n_tx < 1 || r.n_rx < 1) throw ConfigError("n_tx and n_rx must be positive");
        if (r.max_targets < 0) throw ConfigError("K must be non-negative");
        if (static_cast<std::size_t>(r.max_targets) > r.n_tx) throw ConfigError("K cannot exceed n_tx");
        if (static_cast<std::size_t>(r.max_targets) > r.grid_size) throw ConfigError("K cannot exceed grid size");
        if (!(r.p_max > 0.0)) throw ConfigError("p_max must be positive");
        if (!(r.p_fa > 0.0 && r.p_fa < 1.0)) throw ConfigError("p_fa must lie in (0, 1)");
        if (!(r.gamma >= 0.0 && r.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
        if (r.n_tx * r.n_rx <= r.covariance_bandwidth + 1) throw ConfigError("covariance bandwidth too large for array");
        if (trials < 1) throw ConfigError("trials must be at least 1");
        if (!(static_eps >= 0.0 && static_eps <= 1.0)) throw ConfigError("eps must lie in [0, 1]");
        if (!(static_alpha > 0.0 && static_alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
        eps_constants.validate();
        alpha_constants.validate();
        if (!(alpha_constants.x_min > 0.0 && alpha_constants.x_max < 1.0))
            throw ConfigError("alpha adaptation range must lie inside (0, 1)");
        if (!(eps_constants.x_min >= 0.0 && eps_constants.x_max <= 1.0))
            throw ConfigError("eps adaptation range must lie inside [0, 1]");
        clutter.validate();
        scenario.validate(make_grid(r.grid_size));
    }
};

/// Full-scale radar: 100 x 100 array, L = 20, K = 5, P_FA = 1e-4, 200 trials.
inline RunConfig paper_preset() {
    RunConfig c;
    c.preset = "paper";
    return c;
}

/// Smaller array (N = 2500) and 100 trials for quick campaigns.
inline RunConfig desk_preset() {
    RunConfig c;
    c.preset = "desk";
    c.radar.n_tx = 50;
    c.radar.n_rx = 50;
    c.trials = 100;
    return c;
}

inline RunConfig preset_config(std::string_view name) {
    if (name == "paper") return paper_preset();
    if (name == "desk") return desk_preset();
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected paper|desk)");
}

struct StepRecord {
    int k = 0;
    std::vector<std::uint8_t> detections;       // per bin
    int state_index = 0;
    int action = 0;                             // |Omega_{k+1}| for baselines
    double reward = 0.0;
    double eps = 0.0;                           // values in effect while acting at k
    double alpha = 0.0;
    std::vector<std::uint8_t> target_detected;  // per scenario target, 0 when inactive
    int false_alarms = 0;                       // detections on bins without an active target
    int noise_bins = 0;

    bool operator==(const StepRecord&) const = default;
};

/// Bins whose beampattern is this far below the omnidirectional level (power(W))
/// count as not illuminated.
inline constexpr double kTransmitNullFloor = 1e-12;

/// Per-bin Wald statistics of snapshot y under transmit weighting w.
///
/// Conjugate beams on the grid leave every other grid bin in an exact null. The
/// statistic is scale invariant, so a bin in a shallow sidelobe is still a valid
/// noise-level test; for exact nulls the omnidirectional transmit direction
/// stands in, which keeps such bins at the nominal false-alarm rate and lets
/// them compete in the ranking instead of tying at zero.
inline std::vector<double> bin_statistics(const WeightMatrix& w, std::span<const cd> y, const ArrayGeometry& geom,
                                          const AngularGrid& grid, const CovarianceEstimate& cov) {
    const double floor = kTransmitNullFloor * w.power();
    std::vector<double> stats(grid.size());
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const double nu = grid.frequencies()[l];
        CVector g = transmit_response(w, nu);
        double bp = 0.0;
        for (const cd& v : g) bp += std::norm(v);
        if (bp <= floor) g = steering_vector(geom.n_tx, nu);
        stats[l] = KroneckerSignature(std::move(g), nu, geom.n_rx).wald_statistic(y, cov);
    }
    return stats;
}

namespace detail {
inline Rng environment_rng(std::uint64_t seed) { return Rng(seed); }
inline Rng agent_rng(std::uint64_t seed) { return Rng(mix64(seed ^ 0xA5A5A5A5DEADBEEFULL)); }

/// Cap a focus set at n_tx beams keeping the strongest bins.
inline void cap_focus(FocusRequest& req, const DetectionReport& rep, std::size_t n_tx) {
    if (req.bins.size() <= n_tx) return;
    std::vector<BinNumber> kept;
    for (BinNumber b : rep.sorted_bins) {
        if (std::find(req.bins.begin(), req.bins.end(), b) != req.bins.end()) kept.push_back(b);
        if (kept.size() == n_tx) break;
    }
    req.bins = std::move(kept);
}
}  // namespace detail

/// One closed-loop trial; returns one record per time step.
inline std::vector<StepRecord> run_trial(const RunConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const RadarParams& rp = cfg.radar;
    const ArrayGeometry geom(rp.n_tx, rp.n_rx);
    const AngularGrid grid = make_grid(rp.grid_size);
    const Scenario& scene = cfg.scenario;
    const double lambda = threshold(rp.p_fa);
    const int K = rp.max_targets;
    const double clutter_power = cfg.clutter.stationary_power();

    Rng env = detail::environment_rng(seed);
    Rng agent = detail::agent_rng(seed);

    const bool adapt_eps = cfg.adaptive == AdaptiveMode::on || cfg.adaptive == AdaptiveMode::eps_only;
    const bool adapt_alpha = cfg.adaptive == AdaptiveMode::on || cfg.adaptive == AdaptiveMode::alpha_only;
    HyperParamState hyper = HyperParamState::make(adapt_eps, adapt_alpha, cfg.static_eps, cfg.static_alpha,
                                                  cfg.eps_constants, cfg.alpha_constants);
    QMatrix q(K);
    int s_prev = 0;
    int a_prev = 0;
    bool explored_prev = false;
    WeightMatrix w = orthogonal_weights(rp.n_tx, rp.p_max);

    std::vector<StepRecord> records;
    records.reserve(static_cast<std::size_t>(scene.horizon));
    for (int k = 1; k <= scene.horizon; ++k) {
        const std::vector<TargetReturn> returns = draw_target_returns(scene, k, clutter_power, env);
        const CVector y = compose_snapshot(w, scene, returns, gen_clutter(geom.virtual_size(), cfg.clutter, env), geom, grid);
        const CovarianceEstimate cov = estimate_disturbance_covariance(y, rp.covariance, rp.covariance_bandwidth);
        const DetectionReport rep = build_report(bin_statistics(w, y, geom, grid, cov), lambda, K);

        StepRecord rec;
        rec.k = k;
        rec.detections = rep.detections;
        rec.state_index = rep.state_index;
        rec.reward = reward(rep, K);
        rec.eps = hyper.eps;
        rec.alpha = hyper.alpha;

        FocusRequest next;
        next.p_max = rp.p_max;
        if (cfg.controller == ControllerKind::rl_c) {
            const ActionChoice choice = select_action(cfg.policy, q, rep.state_index, s_prev, hyper.eps, agent);
            q = sarsa_update(std::move(q), s_prev, a_prev, rec.reward, rep.state_index, choice.action, hyper.alpha,
                             rp.gamma);
            hyper = adapt_hyperparam(hyper, rec.reward, k, explored_prev, choice.explored);
            next.bins = omega_set(rep, choice.action);
            rec.action = choice.action;
            s_prev = rep.state_index;
            a_prev = choice.action;
            explored_prev = choice.explored;
        } else {
            const BaselineKind kind = cfg.controller == ControllerKind::orthogonal ? BaselineKind::orthogonal
                                      : cfg.controller == ControllerKind::nrl_c  ? BaselineKind::nrl_c
                                                                                  : BaselineKind::clairvoyant;
            // The clairvoyant controller aims the next pulse at the targets present during it.
            next = baseline_action(kind, rep, scene, std::min(k + 1, scene.horizon), rp.p_max);
            detail::cap_focus(next, rep, rp.n_tx);
            rec.action = static_cast<int>(next.bins.size());
        }

        rec.target_detected.assign(scene.targets.size(), 0);
        std::vector<std::uint8_t> occupied(grid.size(), 0);
        for (const TargetReturn& tr : returns) {
            const BinNumber b = scene.targets[tr.target].bin;
            occupied[static_cast<std::size_t>(b - 1)] = 1;
            rec.target_detected[tr.target] = rep.detected(b) ? 1 : 0;
        }
        for (std::size_t l = 0; l < grid.size(); ++l) {
            if (occupied[l]) continue;
            ++rec.noise_bins;
            rec.false_alarms += rep.detections[l];
        }
        records.push_back(std::move(rec));

        if (k < scene.horizon) w = weights_for(next, grid, rp.n_tx);
    }
    return records;
}

struct AggregateMetrics {
    int trials = 0;
    int horizon = 0;
    std::size_t target_count = 0;
    std::vector<std::vector<double>> pd;  // [target][k-1]
    std::vector<double> eps_mean;
    std::vector<double> alpha_mean;
    std::vector<double> pfa_running;      // cumulative false alarms / noise-bin decisions through k

    double mean_pd(std::size_t target, int k_first, int k_last) const {
        double s = 0.0;
        for (int k = k_first; k <= k_last; ++k) s += pd.at(target).at(static_cast<std::size_t>(k - 1));
        return s / static_cast<double>(k_last - k_first + 1);
    }

    bool operator==(const AggregateMetrics&) const = default;
};

/// Reduces per-trial records in trial order.
inline AggregateMetrics aggregate(const std::vector<std::vector<StepRecord>>& runs, std::size_t target_count) {
    AggregateMetrics m;
    m.trials = static_cast<int>(runs.size());
    m.target_count = target_count;
    if (runs.empty()) return m;
    const std::size_t h = runs.front().size();
    m.horizon = static_cast<int>(h);
    std::vector<std::vector<long>> hits(target_count, std::vector<long>(h, 0));
    std::vector<double> eps(h, 0.0), alpha(h, 0.0);
    std::vector<long> fa(h, 0), decisions(h, 0);
    for (const auto& run : runs) {
        if (run.size() != h) throw std::logic_error("trials with different horizons cannot be aggregated");
        for (std::size_t i = 0; i < h; ++i) {
            const StepRecord& r = run[i];
            for (std::size_t t = 0; t < target_count; ++t) hits[t][i] += r.target_detected[t];
            eps[i] += r.eps;
            alpha[i] += r.alpha;
            fa[i] += r.false_alarms;
            decisions[i] += r.noise_bins;
        }
    }
    const double n = static_cast<double>(runs.size());
    m.pd.assign(target_count, std::vector<double>(h));
    for (std::size_t t = 0; t < target_count; ++t)
        for (std::size_t i = 0; i < h; ++i) m.pd[t][i] = static_cast<double>(hits[t][i]) / n;
    m.eps_mean.resize(h);
    m.alpha_mean.resize(h);
    m.pfa_running.resize(h);
    long fa_cum = 0, dec_cum = 0;
    for (std::size_t i = 0; i < h; ++i) {
        m.eps_mean[i] = eps[i] / n;
        m.alpha_mean[i] = alpha[i] / n;
        fa_cum += fa[i];
        dec_cum += decisions[i];
        m.pfa_running[i] = dec_cum > 0 ? static_cast<double>(fa_cum) / static_cast<double>(dec_cum) : 0.0;
    }
    return m;
}

/// Runs every trial of a campaign; `threads` overrides cfg.threads when non-zero.
inline std::vector<std::vector<StepRecord>> run_trials(const RunConfig& cfg, unsigned threads = 0) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<StepRecord>> runs(n);
    unsigned workers = threads != 0 ? threads : cfg.threads;
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t t = next++; t < n; t = next++) runs[t] = run_trial(cfg, trial_seed(cfg.master_seed, t));
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work, i);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return runs;
}

inline AggregateMetrics run_monte_carlo(const RunConfig& cfg, unsigned threads = 0) {
    return aggregate(run_trials(cfg, threads), cfg.scenario.targets.size());
}

// ---------------------------------------------------------------------------
// CSV output

/// Shortest round-trip decimal representation, independent of the C locale.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline constexpr std::string_view kMetricsHeader = "k,target_id,pd,eps_mean,alpha_mean,pfa_running";
inline constexpr std::string_view kRecordsHeader =
    "k,detections,state_index,action,reward,eps,alpha,target_detected,false_alarms,noise_bins";

inline std::string metrics_csv(const AggregateMetrics& m) {
    std::string out(kMetricsHeader);
    out += '\n';
    for (int k = 1; k <= m.horizon; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        for (std::size_t t = 0; t < m.target_count; ++t) {
            out += std::to_string(k) + ',' + std::to_string(t + 1) + ',' + format_number(m.pd[t][i]) + ',' +
                   format_number(m.eps_mean[i]) + ',' + format_number(m.alpha_mean[i]) + ',' +
                   format_number(m.pfa_running[i]) + '\n';
        }
    }
    return out;
}

inline std::string records_csv(const std::vector<StepRecord>& records) {
    auto bits = [](const std::vector<std::uint8_t>& v) {
        std::string s;
        for (std::uint8_t b : v) s += b ? '1' : '0';
        return s;
    };
    std::string out(kRecordsHeader);
    out += '\n';
    for (const StepRecord& r : records) {
        out += std::to_string(r.k) + ',' + bits(r.detections) + ',' + std::to_string(r.state_index) + ',' +
               std::to_string(r.action) + ',' + format_number(r.reward) + ',' + format_number(r.eps) + ',' +
               format_number(r.alpha) + ',' + bits(r.target_detected) + ',' + std::to_string(r.false_alarms) + ',' +
               std::to_string(r.noise_bins) + '\n';
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::system_error(errno, std::generic_category(), "cannot open '" + path.string() + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) throw std::system_error(errno, std::generic_category(), "failed writing '" + path.string() + "'");
}

inline void emit_csv(const AggregateMetrics& m, const std::filesystem::path& path) { write_text_file(path, metrics_csv(m)); }
inline void emit_csv(const std::vector<StepRecord>& r, const std::filesystem::path& path) {
    write_text_file(path, records_csv(r));
}

}  // namespace mmradar

#endif  // MMRADAR_SIM_HARNESS_HPP
