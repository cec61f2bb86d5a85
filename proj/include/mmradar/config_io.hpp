#ifndef MMRADAR_CONFIG_IO_HPP
#define MMRADAR_CONFIG_IO_HPP

// JSON scenario files, run-config files and run manifests.
//
// Scenario file:
//   {
//     "name": "two_targets",
//     "horizon": 300,
//     "targets": [
//       {"bin": 7, "nu": -0.2, "interval": [1, 300], "snr_db": -20},
//       {"bin": 16, "interval": [1, 200], "snr_db": [[1, -30], [100, -20], [200, -30]]}
//     ]
//   }
// "nu" is optional and, when given, must equal the grid value of "bin".
// "snr_db" is either a constant or a list of [k, dB] breakpoints
// (linear in dB between breakpoints, held outside them).
//
// Run-config file: every key is optional and overrides the preset.
//   {
//     "preset": "desk", "scenario": "scenario1" | "<file.json>" | {inline scenario},
//     "controller": "rl_c", "policy": "recovery", "adaptive": "on",
//     "eps": 0.5, "alpha": 0.5, "trials": 100, "seed": 7, "threads": 0, "out": "runs/s1",
//     "radar": {"n_tx": 100, "n_rx": 100, "grid_size": 20, "max_targets": 5,
//               "p_max": 1, "p_fa": 1e-4, "gamma": 0.8,
//               "covariance": "ar" | "banded", "covariance_bandwidth": 6},
//     "adaptation": {"eps":   {"x_min": 0.1, "x_max": 0.8, "c1": 0.8, "c2": 2,   "eta1": 0.5, "eta2": 1.8},
//                    "alpha": {"x_min": 0.2, "x_max": 0.6, "c1": 0.9, "c2": 2.5, "eta1": 0.5, "eta2": 1.8}},
//     "clutter": {"ar": [a1, ..., a6] | [[re, im], ...], "t_dof": 3, "scale": 1, "innovation": "student_t"}
//   }

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mmradar/environment.hpp"
#include "mmradar/errors.hpp"
#include "mmradar/sim_harness.hpp"

namespace mmradar {

using Json = nlohmann::json;

namespace detail {
template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(f, nullptr, true, true);
    } catch (const Json::exception& e) {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
}
}  // namespace detail

inline Scenario scenario_from_json(const Json& j, const AngularGrid& grid) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    Scenario s;
    s.name = detail::get_or<std::string>(j, "name", "custom");
    s.horizon = detail::get_or<int>(j, "horizon", 0);
    if (!j.contains("targets") || !j.at("targets").is_array()) throw ConfigError("scenario needs a 'targets' array");
    for (const Json& jt : j.at("targets")) {
        TargetSpec t;
        t.bin = detail::get_or<int>(jt, "bin", 0);
        if (!grid.contains(t.bin)) throw ConfigError("scenario '" + s.name + "': target bin outside grid");
        t.nu = detail::get_or<double>(jt, "nu", grid.nu(t.bin));
        const Json iv = jt.value("interval", Json::array({1, s.horizon}));
        if (!iv.is_array() || iv.size() != 2) throw ConfigError("target 'interval' must be [k_start, k_end]");
        t.k_start = iv[0].get<int>();
        t.k_end = iv[1].get<int>();
        if (!jt.contains("snr_db")) throw ConfigError("target needs 'snr_db'");
        const Json& snr = jt.at("snr_db");
        if (snr.is_number()) {
            t.snr_db = SnrSchedule(snr.get<double>());
        } else if (snr.is_array()) {
            std::vector<std::pair<int, double>> pts;
            for (const Json& p : snr) {
                if (!p.is_array() || p.size() != 2) throw ConfigError("SNR breakpoints must be [k, dB] pairs");
                pts.emplace_back(p[0].get<int>(), p[1].get<double>());
            }
            t.snr_db = SnrSchedule(std::move(pts));
        } else {
            throw ConfigError("'snr_db' must be a number or a list of [k, dB] pairs");
        }
        s.targets.push_back(std::move(t));
    }
    s.validate(grid);
    return s;
}

inline Json scenario_to_json(const Scenario& s) {
    Json targets = Json::array();
    for (const TargetSpec& t : s.targets) {
        Json snr = Json::array();
        for (const auto& [k, db] : t.snr_db.breakpoints()) snr.push_back({k, db});
        targets.push_back({{"bin", t.bin}, {"nu", t.nu}, {"interval", {t.k_start, t.k_end}}, {"snr_db", snr}});
    }
    return {{"name", s.name}, {"horizon", s.horizon}, {"targets", targets}};
}

/// Library scenario by name, otherwise a scenario file.
inline Scenario resolve_scenario(const std::string& name_or_path, const AngularGrid& grid) {
    if (auto s = find_scenario(name_or_path)) {
        s->validate(grid);
        return *s;
    }
    if (!std::filesystem::exists(name_or_path))
        throw ConfigError("'" + name_or_path + "' is neither a library scenario nor an existing file");
    return scenario_from_json(detail::read_json_file(name_or_path), grid);
}

namespace detail {
inline void apply_constants(const Json& j, AdaptationConstants& c) {
    c.x_min = get_or<double>(j, "x_min", c.x_min);
    c.x_max = get_or<double>(j, "x_max", c.x_max);
    c.c1 = get_or<double>(j, "c1", c.c1);
    c.c2 = get_or<double>(j, "c2", c.c2);
    c.eta1 = get_or<double>(j, "eta1", c.eta1);
    c.eta2 = get_or<double>(j, "eta2", c.eta2);
}

inline Json constants_to_json(const AdaptationConstants& c) {
    return {{"x_min", c.x_min}, {"x_max", c.x_max}, {"c1", c.c1}, {"c2", c.c2}, {"eta1", c.eta1}, {"eta2", c.eta2}};
}

inline void apply_clutter(const Json& j, ClutterModel& m) {
    if (j.contains("ar")) {
        const Json& ar = j.at("ar");
        if (!ar.is_array() || ar.size() != kArOrder) throw ConfigError("clutter 'ar' needs exactly 6 coefficients");
        for (std::size_t p = 0; p < kArOrder; ++p) {
            if (ar[p].is_number()) m.ar_coeffs[p] = cd(ar[p].get<double>(), 0.0);
            else if (ar[p].is_array() && ar[p].size() == 2) m.ar_coeffs[p] = cd(ar[p][0].get<double>(), ar[p][1].get<double>());
            else throw ConfigError("AR coefficient must be a number or [re, im]");
        }
    }
    m.t_dof = get_or<double>(j, "t_dof", m.t_dof);
    m.scale = get_or<double>(j, "scale", m.scale);
    if (j.contains("innovation")) {
        const auto kind = j.at("innovation").get<std::string>();
        if (kind == "student_t") m.innovation = InnovationKind::student_t;
        else if (kind == "gaussian") m.innovation = InnovationKind::gaussian;
        else throw ConfigError("clutter 'innovation' must be student_t or gaussian");
    }
}
}  // namespace detail

/// Overlays the keys present in j onto cfg. A "preset" key, if present, must be
/// applied by the caller first (see load_config).
inline void apply_config_json(RunConfig& cfg, const Json& j) {
    using detail::get_or;
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    if (j.contains("radar")) {
        const Json& r = j.at("radar");
        RadarParams& rp = cfg.radar;
        rp.n_tx = get_or<std::size_t>(r, "n_tx", rp.n_tx);
        rp.n_rx = get_or<std::size_t>(r, "n_rx", rp.n_rx);
        rp.grid_size = get_or<std::size_t>(r, "grid_size", rp.grid_size);
        rp.max_targets = get_or<int>(r, "max_targets", rp.max_targets);
        rp.p_max = get_or<double>(r, "p_max", rp.p_max);
        rp.p_fa = get_or<double>(r, "p_fa", rp.p_fa);
        rp.gamma = get_or<double>(r, "gamma", rp.gamma);
        if (r.contains("covariance")) rp.covariance = parse_covariance_kind(r.at("covariance").get<std::string>());
        rp.covariance_bandwidth = get_or<std::size_t>(r, "covariance_bandwidth", rp.covariance_bandwidth);
    }
    if (j.contains("controller")) cfg.controller = parse_controller(j.at("controller").get<std::string>());
    if (j.contains("policy")) cfg.policy = parse_policy(j.at("policy").get<std::string>());
    if (j.contains("adaptive")) cfg.adaptive = parse_adaptive(j.at("adaptive").get<std::string>());
    cfg.static_eps = get_or<double>(j, "eps", cfg.static_eps);
    cfg.static_alpha = get_or<double>(j, "alpha", cfg.static_alpha);
    cfg.trials = get_or<int>(j, "trials", cfg.trials);
    cfg.master_seed = get_or<std::uint64_t>(j, "seed", cfg.master_seed);
    cfg.threads = get_or<unsigned>(j, "threads", cfg.threads);
    cfg.output_dir = get_or<std::string>(j, "out", cfg.output_dir);
    if (j.contains("adaptation")) {
        const Json& a = j.at("adaptation");
        if (a.contains("eps")) detail::apply_constants(a.at("eps"), cfg.eps_constants);
        if (a.contains("alpha")) detail::apply_constants(a.at("alpha"), cfg.alpha_constants);
    }
    if (j.contains("clutter")) detail::apply_clutter(j.at("clutter"), cfg.clutter);
    if (j.contains("scenario")) {
        const AngularGrid grid = make_grid(cfg.radar.grid_size);
        const Json& s = j.at("scenario");
        if (s.is_string()) {
            cfg.scenario_source = s.get<std::string>();
            cfg.scenario = resolve_scenario(cfg.scenario_source, grid);
        } else {
            cfg.scenario = scenario_from_json(s, grid);
            cfg.scenario_source = "inline:" + cfg.scenario.name;
        }
    }
}

/// Preset named in the file (default "paper") overlaid with the file's keys.
inline RunConfig load_config(const std::filesystem::path& path) {
    const Json j = detail::read_json_file(path);
    RunConfig cfg = preset_config(detail::get_or<std::string>(j, "preset", "paper"));
    apply_config_json(cfg, j);
    return cfg;
}

/// Fully resolved configuration, suitable for reproducing a run.
inline Json config_to_json(const RunConfig& cfg) {
    Json ar = Json::array();
    for (const cd& a : cfg.clutter.ar_coeffs) ar.push_back({a.real(), a.imag()});
    const RadarParams& r = cfg.radar;
    return {
        {"preset", cfg.preset},
        {"scenario_source", cfg.scenario_source},
        {"scenario", scenario_to_json(cfg.scenario)},
        {"controller", std::string(to_string(cfg.controller))},
        {"policy", std::string(to_string(cfg.policy))},
        {"adaptive", std::string(to_string(cfg.adaptive))},
        {"eps", cfg.static_eps},
        {"alpha", cfg.static_alpha},
        {"trials", cfg.trials},
        {"seed", cfg.master_seed},
        {"radar",
         {{"n_tx", r.n_tx},
          {"n_rx", r.n_rx},
          {"grid_size", r.grid_size},
          {"max_targets", r.max_targets},
          {"p_max", r.p_max},
          {"p_fa", r.p_fa},
          {"gamma", r.gamma},
          {"covariance", std::string(to_string(r.covariance))},
          {"covariance_bandwidth", r.covariance_bandwidth}}},
        {"adaptation",
         {{"eps", detail::constants_to_json(cfg.eps_constants)}, {"alpha", detail::constants_to_json(cfg.alpha_constants)}}},
        {"clutter",
         {{"ar", ar},
          {"t_dof", cfg.clutter.t_dof},
          {"scale", cfg.clutter.scale},
          {"innovation", cfg.clutter.innovation == InnovationKind::gaussian ? "gaussian" : "student_t"}}},
        {"rng", "std::mt19937_64; environment seed = trial_seed(seed, t), agent seed = mix64(env seed ^ 0xA5A5A5A5DEADBEEF)"},
    };
}

}  // namespace mmradar

#endif  // MMRADAR_CONFIG_IO_HPP
