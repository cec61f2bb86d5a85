#ifndef MMRADAR_ENVIRONMENT_HPP
#define MMRADAR_ENVIRONMENT_HPP

// Disturbance and scene synthesis at the matched-filter output.
//
// Clutter is an AR(6) process along the virtual-channel index,
//   x[m] = sum_{p=1..6} a_p x[m-p] + e[m],
// driven by complex innovations whose real and imaginary parts are i.i.d.
// Student-t (or Gaussian) with a common scale. Targets are described by a
// Scenario: per-target bin, active interval and an SNR schedule given as
// breakpoints interpolated linearly in dB.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmradar/array_model.hpp"
#include "mmradar/errors.hpp"
#include "mmradar/rng.hpp"

namespace mmradar {

inline constexpr std::size_t kArOrder = 6;
inline constexpr std::size_t kClutterBurnIn = 500;

enum class InnovationKind { student_t, gaussian };

/// Returns true when every root of z^p - a_1 z^{p-1} - ... - a_p lies strictly
/// inside the unit circle (step-down / Schur-Cohn recursion).
inline bool ar_is_stable(std::span<const cd> ar_coeffs) {
    // Work with the monic polynomial 1 + c_1 z^-1 + ... + c_p z^-p, c = -a.
    std::vector<cd> c(ar_coeffs.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -ar_coeffs[i];
    while (!c.empty() && c.back() == cd{}) c.pop_back();
    for (std::size_t p = c.size(); p > 0; --p) {
        const cd k = c[p - 1];
        const double k2 = std::norm(k);
        if (k2 >= 1.0) return false;
        std::vector<cd> next(p - 1);
        for (std::size_t i = 0; i + 1 < p; ++i) next[i] = (c[i] - k * std::conj(c[p - 2 - i])) / (1.0 - k2);
        c = std::move(next);
    }
    return true;
}

struct ClutterModel {
    std::array<cd, kArOrder> ar_coeffs{};
    double t_dof = 3.0;
    double scale = 1.0;
    InnovationKind innovation = InnovationKind::student_t;

    void validate() const {
        if (innovation == InnovationKind::student_t && !(t_dof > 2.0))
            throw ConfigError("Student-t innovations need more than 2 degrees of freedom");
        if (!(scale > 0.0)) throw ConfigError("innovation scale must be positive");
        if (!ar_is_stable(ar_coeffs)) throw ConfigError("AR clutter polynomial is not stable");
    }

    /// E|e|^2 of one complex innovation.
    double innovation_power() const {
        const double per_part = innovation == InnovationKind::gaussian ? 1.0 : t_dof / (t_dof - 2.0);
        return 2.0 * scale * scale * per_part;
    }

    /// Stationary E|x|^2 via the causal impulse response of 1 / (1 - sum a_p z^-p).
    double stationary_power() const {
        validate();
        std::array<cd, kArOrder> hist{};  // psi[j-1], psi[j-2], ...
        cd psi = 1.0;
        double gain = 1.0;
        for (int j = 1; j < 100000; ++j) {
            for (std::size_t p = kArOrder - 1; p > 0; --p) hist[p] = hist[p - 1];
            hist[0] = psi;
            psi = cd{};
            for (std::size_t p = 0; p < kArOrder; ++p) psi += ar_coeffs[p] * hist[p];
            const double term = std::norm(psi);
            gain += term;
            if (term < 1e-18 * gain && j > 64) break;
        }
        return innovation_power() * gain;
    }
};

/// Real AR(6) model with poles at the given radius and angles +-pi/8, +-pi/4,
/// +-3pi/8, t(3) innovations.
inline ClutterModel pole_clutter_model(double radius) {
    if (!(radius >= 0.0 && radius < 1.0)) throw ConfigError("pole radius must lie in [0, 1)");
    std::vector<cd> poly{1.0};  // coefficients of prod (1 - p z^-1) in powers of z^-1
    for (double ang : {std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8}) {
        for (double sign : {1.0, -1.0}) {
            const cd pole = std::polar(radius, sign * ang);
            std::vector<cd> next(poly.size() + 1);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] += poly[i];
                next[i + 1] -= pole * poly[i];
            }
            poly = std::move(next);
        }
    }
    ClutterModel m;
    for (std::size_t p = 0; p < kArOrder; ++p) m.ar_coeffs[p] = cd(-poly[p + 1].real(), 0.0);
    m.t_dof = 3.0;
    m.scale = 1.0;
    m.innovation = InnovationKind::student_t;
    return m;
}

inline constexpr double kDefaultPoleRadius = 0.23;

inline ClutterModel default_clutter_model() { return pole_clutter_model(kDefaultPoleRadius); }

/// One complex innovation draw.
class InnovationSampler {
public:
    explicit InnovationSampler(const ClutterModel& m)
        : kind_(m.innovation), scale_(m.scale), t_(m.innovation == InnovationKind::student_t ? m.t_dof : 3.0) {}

    cd operator()(Rng& rng) {
        if (kind_ == InnovationKind::gaussian) {
            const double re = normal_(rng);
            const double im = normal_(rng);
            return {scale_ * re, scale_ * im};
        }
        const double re = t_(rng);
        const double im = t_(rng);
        return {scale_ * re, scale_ * im};
    }

private:
    InnovationKind kind_;
    double scale_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::student_t_distribution<double> t_;
};

/// n samples of the AR clutter process after discarding kClutterBurnIn warm-up samples.
inline CVector gen_clutter(std::size_t n, const ClutterModel& model, Rng& rng) {
    if (n < 1) throw ConfigError("clutter length must be at least 1");
    model.validate();
    InnovationSampler draw(model);
    const std::size_t total = n + kClutterBurnIn;
    CVector x(total);
    const bool white = std::all_of(model.ar_coeffs.begin(), model.ar_coeffs.end(), [](cd a) { return a == cd{}; });
    for (std::size_t m = 0; m < total; ++m) {
        cd v = draw(rng);
        if (!white) {
            const std::size_t depth = std::min(m, kArOrder);
            for (std::size_t p = 1; p <= depth; ++p) v += model.ar_coeffs[p - 1] * x[m - p];
        }
        x[m] = v;
    }
    return CVector(x.begin() + static_cast<std::ptrdiff_t>(kClutterBurnIn), x.end());
}

/// Complex target amplitude with |alpha|^2 = clutter_power * 10^(snr_db/10) and a uniform phase.
inline cd target_amplitude(double snr_db, double clutter_power, Rng& rng) {
    if (!(clutter_power > 0.0)) throw ConfigError("clutter power must be positive");
    const double mag = std::sqrt(clutter_power * std::pow(10.0, snr_db / 10.0));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    return std::polar(mag, phase(rng));
}

/// SNR breakpoints (k, dB); values between breakpoints interpolate linearly in dB
/// and are held constant outside the first/last breakpoint.
class SnrSchedule {
public:
    SnrSchedule() = default;
    explicit SnrSchedule(double constant_db) : points_{{1, constant_db}} {}
    explicit SnrSchedule(std::vector<std::pair<int, double>> points) : points_(std::move(points)) {
        if (points_.empty()) throw ConfigError("SNR schedule needs at least one breakpoint");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (points_[i].first <= points_[i - 1].first)
                throw ConfigError("SNR breakpoints must have strictly increasing time indices");
    }

    double at(int k) const {
        if (k <= points_.front().first) return points_.front().second;
        if (k >= points_.back().first) return points_.back().second;
        auto hi = std::upper_bound(points_.begin(), points_.end(), k,
                                   [](int v, const std::pair<int, double>& p) { return v < p.first; });
        auto lo = std::prev(hi);
        const double f = static_cast<double>(k - lo->first) / static_cast<double>(hi->first - lo->first);
        return lo->second + f * (hi->second - lo->second);
    }

    const std::vector<std::pair<int, double>>& breakpoints() const { return points_; }

private:
    std::vector<std::pair<int, double>> points_;
};

struct TargetSpec {
    BinNumber bin = 1;
    double nu = 0.0;
    SnrSchedule snr_db;
    int k_start = 1;  // inclusive
    int k_end = 1;    // inclusive

    bool active_at(int k) const { return k >= k_start && k <= k_end; }
};

struct Scenario {
    std::string name;
    int horizon = 0;
    std::vector<TargetSpec> targets;

    void check_time(int k) const {
        if (k < 1 || k > horizon)
            throw HorizonError("time index " + std::to_string(k) + " outside horizon [1, " + std::to_string(horizon) +
                               "] of scenario '" + name + "'");
    }

    std::vector<std::size_t> active_targets(int k) const {
        check_time(k);
        std::vector<std::size_t> out;
        for (std::size_t t = 0; t < targets.size(); ++t)
            if (targets[t].active_at(k)) out.push_back(t);
        return out;
    }

    /// Structural checks plus consistency of every target with the receive grid.
    void validate(const AngularGrid& grid) const {
        if (horizon < 1) throw ConfigError("scenario '" + name + "' has non-positive horizon");
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const TargetSpec& s = targets[t];
            const std::string who = "scenario '" + name + "' target " + std::to_string(t + 1);
            if (!grid.contains(s.bin)) throw ConfigError(who + ": bin outside grid");
            if (std::abs(grid.nu(s.bin) - s.nu) > 1e-12)
                throw ConfigError(who + ": nu does not match the grid value of its bin");
            if (s.k_start < 1 || s.k_end > horizon || s.k_start > s.k_end)
                throw ConfigError(who + ": active interval outside horizon");
        }
        for (int k = 1; k <= horizon; ++k)
            if (active_targets(k).size() > grid.size())
                throw ConfigError("scenario '" + name + "' has more active targets than grid bins");
    }
};

/// The four reference scenarios, defined on the L = 20 grid.
inline std::vector<Scenario> scenario_library() {
    auto target = [](BinNumber bin, double nu, SnrSchedule snr, int a, int b) {
        TargetSpec t;
        t.bin = bin;
        t.nu = nu;
        t.snr_db = std::move(snr);
        t.k_start = a;
        t.k_end = b;
        return t;
    };
    std::vector<Scenario> lib;
    lib.push_back({"scenario1", 300,
                   {target(7, -0.20, SnrSchedule(-20.0), 1, 300), target(16, 0.25, SnrSchedule(-20.0), 1, 300)}});
    lib.push_back({"scenario2", 100, {target(17, 0.30, SnrSchedule(-20.0), 1, 100)}});
    const SnrSchedule ramp({{1, -30.0}, {100, -20.0}, {101, -20.0}, {200, -30.0}});
    lib.push_back({"scenario3", 200, {target(7, -0.20, ramp, 1, 200), target(16, 0.25, ramp, 1, 200)}});
    lib.push_back({"scenario4", 400,
                   {target(5, -0.30, SnrSchedule(-18.0), 1, 100), target(13, 0.10, SnrSchedule(-21.0), 1, 300),
                    target(17, 0.30, SnrSchedule(-20.0), 201, 400)}});
    return lib;
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
    for (Scenario& s : scenario_library())
        if (s.name == name) return s;
    return std::nullopt;
}

/// Per-snapshot amplitudes of the targets active at k, in scenario order.
struct TargetReturn {
    std::size_t target = 0;
    cd amplitude;
};

/// Draws the amplitudes of every target active at k (one phase per target per pulse).
inline std::vector<TargetReturn> draw_target_returns(const Scenario& scenario, int k, double clutter_power, Rng& rng) {
    std::vector<TargetReturn> out;
    for (std::size_t t : scenario.active_targets(k))
        out.push_back({t, target_amplitude(scenario.targets[t].snr_db.at(k), clutter_power, rng)});
    return out;
}

/// y = clutter + sum over returns of alpha_t h(W, nu_t).
inline CVector compose_snapshot(const WeightMatrix& w, const Scenario& scenario, std::span<const TargetReturn> returns,
                                CVector clutter, const ArrayGeometry& geom, const AngularGrid& grid) {
    if (clutter.size() != geom.virtual_size()) throw ConfigError("clutter length does not match virtual array size");
    for (const TargetReturn& tr : returns) {
        const CVector h = virtual_response(w, grid.nu(scenario.targets.at(tr.target).bin), geom);
        for (std::size_t n = 0; n < clutter.size(); ++n) clutter[n] += tr.amplitude * h[n];
    }
    return clutter;
}

/// y = sum_t alpha_t h(W, nu_t) + c with c one AR clutter realization of length N.
///
/// Draw order per pulse is fixed: target amplitudes (scenario order) first, then clutter.
inline CVector synthesize_snapshot(const WeightMatrix& w, const Scenario& scenario, int k, const ArrayGeometry& geom,
                                   const AngularGrid& grid, const ClutterModel& model, Rng& rng) {
    const double sigma2 = model.stationary_power();
    const std::vector<TargetReturn> returns = draw_target_returns(scenario, k, sigma2, rng);
    return compose_snapshot(w, scenario, returns, gen_clutter(geom.virtual_size(), model, rng), geom, grid);
}

}  // namespace mmradar

#endif  // MMRADAR_ENVIRONMENT_HPP
