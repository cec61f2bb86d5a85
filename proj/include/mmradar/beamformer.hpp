#ifndef MMRADAR_BEAMFORMER_HPP
#define MMRADAR_BEAMFORMER_HPP

// Transmit weighting synthesis.
//
// With no focus set the array radiates omnidirectionally through
// W_ort = sqrt(P_max / N_T) I. Otherwise W is restricted to a multi-beam
// structure, column j = sqrt(p_j / N_T) conj(a_T(nu_j)), and the beam powers
// are balanced so that the beampattern is (nearly) equal on every focused bin,
// which is the max-min optimum when cross-beam leakage is small.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mmradar/array_model.hpp"
#include "mmradar/errors.hpp"

namespace mmradar {

struct FocusRequest {
    std::vector<BinNumber> bins;  // Omega_k, 1-based, any order, no duplicates
    double p_max = 1.0;
};

inline WeightMatrix orthogonal_weights(std::size_t n_tx, double p_max) {
    if (n_tx < 1) throw ConfigError("n_tx must be at least 1");
    if (!(p_max > 0.0)) throw ConfigError("p_max must be positive");
    std::vector<cd> e(n_tx * n_tx);
    const double d = std::sqrt(p_max / static_cast<double>(n_tx));
    for (std::size_t i = 0; i < n_tx; ++i) e[i * n_tx + i] = d;
    return WeightMatrix(n_tx, std::move(e), p_max);
}

inline double power_used(const WeightMatrix& w) { return w.power(); }

struct BeamPowerSolution {
    std::vector<double> powers;
    int iterations = 0;
    bool converged = false;
};

inline constexpr int kBalanceMaxIterations = 50;
inline constexpr double kBalanceTolerance = 1e-6;

/// Fixed-point balancing of beam powers p_j (sum = p_max) so that the realized
/// beampattern values on the focused frequencies agree to kBalanceTolerance
/// relative spread. Falls back to the equal split if it does not converge.
inline BeamPowerSolution balance_beam_powers(std::span<const double> nus, std::size_t n_tx, double p_max) {
    const std::size_t n = nus.size();
    // Beampattern at nu_i is sum_j p_j |a_i^H a_j|^2 / n_tx.
    std::vector<CVector> a;
    a.reserve(n);
    for (double nu : nus) a.push_back(steering_vector(n_tx, nu));
    std::vector<double> gain(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cd dot{};
            for (std::size_t m = 0; m < n_tx; ++m) dot += std::conj(a[i][m]) * a[j][m];
            gain[i * n + j] = std::norm(dot) / static_cast<double>(n_tx);
        }

    BeamPowerSolution sol;
    sol.powers.assign(n, p_max / static_cast<double>(n));
    std::vector<double> bp(n);
    for (int it = 0; it <= kBalanceMaxIterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            bp[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) bp[i] += gain[i * n + j] * sol.powers[j];
        }
        const auto [lo, hi] = std::minmax_element(bp.begin(), bp.end());
        if (*hi - *lo <= kBalanceTolerance * *lo) {
            sol.iterations = it;
            sol.converged = true;
            return sol;
        }
        if (it == kBalanceMaxIterations) break;
        double mean = 0.0;
        for (double v : bp) mean += v;
        mean /= static_cast<double>(n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sol.powers[j] *= mean / bp[j];
            total += sol.powers[j];
        }
        for (double& p : sol.powers) p *= p_max / total;
    }
    sol.iterations = kBalanceMaxIterations;
    sol.converged = false;
    sol.powers.assign(n, p_max / static_cast<double>(n));
    return sol;
}

/// Multi-beam W focusing p_max on the requested bins.
inline WeightMatrix focused_weights(const FocusRequest& req, const AngularGrid& grid, std::size_t n_tx) {
    if (req.bins.empty()) throw ConfigError("focused_weights needs a non-empty focus set; use orthogonal_weights");
    if (!(req.p_max > 0.0)) throw ConfigError("p_max must be positive");
    if (req.bins.size() > grid.size()) throw ConfigError("focus set larger than the grid");
    if (req.bins.size() > n_tx)
        throw InfeasibleFocusError("cannot form " + std::to_string(req.bins.size()) + " beams with " +
                                   std::to_string(n_tx) + " transmit elements");
    if (std::set<BinNumber>(req.bins.begin(), req.bins.end()).size() != req.bins.size())
        throw ConfigError("focus set contains duplicate bins");

    std::vector<double> nus;
    for (BinNumber l : req.bins) nus.push_back(grid.nu(l));
    const BeamPowerSolution sol = balance_beam_powers(nus, n_tx, req.p_max);
    if (!sol.converged)
        std::clog << "mmradar: beam power balancing did not converge in " << kBalanceMaxIterations
                  << " iterations; using equal split\n";

    // The first |Omega| columns carry the beams, the rest stay zero.
    std::vector<cd> e(n_tx * n_tx);
    for (std::size_t j = 0; j < nus.size(); ++j) {
        const CVector a = steering_vector(n_tx, nus[j]);
        const double s = std::sqrt(sol.powers[j] / static_cast<double>(n_tx));
        for (std::size_t m = 0; m < n_tx; ++m) e[j * n_tx + m] = s * std::conj(a[m]);
    }
    return WeightMatrix(n_tx, std::move(e), req.p_max);
}

/// Empty focus set -> omnidirectional, otherwise focused.
inline WeightMatrix weights_for(const FocusRequest& req, const AngularGrid& grid, std::size_t n_tx) {
    return req.bins.empty() ? orthogonal_weights(n_tx, req.p_max) : focused_weights(req, grid, n_tx);
}

}  // namespace mmradar

#endif  // MMRADAR_BEAMFORMER_HPP
