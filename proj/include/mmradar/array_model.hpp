#ifndef MMRADAR_ARRAY_MODEL_HPP
#define MMRADAR_ARRAY_MODEL_HPP

// Co-located MIMO array primitives: ULA steering vectors, the virtual-array
// signature h = (W^T a_T(nu)) (x) a_R(nu), transmit beampatterns and the
// uniform spatial-frequency grid of the receive filter bank.
//
// Spatial frequency nu = (d/lambda) sin(theta) is the only angular
// coordinate used; it lives in [-0.5, 0.5] for half-wavelength spacing.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mmradar/errors.hpp"

namespace mmradar {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

/// Grid bins are numbered from 1 to L, matching the scenario tables.
using BinNumber = int;

struct ArrayGeometry {
    std::size_t n_tx = 1;
    std::size_t n_rx = 1;
    double spacing_ratio = 0.5;  // d / lambda

    ArrayGeometry() = default;
    ArrayGeometry(std::size_t tx, std::size_t rx, double spacing = 0.5)
        : n_tx(tx), n_rx(rx), spacing_ratio(spacing) {
        if (n_tx < 1 || n_rx < 1) throw ConfigError("array needs at least one tx and one rx element");
        if (!(spacing_ratio > 0.0)) throw ConfigError("element spacing ratio must be positive");
    }

    std::size_t virtual_size() const { return n_tx * n_rx; }

    double spatial_frequency(double theta_rad) const { return spacing_ratio * std::sin(theta_rad); }
};

namespace detail {
inline void check_nu(double nu) {
    if (!(std::abs(nu) <= 0.5)) throw DomainError("spatial frequency outside [-0.5, 0.5]: " + std::to_string(nu));
}
}  // namespace detail

/// a(nu)[m] = exp(i 2 pi nu m), m = 0..n-1.
inline CVector steering_vector(std::size_t n_elems, double nu) {
    detail::check_nu(nu);
    CVector a(n_elems);
    const double w = 2.0 * std::numbers::pi * nu;
    for (std::size_t m = 0; m < n_elems; ++m) a[m] = std::polar(1.0, w * static_cast<double>(m));
    return a;
}

/// Dense square complex matrix, column-major, holding the transmit weighting W.
///
/// The total-power invariant tr(W W^H) <= budget is enforced when the matrix
/// is built; a WeightMatrix is immutable afterwards.
class WeightMatrix {
public:
    static constexpr double kPowerSlack = 1e-9;

    WeightMatrix() = default;

    WeightMatrix(std::size_t n, std::vector<cd> column_major, double power_budget)
        : n_(n), entries_(std::move(column_major)) {
        if (n_ == 0) throw ConfigError("weight matrix must be at least 1x1");
        if (entries_.size() != n_ * n_) throw ConfigError("weight matrix entry count does not match n*n");
        const double p = power();
        if (!(p <= power_budget + kPowerSlack))
            throw ConfigError("weight matrix power " + std::to_string(p) + " exceeds budget " +
                              std::to_string(power_budget));
    }

    static WeightMatrix zero(std::size_t n) { return WeightMatrix(n, std::vector<cd>(n * n), 0.0); }

    std::size_t size() const { return n_; }
    cd operator()(std::size_t row, std::size_t col) const { return entries_[col * n_ + row]; }
    std::span<const cd> column(std::size_t col) const { return {entries_.data() + col * n_, n_}; }
    std::span<const cd> entries() const { return entries_; }

    /// tr(W W^H), i.e. the squared Frobenius norm.
    double power() const {
        double p = 0.0;
        for (const cd& e : entries_) p += std::norm(e);
        return p;
    }

private:
    std::size_t n_ = 0;
    std::vector<cd> entries_;
};

/// g = W^T a_T(nu). Columns that are identically zero are skipped, which keeps
/// focused (few-beam) matrices cheap.
inline CVector transmit_response(const WeightMatrix& w, double nu) {
    const CVector a = steering_vector(w.size(), nu);
    CVector g(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto col = w.column(j);
        cd acc{};
        bool any = false;
        for (std::size_t m = 0; m < col.size(); ++m) {
            if (col[m] == cd{}) continue;
            any = true;
            acc += col[m] * a[m];
        }
        g[j] = any ? acc : cd{};
    }
    return g;
}

/// h = (W^T a_T(nu)) (x) a_R(nu); entry t*n_rx + r equals g[t] * a_R[r].
inline CVector virtual_response(const WeightMatrix& w, double nu, const ArrayGeometry& geom) {
    detail::check_nu(nu);
    if (w.size() != geom.n_tx) throw ConfigError("weight matrix size does not match n_tx");
    const CVector g = transmit_response(w, nu);
    const CVector ar = steering_vector(geom.n_rx, nu);
    CVector h(geom.virtual_size());
    for (std::size_t t = 0; t < geom.n_tx; ++t)
        for (std::size_t r = 0; r < geom.n_rx; ++r) h[t * geom.n_rx + r] = g[t] * ar[r];
    return h;
}

/// a_T^T(nu) W W^H a_T^*(nu) = ||W^T a_T(nu)||^2.
inline double transmit_beampattern(const WeightMatrix& w, double nu) {
    double p = 0.0;
    for (const cd& v : transmit_response(w, nu)) p += std::norm(v);
    return p;
}

/// Ordered spatial frequencies of the L receive beams.
class AngularGrid {
public:
    AngularGrid() = default;
    explicit AngularGrid(std::vector<double> bins) : bins_(std::move(bins)) {
        if (bins_.empty()) throw ConfigError("angular grid is empty");
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            if (!(std::abs(bins_[i]) <= 0.5)) throw ConfigError("grid frequency outside [-0.5, 0.5]");
            if (i > 0 && !(bins_[i] > bins_[i - 1])) throw ConfigError("grid frequencies must be strictly increasing");
        }
    }

    std::size_t size() const { return bins_.size(); }
    std::span<const double> frequencies() const { return bins_; }

    /// Spatial frequency of 1-based bin number l.
    double nu(BinNumber l) const {
        if (l < 1 || static_cast<std::size_t>(l) > bins_.size())
            throw ConfigError("bin number " + std::to_string(l) + " outside grid of size " +
                              std::to_string(bins_.size()));
        return bins_[static_cast<std::size_t>(l - 1)];
    }

    bool contains(BinNumber l) const { return l >= 1 && static_cast<std::size_t>(l) <= bins_.size(); }

private:
    std::vector<double> bins_;
};

/// nu_l = (l - L/2 - 1) / L for l = 1..L: spacing 1/L, from -0.5 up to 0.5 - 1/L.
inline AngularGrid make_grid(std::size_t L) {
    if (L < 2 || L % 2 != 0) throw ConfigError("grid size must be even and >= 2, got " + std::to_string(L));
    std::vector<double> bins(L);
    const auto half = static_cast<long>(L / 2);
    for (std::size_t l = 1; l <= L; ++l)
        bins[l - 1] = static_cast<double>(static_cast<long>(l) - half - 1) / static_cast<double>(L);
    return AngularGrid(std::move(bins));
}

}  // namespace mmradar

#endif  // MMRADAR_ARRAY_MODEL_HPP
