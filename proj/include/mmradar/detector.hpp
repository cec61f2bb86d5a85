#ifndef MMRADAR_DETECTOR_HPP
#define MMRADAR_DETECTOR_HPP

// Robust Wald-type detection on a single snapshot.
//
// The disturbance covariance is estimated from the snapshot itself as a
// Hermitian Toeplitz matrix held by its lags, never materialized: either the
// lag averages truncated at bandwidth b, or the autocovariance of an AR model
// fitted to the snapshot. For a hypothesized signature h the statistic is
//
//     Lambda = 2 |h^H y|^2 / (h^H Gamma h),
//
// which is asymptotically chi-square with 2 dof under H0, so the threshold
// lambda = -2 ln(P_FA) fixes the false-alarm rate regardless of the clutter law.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "mmradar/array_model.hpp"
#include "mmradar/errors.hpp"

namespace mmradar {

inline constexpr std::size_t kDefaultCovarianceBandwidth = 6;

/// Lags gamma(0..b) of a Hermitian Toeplitz covariance, zero beyond b,
/// gamma(m) = E[y[n+m] conj(y[n])]; entry (i, j) is gamma(i-j) for i >= j.
struct CovarianceEstimate {
    std::vector<cd> lags;
    std::size_t dimension = 0;

    std::size_t bandwidth() const { return lags.empty() ? 0 : lags.size() - 1; }

    cd entry(std::size_t i, std::size_t j) const {
        const std::size_t m = i >= j ? i - j : j - i;
        if (m > bandwidth()) return {};
        return i >= j ? lags[m] : std::conj(lags[m]);
    }
};

inline CovarianceEstimate estimate_covariance(std::span<const cd> y, std::size_t bandwidth = kDefaultCovarianceBandwidth) {
    const std::size_t n = y.size();
    if (n <= bandwidth)
        throw ConfigError("snapshot length " + std::to_string(n) + " must exceed covariance bandwidth " +
                          std::to_string(bandwidth));
    CovarianceEstimate cov;
    cov.dimension = n;
    cov.lags.resize(bandwidth + 1);
    for (std::size_t m = 0; m <= bandwidth; ++m) {
        cd acc{};
        for (std::size_t i = 0; i + m < n; ++i) acc += y[i + m] * std::conj(y[i]);
        cov.lags[m] = acc / static_cast<double>(n - m);
    }
    cov.lags[0] = cd(std::max(cov.lags[0].real(), 1e-12), 0.0);
    return cov;
}

/// Parametric estimate: an AR(order) model fitted to the snapshot with Burg's
/// method, its autocovariance extended by the AR recursion until it decays
/// below 1e-10 gamma(0) (at most N-1 lags). The implied covariance has a banded
/// inverse, which is the exact structure of AR clutter.
inline CovarianceEstimate estimate_ar_covariance(std::span<const cd> y, std::size_t order = kDefaultCovarianceBandwidth) {
    const std::size_t n = y.size();
    if (n <= order + 1)
        throw ConfigError("snapshot length " + std::to_string(n) + " too short for AR order " + std::to_string(order));
    CVector fwd(y.begin(), y.end());
    CVector bwd(y.begin(), y.end());
    std::vector<cd> a{1.0};  // x[n] + sum a_i x[n-i] = e[n]
    double power = 0.0;
    for (const cd& v : y) power += std::norm(v);
    power = std::max(power / static_cast<double>(n), 1e-12);

    CovarianceEstimate cov;
    cov.dimension = n;
    cov.lags.push_back(cd(power, 0.0));
    for (std::size_t p = 1; p <= order; ++p) {
        cd num{};
        double den = 0.0;
        for (std::size_t i = p; i < n; ++i) {
            num += fwd[i] * std::conj(bwd[i - 1]);
            den += std::norm(fwd[i]) + std::norm(bwd[i - 1]);
        }
        const cd k = den > 0.0 ? -2.0 * num / den : cd{};
        std::vector<cd> next(p + 1);
        for (std::size_t i = 0; i <= p; ++i) {
            const cd lo = i < a.size() ? a[i] : cd{};
            const cd hi = p - i < a.size() ? a[p - i] : cd{};
            next[i] = lo + k * std::conj(hi);
        }
        a = std::move(next);
        // Backward sweep so bwd[i-1] is read before it is overwritten.
        for (std::size_t i = n - 1; i >= p; --i) {
            const cd f = fwd[i];
            const cd b = bwd[i - 1];
            fwd[i] = f + k * b;
            bwd[i] = b + std::conj(k) * f;
        }
        cd g{};
        for (std::size_t i = 1; i <= p; ++i) g -= a[i] * cov.lags[p - i];
        cov.lags.push_back(g);
    }
    const double floor = 1e-10 * power;
    std::size_t quiet = 0;
    for (std::size_t m = order + 1; m < n && quiet < order + 8; ++m) {
        cd g{};
        for (std::size_t i = 1; i <= order; ++i) g -= a[i] * cov.lags[m - i];
        cov.lags.push_back(g);
        quiet = std::abs(g) < floor ? quiet + 1 : 0;
    }
    return cov;
}

enum class CovarianceKind { banded, ar };

inline CovarianceKind parse_covariance_kind(std::string_view s) {
    if (s == "banded") return CovarianceKind::banded;
    if (s == "ar") return CovarianceKind::ar;
    throw ConfigError("unknown covariance estimator '" + std::string(s) + "' (expected banded|ar)");
}

inline std::string_view to_string(CovarianceKind k) { return k == CovarianceKind::banded ? "banded" : "ar"; }

/// Dispatch on estimator kind; `param` is the bandwidth b or the AR order.
inline CovarianceEstimate estimate_disturbance_covariance(std::span<const cd> y, CovarianceKind kind, std::size_t param) {
    return kind == CovarianceKind::banded ? estimate_covariance(y, param) : estimate_ar_covariance(y, param);
}

/// h^H Gamma h in O(N b) from the lags.
inline double quadratic_form(std::span<const cd> h, const CovarianceEstimate& cov) {
    if (h.size() != cov.dimension) throw ConfigError("signature length does not match covariance dimension");
    double energy = 0.0;
    for (const cd& v : h) energy += std::norm(v);
    double q = cov.lags[0].real() * energy;
    for (std::size_t m = 1; m <= cov.bandwidth() && m < h.size(); ++m) {
        cd r{};
        for (std::size_t i = 0; i + m < h.size(); ++i) r += std::conj(h[i + m]) * h[i];
        q += 2.0 * (cov.lags[m] * r).real();
    }
    return std::max(q, 1e-30);
}

inline double wald_statistic(std::span<const cd> h, std::span<const cd> y, const CovarianceEstimate& cov) {
    if (h.size() != y.size()) throw ConfigError("signature and snapshot lengths differ");
    if (std::all_of(h.begin(), h.end(), [](const cd& v) { return v == cd{}; }))
        throw DegenerateSteeringError("Wald statistic undefined for an all-zero signature");
    cd inner{};
    for (std::size_t i = 0; i < h.size(); ++i) inner += std::conj(h[i]) * y[i];
    return 2.0 * std::norm(inner) / quadratic_form(h, cov);
}

/// Signature with Kronecker structure h = g (x) a_R(nu), evaluated without forming h.
///
/// h^H y costs O(N). h^H Gamma h costs O(n_tx * (M / n_rx + 2) + M) for M lags,
/// using the closed-form lag autocorrelation of a block-constant times a
/// sinusoid: for lag m = q n_rx + m', 0 <= m' < n_rx,
///   sum_n conj(h[n+m]) h[n] = (n_rx - m') e^{-i w m'} C_q + m' e^{-i w (m' - n_rx)} C_{q+1},
/// with C_q = sum_t g[t] conj(g[t+q]).
class KroneckerSignature {
public:
    KroneckerSignature(CVector transmit, double nu, std::size_t n_rx)
        : g_(std::move(transmit)), nu_(nu), n_rx_(n_rx), rx_conj_(steering_vector(n_rx, nu)) {
        for (cd& v : rx_conj_) v = std::conj(v);
        // Lambda is invariant to the scale of h; unit-norm g keeps h^H Gamma h away from underflow
        // for bins that sit in a transmit null.
        double e = 0.0;
        for (const cd& v : g_) e += std::norm(v);
        if (e > 0.0) {
            const double inv = 1.0 / std::sqrt(e);
            for (cd& v : g_) v *= inv;
            degenerate_ = false;
        }
    }

    std::size_t size() const { return g_.size() * n_rx_; }
    bool degenerate() const { return degenerate_; }

    /// Explicit h, scaled so that ||g|| = 1.
    CVector dense() const {
        CVector h(size());
        for (std::size_t t = 0; t < g_.size(); ++t)
            for (std::size_t r = 0; r < n_rx_; ++r) h[t * n_rx_ + r] = g_[t] * std::conj(rx_conj_[r]);
        return h;
    }

    cd inner(std::span<const cd> y) const {
        if (y.size() != size()) throw ConfigError("snapshot length does not match signature");
        cd acc{};
        for (std::size_t t = 0; t < g_.size(); ++t) {
            if (g_[t] == cd{}) continue;
            const cd* block = y.data() + t * n_rx_;
            cd s{};
            for (std::size_t r = 0; r < n_rx_; ++r) s += rx_conj_[r] * block[r];
            acc += std::conj(g_[t]) * s;
        }
        return acc;
    }

    double quadratic_form(const CovarianceEstimate& cov) const {
        if (cov.dimension != size()) throw ConfigError("signature length does not match covariance dimension");
        const std::size_t max_lag = std::min(cov.bandwidth(), size() - 1);
        const std::size_t n_blocks = max_lag / n_rx_ + 2;
        std::vector<cd> c(n_blocks);
        for (std::size_t q = 0; q < n_blocks && q < g_.size(); ++q)
            for (std::size_t t = 0; t + q < g_.size(); ++t) c[q] += g_[t] * std::conj(g_[t + q]);

        const double w = 2.0 * std::numbers::pi * nu_;
        const double nr = static_cast<double>(n_rx_);
        double q_form = cov.lags[0].real() * c[0].real() * nr;
        for (std::size_t m = 1; m <= max_lag; ++m) {
            const std::size_t q = m / n_rx_;
            const double mp = static_cast<double>(m % n_rx_);
            const cd r = (nr - mp) * std::polar(1.0, -w * mp) * c[q] + mp * std::polar(1.0, -w * (mp - nr)) * c[q + 1];
            q_form += 2.0 * (cov.lags[m] * r).real();
        }
        return std::max(q_form, 1e-30);
    }

    double wald_statistic(std::span<const cd> y, const CovarianceEstimate& cov) const {
        if (degenerate()) throw DegenerateSteeringError("Wald statistic undefined for an all-zero signature");
        return 2.0 * std::norm(inner(y)) / quadratic_form(cov);
    }

private:
    CVector g_;
    double nu_;
    std::size_t n_rx_;
    CVector rx_conj_;
    bool degenerate_ = true;
};

/// lambda = -2 ln(P_FA).
inline double threshold(double p_fa) {
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw DomainError("false-alarm probability must lie in (0, 1)");
    return -2.0 * std::log(p_fa);
}

/// First-order Marcum Q function Q1(a, b) = P(X > b^2), X noncentral chi-square, 2 dof, noncentrality a^2.
inline double marcum_q1(double a, double b) {
    if (b <= 0.0) return 1.0;
    if (a == 0.0) return std::exp(-0.5 * b * b);
    if (a - b > 40.0) return 1.0;  // Rician tail below 1e-300
    const boost::math::non_central_chi_squared_distribution<double> dist(2.0, a * a);
    return boost::math::cdf(boost::math::complement(dist, b * b));
}

/// Plug-in detection probability for a bin whose statistic is Lambda.
inline double estimate_pd(double statistic, double lambda) {
    const double noncentrality = std::max(statistic - 2.0, 0.0);
    return std::clamp(marcum_q1(std::sqrt(noncentrality), std::sqrt(lambda)), 0.0, 1.0);
}

struct DetectionReport {
    std::vector<double> statistics;        // Lambda per bin, index l-1
    std::vector<std::uint8_t> detections;  // 1 iff Lambda >= lambda
    int state_index = 0;                   // min(#detections, K)
    std::vector<double> pd_estimates;
    std::vector<BinNumber> sorted_bins;    // descending Lambda, ties by ascending bin
    double threshold = 0.0;

    std::size_t bins() const { return statistics.size(); }
    int detection_count() const { return static_cast<int>(std::count(detections.begin(), detections.end(), 1)); }
    bool detected(BinNumber l) const { return detections.at(static_cast<std::size_t>(l - 1)) != 0; }
    double pd(BinNumber l) const { return pd_estimates.at(static_cast<std::size_t>(l - 1)); }
};

inline DetectionReport build_report(std::span<const double> statistics, double lambda, int K) {
    if (statistics.empty()) throw ConfigError("detection report needs at least one bin");
    if (K < 0) throw ConfigError("maximum target count K must be non-negative");
    DetectionReport rep;
    rep.threshold = lambda;
    rep.statistics.assign(statistics.begin(), statistics.end());
    rep.detections.resize(statistics.size());
    rep.pd_estimates.resize(statistics.size());
    for (std::size_t l = 0; l < statistics.size(); ++l) {
        rep.detections[l] = statistics[l] >= lambda ? 1 : 0;
        rep.pd_estimates[l] = estimate_pd(statistics[l], lambda);
    }
    rep.state_index = std::min(rep.detection_count(), K);
    rep.sorted_bins.resize(statistics.size());
    std::iota(rep.sorted_bins.begin(), rep.sorted_bins.end(), 1);
    std::stable_sort(rep.sorted_bins.begin(), rep.sorted_bins.end(), [&](BinNumber a, BinNumber b) {
        return statistics[static_cast<std::size_t>(a - 1)] > statistics[static_cast<std::size_t>(b - 1)];
    });
    return rep;
}

}  // namespace mmradar

#endif  // MMRADAR_DETECTOR_HPP
