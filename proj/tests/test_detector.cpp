#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mmradar/beamformer.hpp"
#include "mmradar/detector.hpp"
#include "mmradar/environment.hpp"

using namespace mmradar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CVector random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    CVector v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

// h^H Gamma h with Gamma materialized from its (i, j) definition.
double dense_quadratic_form(const CVector& h, const CovarianceEstimate& cov) {
    const std::size_t n = h.size();
    cd acc{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t m = i >= j ? i - j : j - i;
            cd g{};
            if (m < cov.lags.size()) g = i >= j ? cov.lags[m] : std::conj(cov.lags[m]);
            acc += std::conj(h[i]) * g * h[j];
        }
    return acc.real();
}

// Q1(a, b) as a Poisson mixture of central chi-square tails:
//   sum_j e^{-a^2/2} (a^2/2)^j / j! * P(chi2_{2j+2} > b^2).
double marcum_series(double a, double b) {
    const double mu = a * a / 2.0, x = b * b / 2.0;
    double total = 0.0;
    double pois = std::exp(-mu);
    double tail_term = std::exp(-x);  // e^{-x} x^j / j!
    double tail = tail_term;          // P(chi2_{2j+2} > 2x) = e^{-x} sum_{i<=j} x^i / i!
    for (int j = 0; j < 2000; ++j) {
        total += pois * tail;
        pois *= mu / (j + 1);
        tail_term *= x / (j + 1);
        tail += tail_term;
        if (pois < 1e-300 && j > mu) break;
    }
    return total;
}

CovarianceEstimate random_banded(std::size_t n, std::size_t b, std::uint64_t seed) {
    CovarianceEstimate cov;
    cov.dimension = n;
    cov.lags = random_vector(b + 1, seed);
    cov.lags[0] = cd(std::abs(cov.lags[0]) + 3.0, 0.0);
    return cov;
}

}  // namespace

TEST_CASE("covariance lag averages") {
    const CVector ones(50, cd(1.0, 0.0));
    const CovarianceEstimate c = estimate_covariance(ones, 2);
    REQUIRE(c.lags.size() == 3);
    for (const cd& g : c.lags) CHECK_THAT(std::abs(g - cd(1.0, 0.0)), WithinAbs(0.0, 1e-15));

    const CVector v = random_vector(40, 3);
    const CovarianceEstimate c0 = estimate_covariance(v, 0);
    double p = 0.0;
    for (const cd& x : v) p += std::norm(x);
    CHECK_THAT(c0.lags[0].real(), WithinRel(p / 40.0, 1e-13));
    CHECK(c0.bandwidth() == 0);

    CHECK_THROWS_AS(estimate_covariance(v, 40), ConfigError);
    CHECK(estimate_covariance(CVector(10), 1).lags[0].real() == 1e-12);
}

TEST_CASE("covariance of white noise") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> d(0.0, std::sqrt(0.5));
    CVector y(10000);
    for (auto& x : y) x = {d(rng), d(rng)};
    const CovarianceEstimate c = estimate_covariance(y, 6);
    CHECK_THAT(c.lags[0].real(), WithinAbs(1.0, 0.05));
    for (std::size_t m = 1; m <= 6; ++m) CHECK(std::abs(c.lags[m]) <= 0.05);
}

TEST_CASE("covariance entries are Hermitian Toeplitz") {
    const CovarianceEstimate c = estimate_covariance(random_vector(30, 4), 3);
    CHECK(c.entry(5, 2) == c.lags[3]);
    CHECK(c.entry(2, 5) == std::conj(c.lags[3]));
    CHECK(c.entry(9, 2) == cd{});
}

TEST_CASE("quadratic form simple cases") {
    CovarianceEstimate eye;
    eye.dimension = 8;
    eye.lags = {1.0};
    const CVector h = random_vector(8, 5);
    double e = 0.0;
    for (const cd& v : h) e += std::norm(v);
    CHECK_THAT(quadratic_form(h, eye), WithinRel(e, 1e-14));

    const CovarianceEstimate c = random_banded(8, 4, 6);
    CVector e0(8);
    e0[0] = 1.0;
    CHECK_THAT(quadratic_form(e0, c), WithinRel(c.lags[0].real(), 1e-15));
}

TEST_CASE("banded quadratic form matches dense oracle") {
    for (std::size_t n = 1; n <= 64; n += 3)
        for (std::size_t b = 0; b <= std::min<std::size_t>(6, n - 1); ++b) {
            const CVector h = random_vector(n, 1000 * n + b);
            const CovarianceEstimate c = estimate_covariance(random_vector(n, 7 * n + b), b);
            const double ref = dense_quadratic_form(h, c);
            INFO("n " << n << " b " << b);
            REQUIRE(std::abs(quadratic_form(h, c) - ref) <= 1e-12 * std::abs(ref));
        }
}

TEST_CASE("AR covariance quadratic form matches dense oracle") {
    ClutterModel m = pole_clutter_model(0.8);
    for (std::size_t n : {16u, 40u, 64u}) {
        Rng rng(n);
        const CVector y = gen_clutter(n, m, rng);
        const CovarianceEstimate c = estimate_ar_covariance(y, 6);
        const CVector h = random_vector(n, n + 1);
        const double ref = dense_quadratic_form(h, c);
        REQUIRE(std::abs(quadratic_form(h, c) - ref) <= 1e-12 * std::abs(ref));
    }
}

TEST_CASE("Burg fit recovers an AR(1) correlation") {
    ClutterModel m;
    m.ar_coeffs = {0.7, 0, 0, 0, 0, 0};
    m.innovation = InnovationKind::gaussian;
    Rng rng(31);
    const CVector y = gen_clutter(20000, m, rng);
    const CovarianceEstimate c = estimate_ar_covariance(y, 1);
    const double g0 = m.stationary_power();
    CHECK_THAT(c.lags[0].real(), WithinRel(g0, 0.05));
    CHECK_THAT((c.lags[1] / c.lags[0]).real(), WithinAbs(0.7, 0.02));
    CHECK_THAT((c.lags[5] / c.lags[0]).real(), WithinAbs(std::pow(0.7, 5), 0.03));
    // Extended until negligible.
    CHECK(std::abs(c.lags.back()) < 1e-9 * c.lags[0].real());
    CHECK_THROWS_AS(estimate_ar_covariance(CVector(6), 6), ConfigError);
}

TEST_CASE("Burg fit of white noise is nearly white") {
    const CVector y = random_vector(10000, 8);
    const CovarianceEstimate c = estimate_ar_covariance(y, 6);
    for (std::size_t m = 1; m < c.lags.size(); ++m) CHECK(std::abs(c.lags[m]) < 0.05 * c.lags[0].real());
}

TEST_CASE("covariance estimator dispatch") {
    const CVector y = random_vector(200, 9);
    CHECK(estimate_disturbance_covariance(y, CovarianceKind::banded, 4).lags == estimate_covariance(y, 4).lags);
    CHECK(estimate_disturbance_covariance(y, CovarianceKind::ar, 3).lags == estimate_ar_covariance(y, 3).lags);
    CHECK(parse_covariance_kind("ar") == CovarianceKind::ar);
    CHECK(to_string(parse_covariance_kind("banded")) == "banded");
    CHECK_THROWS_AS(parse_covariance_kind("tyler"), ConfigError);
}

TEST_CASE("Wald statistic") {
    CovarianceEstimate eye;
    eye.dimension = 4;
    eye.lags = {1.0};
    const CVector h{1.0, 1.0, 0.0, 0.0};
    const CVector y{1.0, -1.0, 2.0, 0.0};
    CHECK_THAT(wald_statistic(h, y, eye), WithinAbs(0.0, 1e-15));
    CHECK_THAT(wald_statistic(h, h, eye), WithinRel(4.0, 1e-15));
    CHECK_THROWS_AS(wald_statistic(CVector(4), y, eye), DegenerateSteeringError);
}

TEST_CASE("Wald statistic is scale invariant") {
    const CVector y = random_vector(500, 10);
    const CVector h = random_vector(500, 11);
    for (CovarianceKind kind : {CovarianceKind::banded, CovarianceKind::ar}) {
        const double base = wald_statistic(h, y, estimate_disturbance_covariance(y, kind, 6));
        for (cd c : {cd(3.0, 0.0), cd(-0.2, 5.0), cd(1e-3, -1e-3)}) {
            CVector cy(y);
            for (auto& v : cy) v *= c;
            CHECK_THAT(wald_statistic(h, cy, estimate_disturbance_covariance(cy, kind, 6)), WithinRel(base, 1e-9));
        }
    }
}

TEST_CASE("Kronecker signature matches the dense signature") {
    const std::size_t nt = 7, nr = 9;
    const AngularGrid grid = make_grid(20);
    const WeightMatrix w = focused_weights({{3, 8, 16}, 1.0}, grid, nt);
    Rng rng(12);
    const CVector y = gen_clutter(nt * nr, pole_clutter_model(0.8), rng);
    for (double nu : {-0.35, 0.0, 0.25}) {
        const KroneckerSignature sig(transmit_response(w, nu), nu, nr);
        const CVector h = sig.dense();
        const CVector raw = virtual_response(w, nu, ArrayGeometry(nt, nr));
        for (CovarianceKind kind : {CovarianceKind::banded, CovarianceKind::ar}) {
            for (std::size_t b : {0u, 1u, 6u, 20u}) {
                const CovarianceEstimate c = estimate_disturbance_covariance(y, kind, b);
                // Lag averages of strongly correlated data need not be positive definite;
                // both evaluations clamp at the same floor.
                const double ref = std::max(dense_quadratic_form(h, c), 1e-30);
                INFO("nu " << nu << " kind " << to_string(kind) << " b " << b);
                REQUIRE(std::abs(sig.quadratic_form(c) - ref) <= 1e-12 * std::abs(ref));
                // A clamped denominator no longer scales with h.
                if (ref > 1e-30) REQUIRE_THAT(sig.wald_statistic(y, c), WithinRel(wald_statistic(raw, y, c), 1e-10));
            }
        }
    }
}

TEST_CASE("indefinite banded estimate is clamped") {
    // gamma = (1, 0.9): eigenvalue 1 - 0.9 sqrt(2) < 0 along (1, -sqrt(2), 1).
    CovarianceEstimate c;
    c.dimension = 3;
    c.lags = {1.0, 0.9};
    const CVector h{1.0, -std::sqrt(2.0), 1.0};
    CHECK(dense_quadratic_form(h, c) < 0.0);
    CHECK(quadratic_form(h, c) == 1e-30);
}

TEST_CASE("Kronecker signature of an all-zero response") {
    const KroneckerSignature sig(CVector(4), 0.1, 3);
    CHECK(sig.degenerate());
    CovarianceEstimate c;
    c.dimension = 12;
    c.lags = {1.0};
    CHECK_THROWS_AS(sig.wald_statistic(CVector(12), c), DegenerateSteeringError);
}

TEST_CASE("threshold") {
    CHECK_THAT(threshold(1e-4), WithinAbs(18.420681, 1e-6));
    CHECK_THAT(threshold(std::exp(-0.5)), WithinAbs(1.0, 1e-15));
    CHECK_THAT(threshold(1e-2), WithinAbs(9.210340, 1e-6));
    CHECK_THROWS_AS(threshold(0.0), DomainError);
    CHECK_THROWS_AS(threshold(1.0), DomainError);
}

TEST_CASE("Marcum Q against the series oracle") {
    for (double a : {0.1, 0.5, 1.0, 2.0, 4.29, 6.0, 10.0})
        for (double b : {0.3, 1.0, 3.0, 4.29, 8.0}) {
            INFO("a " << a << " b " << b);
            CHECK_THAT(marcum_q1(a, b), WithinAbs(marcum_series(a, b), 1e-12));
        }
    CHECK(marcum_q1(3.0, 0.0) == 1.0);
    CHECK_THAT(marcum_q1(0.0, 2.0), WithinRel(std::exp(-2.0), 1e-15));
}

TEST_CASE("plug-in detection probability") {
    const double lam = threshold(1e-4);
    CHECK_THAT(estimate_pd(2.0, lam), WithinRel(1e-4, 1e-9));
    CHECK_THAT(estimate_pd(0.5, lam), WithinRel(1e-4, 1e-9));
    // Q1(sqrt(18.42), sqrt(18.42))
    CHECK_THAT(estimate_pd(lam + 2.0, lam), WithinAbs(marcum_series(std::sqrt(lam), std::sqrt(lam)), 1e-12));
    CHECK_THAT(estimate_pd(lam + 2.0, lam), WithinAbs(0.546802, 1e-6));
    CHECK_THAT(estimate_pd(10.0, 18.42), WithinAbs(0.0935810, 1e-6));
    CHECK_THAT(estimate_pd(30.0, 18.42), WithinAbs(0.8654604, 1e-6));
    CHECK_THAT(estimate_pd(5.0, 9.21), WithinAbs(0.1399793, 1e-6));
    CHECK(estimate_pd(1e6, lam) == 1.0);

    double prev = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double p = estimate_pd(i * 0.025, lam);
        REQUIRE(p >= prev);
        REQUIRE(p <= 1.0);
        prev = p;
    }
    CHECK_THAT(estimate_pd(2.0 + 1e-9, lam), WithinAbs(estimate_pd(2.0, lam), 1e-12));
}

TEST_CASE("detection report") {
    SECTION("nothing above threshold") {
        const auto r = build_report(std::vector<double>{1.0, 2.0, 0.5}, 5.0, 5);
        CHECK(r.state_index == 0);
        CHECK(r.detections == std::vector<std::uint8_t>{0, 0, 0});
    }
    SECTION("state index saturates at K") {
        const auto r = build_report(std::vector<double>(7, 10.0), 5.0, 5);
        CHECK(r.state_index == 5);
        CHECK(r.detection_count() == 7);
    }
    SECTION("hand case with a tie") {
        const auto r = build_report(std::vector<double>{3, 9, 9, 1}, 5.0, 5);
        CHECK(r.detections == std::vector<std::uint8_t>{0, 1, 1, 0});
        CHECK(r.state_index == 2);
        CHECK(r.sorted_bins == std::vector<BinNumber>{2, 3, 1, 4});
        CHECK(r.detected(2));
        CHECK_FALSE(r.detected(4));
    }
    SECTION("threshold is inclusive") {
        CHECK(build_report(std::vector<double>{5.0}, 5.0, 1).detections[0] == 1);
    }
    SECTION("equal statistics sort by ascending bin") {
        const auto r = build_report(std::vector<double>{4, 4, 4, 4}, 5.0, 2);
        CHECK(r.sorted_bins == std::vector<BinNumber>{1, 2, 3, 4});
    }
    SECTION("sorted bins are a permutation with non-increasing statistics") {
        const CVector v = random_vector(20, 13);
        std::vector<double> s;
        for (const cd& x : v) s.push_back(std::norm(x));
        const auto r = build_report(s, 2.0, 5);
        std::vector<BinNumber> sorted = r.sorted_bins;
        std::sort(sorted.begin(), sorted.end());
        for (int l = 1; l <= 20; ++l) CHECK(sorted[l - 1] == l);
        for (std::size_t i = 1; i < 20; ++i)
            CHECK(s[r.sorted_bins[i - 1] - 1] >= s[r.sorted_bins[i] - 1]);
    }
    CHECK_THROWS_AS(build_report(std::vector<double>{}, 1.0, 1), ConfigError);
}
