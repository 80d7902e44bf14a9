#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "json.hpp"

#include "gvx/errors.hpp"
#include "gvx/oracle.hpp"
#include "gvx/sumsq.hpp"

using namespace gvx;

TEST_CASE("gamma sampling") {
    for (double a : {0.3, 1.0, 4.5}) {
        const auto x = sample_gamma(a, 200000, 7, 1);
        const MomentEstimate m = mc_moment(x);
        CHECK(std::abs(m.mean - a) < 5 * m.se);
        std::vector<double> sq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - a) * (x[i] - a);
        const MomentEstimate v = mc_moment(sq);
        CHECK(std::abs(v.mean - a) < 5 * v.se);
        for (double v : x) CHECK_FALSE(v < 0);
    }
    const auto a = sample_gamma(2.0, 50000, 11, 1);
    CHECK(a == sample_gamma(2.0, 50000, 11, 3));
    CHECK(a != sample_gamma(2.0, 50000, 12, 1));
    const auto b = sample_gamma(2.0, 10000, 11, 2);
    CHECK(std::equal(b.begin(), b.end(), a.begin()));
    CHECK_THROWS_AS(sample_gamma(-1.0, 10, 1), DomainError);
}

TEST_CASE("gamma samples pass the KS test") {
    auto x = sample_gamma(1.7, 100000, 3, 1);
    std::sort(x.begin(), x.end());
    const KsResult ks = ks_distance(x, [](double t) { return boost::math::gamma_p(1.7, t); });
    CHECK(ks.distance < ks_critical(x.size()));
    CHECK(ks.points == x.size());
}

TEST_CASE("KS distance") {
    const std::vector<double> pts{0.1, 0.4, 0.6, 0.9};
    const auto uniform = [](double t) { return std::clamp(t, 0.0, 1.0); };
    const KsResult r = ks_distance(pts, uniform);
    CHECK(r.distance == doctest::Approx(0.15).epsilon(1e-12));
    std::vector<double> grid(1000);
    for (int i = 0; i < 1000; ++i) grid[i] = (i + 0.5) / 1000;
    CHECK(ks_distance(grid, uniform).distance == doctest::Approx(0.0005).epsilon(1e-9));
    CHECK(ks_critical(1000000) == doctest::Approx(1.63e-3));

    std::vector<double> fine(1000000);
    for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = (i + 0.5) / fine.size();
    const KsResult shifted = ks_distance(fine, [](double t) { return std::clamp(t - 0.01, 0.0, 1.0); });
    CHECK(shifted.distance > ks_critical(fine.size()));
    CHECK(shifted.distance == doctest::Approx(0.0100005).epsilon(1e-6));
    CHECK(ks_distance(fine, uniform).distance < 1e-6);
}

TEST_CASE("row statistics") {
    const SampleMatrix s = sample_rows({1.5, 4}, 20000, 5, 1);
    CHECK(s.x.size() == 80000);
    CHECK(identity_violation(s) < 1e-12);
    CHECK(u_bounds_hold(s));
    const auto Z = row_statistic(s, Statistic::Z);
    const auto S2 = row_statistic(s, Statistic::S2);
    const auto U = row_statistic(s, Statistic::U);
    const auto T = row_statistic(s, Statistic::tanPhi);
    for (std::size_t i = 0; i < 100; ++i) {
        const double* r = s.row(i);
        double y = 0, q = 0;
        for (int j = 0; j < 4; ++j) {
            y += r[j];
            q += r[j] * r[j];
        }
        CHECK(Z[i] == doctest::Approx(q).epsilon(1e-14));
        CHECK(S2[i] == doctest::Approx(q - y * y / 4).epsilon(1e-10));
        CHECK(U[i] == doctest::Approx(std::sqrt(q) / y).epsilon(1e-14));
        CHECK(T[i] == doctest::Approx(std::sqrt(4 * U[i] * U[i] - 1)).epsilon(1e-10));
    }
    // E(n-1)S^2 = (n-1) alpha.
    const MomentEstimate m = mc_moment(S2);
    CHECK(std::abs(m.mean - 4.5) < 5 * m.se);
    CHECK_THROWS_AS(row_statistic(sample_rows({1, 1}, 10, 1, 1), Statistic::S2), DomainError);
}

TEST_CASE("moments of cos(Phi) by simulation") {
    const ModelParams p{2, 3};
    const SampleMatrix s = sample_rows(p, 1000000, 9, 0);
    const MomentTable t = build_moments(p, 4);
    for (int k = 0; k <= 4; ++k) {
        const MomentEstimate m = mc_moment(row_statistic(s, Statistic::cosPow, k));
        CHECK_MESSAGE(std::abs(m.mean - to_double(t.gamma()[k])) < 4 * m.se, "k=" << k);
    }
}

TEST_CASE("pairs by quadrature") {
    CHECK(quad_cdf_n2(1.0, 1.0) == doctest::Approx(0.3535207700906238985).epsilon(1e-11));
    EvalConfig cfg;
    cfg.tol = 1e-12;
    for (double a : {0.5, 2.0, 3.5}) {
        const MomentTable t = build_moments({a, 2}, 400);
        for (double r : {0.5, 2.0, 5.0}) CHECK(std::abs(quad_cdf_n2(a, r) - cdf_sumsq_mixture(t, r, cfg).value) < 1e-9);
    }
    CHECK(quad_cdf_n2(1.0, 0.0) == 0.0);
}

TEST_CASE("Chebyshev interpolant") {
    const auto f = [](double x) { return boost::math::gamma_p(3.0, x); };
    CdfInterpolant ip(f, 0.01, 30, {1e-9, true, 0.0, 600, 4});
    for (int i = 0; i <= 200; ++i) {
        const double x = 0.01 + (30 - 0.01) * i / 200;
        CHECK(std::abs(ip(x) - f(x)) < 1e-8);
    }
    CHECK(ip.error_estimate() < 1e-8);
    CHECK(ip(1e6) == doctest::Approx(f(30)));
}

TEST_CASE("verification report") {
    VerifyOptions opt;
    opt.samples = 20000;
    opt.seed = 4;
    opt.threads = 1;
    const VerificationReport r = verify({1, 4}, opt);
    CHECK(r.sample_count == 20000);
    CHECK(r.ks.size() == 4);
    CHECK(r.identity_pass);
    CHECK(r.u_bounds_pass);
    for (const auto& k : r.ks) {
        CHECK(k.critical == doctest::Approx(ks_critical(20000)));
        CHECK(k.pass == (k.distance < k.critical));
    }
    for (const auto& m : r.moments) CHECK(m.se > 0);
    const auto j = nlohmann::json::parse(to_json(r));
    CHECK(j["samples"] == 20000);
    CHECK(j["pass"].get<bool>() == r.pass());
}
