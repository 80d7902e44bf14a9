#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"

#include "gvx/coeffs.hpp"
#include "gvx/errors.hpp"

using namespace gvx;

namespace {

const double kPi = std::acos(-1.0);

// |beta_{alpha,n,k}| by enumerating all compositions k = k_1 + ... + k_n.
double beta_brute(double alpha, int n, int k) {
    double total = 0.0;
    std::vector<int> parts(n);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            parts[i] = left;
            double prod = 1.0;
            for (int kk : parts) prod *= std::tgamma((alpha + kk) / 2) / std::tgamma(kk + 1.0);
            total += prod;
            return;
        }
        for (int v = 0; v <= left; ++v) {
            parts[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, k);
    return total / std::pow(2 * std::tgamma(alpha), n);
}

}  // namespace

TEST_CASE("beta coefficients") {
    for (double a : {0.5, 1.0, 2.5}) {
        for (int n : {1, 2, 5}) {
            const auto b = build_beta({a, n}, 6);
            CHECK(to_double(b[0]) == doctest::Approx(std::pow(std::tgamma(a / 2) / (2 * std::tgamma(a)), n)).epsilon(1e-13));
            for (int k = 0; k <= 6; ++k) CHECK(to_double(b[k]) == doctest::Approx(beta_brute(a, n, k)).epsilon(1e-12));
        }
    }
    const auto b1 = build_beta({1.7, 1}, 30);
    for (int k = 0; k <= 30; ++k)
        CHECK(to_double(b1[k]) ==
              doctest::Approx(std::tgamma((1.7 + k) / 2) / (2 * std::tgamma(1.7) * std::tgamma(k + 1.0))).epsilon(1e-12));
    CHECK(to_double(build_beta({1, 2}, 2)[2]) == doctest::Approx((1 + kPi / 2) / 4).epsilon(1e-15));
    CHECK_THROWS_AS(build_beta({1, 2}, kMaxMomentOrder + 1), BudgetExceeded);
    CHECK_THROWS_AS(build_beta({0, 2}, 4), DomainError);
}

TEST_CASE("convolution power matches repeated convolution") {
    std::vector<Real> c{Real(1), Real(0.5), Real(-0.25), Real(2), Real(0.125)};
    std::vector<Real> ref = c;
    for (int p = 2; p <= 7; ++p) {
        std::vector<Real> next(5, Real(0));
        for (int k = 0; k < 5; ++k)
            for (int i = 0; i <= k; ++i) next[k] += ref[i] * c[k - i];
        ref = next;
        const auto got = convolution_power(c, p, 4);
        for (int k = 0; k < 5; ++k) CHECK(to_double(abs(got[k] - ref[k])) < 1e-25 * std::max(1.0, to_double(abs(ref[k]))));
    }
}

TEST_CASE("moments of cos(Phi)") {
    const MomentTable one = build_moments({2.3, 1}, 20);
    for (int k = 0; k <= 20; ++k) CHECK(to_double(one.mu()[k]) == 1.0);

    const MomentTable t = build_moments({1, 2}, 4);
    CHECK(to_double(t.mu()[0]) == doctest::Approx(kPi / 2).epsilon(1e-15));
    // tan(Phi) is uniform on (0,1): mu_2 = 4 int_0^1 (1+t^2)^{-2} dt.
    CHECK(to_double(t.mu()[2]) == doctest::Approx(1 + kPi / 2).epsilon(1e-15));
    // gamma_1 = E cos^3 Phi = int_0^1 (1+t^2)^{-3/2} dt.
    CHECK(to_double(t.gamma()[1]) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

    SUBCASE("table invariants") {
        for (double a : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            for (int n = 1; n <= 12; ++n) {
                const MomentTable m = build_moments({a, n}, 400);
                bool ok = true;
                for (int k = 0; k <= 400; ++k) {
                    ok = ok && m.mu()[k] >= Real(1) * (1 - 1e-90) && m.gamma()[k] > 0 && m.gamma()[k] <= Real(1) * (1 + 1e-90);
                    if (k > 0) ok = ok && m.mu()[k] >= m.mu()[k - 1] * (1 - 1e-90) && m.gamma()[k] <= m.gamma()[k - 1] * (1 + 1e-90);
                    ok = ok && m.beta_sign(k) == (k % 2 ? -1 : 1);
                }
                CHECK_MESSAGE(ok, "alpha=" << a << " n=" << n);
            }
        }
    }
}

TEST_CASE("scaled moments and difference weights") {
    const MomentTable t = build_moments({1.5, 4}, 60);
    const auto id = scaled_moments(t, Real(1));
    for (int k = 0; k <= 60; ++k) CHECK(id[k] == t.mu()[k]);

    const Real lam0 = pow(t.mu()[0], 1 / Real(6));
    CHECK(to_double(scaled_moments(t, lam0)[0]) == doctest::Approx(1.0).epsilon(1e-15));

    const auto g = scaled_moments(t, sqrt(Real(4)));
    for (int k = 0; k <= 60; ++k) CHECK(to_double(abs(g[k] - t.gamma()[k])) < 1e-90);

    const DiffWeights d = diff_weights(g, 60);
    CHECK(d.delta[0] == g[0]);
    for (int k = 0; k <= 60; ++k) {
        CHECK(d.delta[k] > 0);
        CHECK(d.reliable(k));
    }
    // delta_1 = E cos^2 Phi (1 - cos Phi) = pi/4 - 1/sqrt(2) for alpha = 1, n = 2.
    const MomentTable e = build_moments({1, 2}, 4);
    const DiffWeights d2 = diff_weights(scaled_moments(e, sqrt(Real(2))), 4);
    CHECK(to_double(d2.delta[1]) == doctest::Approx(0.078291382210900785215).epsilon(1e-14));

    const MomentTable big = build_moments({3, 10}, 400);
    CHECK_THROWS_AS(diff_weights(scaled_moments(big, sqrt(Real(10))), 400), CancellationAlarm);
    const DiffWeights loose = diff_weights(scaled_moments(big, sqrt(Real(10))), 400, false);
    CHECK(loose.reliable(0));
    CHECK_FALSE(loose.reliable(400));
}

TEST_CASE("binomial mixture weights sum to one") {
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
        for (int n : {3, 5, 10}) {
            const MomentTable t = build_moments({a, n}, 400);
            const DiffWeights d = diff_weights(scaled_moments(t, sqrt(Real(n))), 400, false);
            Real sum = 0, coef = 1;
            int used = 0;
            for (int k = 0; k <= 400 && d.reliable(k); ++k, ++used) {
                if (k > 0) coef = coef * (Real(a * n) + k - 1) / k;
                CHECK(d.delta[k] >= -d.err_bound[k]);
                sum += coef * d.delta[k];
            }
            CHECK(sum <= Real(1) + 1e-30);
            const double deficit = to_double(1 - sum);
            if (used == 401) CHECK_MESSAGE(deficit < 1e-8, "alpha=" << a << " n=" << n << " deficit " << deficit);
        }
    }
}

TEST_CASE("lambda star and moments of U^2") {
    CHECK(lambda_star({1, 2}) == doctest::Approx(std::sqrt(kPi / 2)).epsilon(1e-14));
    CHECK(lambda_star({0.7, 1}) == doctest::Approx(1.0).epsilon(1e-14));
    for (double a : {0.5, 1.0, 3.0}) {
        for (int n : {2, 5, 10}) {
            const MomentTable t = build_moments({a, n}, 0);
            const double m0 = to_double(pow(t.mu()[0], 1 / Real(a * n)));
            CHECK(std::abs(lambda_star({a, n}) / m0 - 1) < 1e-13);
        }
    }
    CHECK(u2_moments({1.3, 4}, 5)[0] == 1.0);
    CHECK(u2_moments({1, 2}, 1)[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    for (double v : u2_moments({2.2, 1}, 8)) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    const auto u = u2_moments({0.5, 6}, 10);
    for (int k = 1; k <= 10; ++k) {
        CHECK(u[k] <= u[k - 1]);
        CHECK(u[k] >= std::pow(1.0 / 6, k) * (1 - 1e-12));
    }
}
