#include <cmath>
#include <vector>

#include "doctest.h"

#include "gvx/angle.hpp"
#include "gvx/errors.hpp"

using namespace gvx;

namespace {

const double kPi = std::acos(-1.0);

// Volume of the unit ball in m dimensions.
double ball(int m) { return std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0 + 1); }

}  // namespace

TEST_CASE("exponential parent has one coefficient") {
    for (int n = 2; n <= 12; ++n) {
        const AngleCoefficients c = solve_angle_coeffs({1, n});
        REQUIRE(c.a.size() == 1);
        CHECK(c.N == 0);
        const double want = (n - 1) * ball(n - 1);
        CHECK(std::abs(to_double(c.a[0]) / want - 1) < 1e-12);
        CHECK(std::abs(to_double(c.a[0]) / ((n - 1) * std::pow(kPi, (n - 1) / 2.0) / std::tgamma((n + 1) / 2.0)) - 1) <
              1e-12);
        double fact = std::tgamma(n);
        for (double t : {0.0, 0.1, 0.5 * tan_phi_n(n), tan_phi_n(n)}) {
            const double w = fact / std::pow(n, n / 2.0) * ball(n - 1) * std::pow(t, n - 1);
            CHECK(std::abs(tan_cdf(c, t) - w) <= 1e-12 * std::max(w, 1e-300));
        }
    }
    const AngleCoefficients two = solve_angle_coeffs({1, 2});
    CHECK(to_double(two.a[0]) == doctest::Approx(2.0).epsilon(1e-14));
    for (double t : {0.0, 0.3, 0.7, 1.0}) {
        CHECK(tan_cdf(two, t) == doctest::Approx(t).epsilon(1e-14));
        CHECK(tan_pdf(two, t) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const AngleCoefficients ten = solve_angle_coeffs({1, 10});
    const double b9 = std::pow(kPi, 4.5) / std::tgamma(5.5);
    CHECK(tan_cdf(ten, 1.0 / 3) == doctest::Approx(362880.0 / 1e5 * b9 * std::pow(1.0 / 3, 9)).epsilon(1e-12));
}

TEST_CASE("gamma(3) pairs against the beta form") {
    const AngleCoefficients c = solve_angle_coeffs({3, 2});
    CHECK(c.N == 2);
    CHECK(c.a.size() == 3);
    CHECK(tan_cdf(c, 0.25) == doctest::Approx(0.4495849609375).epsilon(1e-12));
    CHECK(tan_cdf(c, 0.5) == doctest::Approx(0.79296875).epsilon(1e-12));
    CHECK(tan_cdf(c, 0.75) == doctest::Approx(0.9678955078125).epsilon(1e-12));
    CHECK(tan_cdf(c, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density, monotonicity and the solve residual") {
    for (double a : {1.0, 2.0, 3.0, 4.0}) {
        for (int n : {2, 3, 5, 8}) {
            AngleCoefficients c;
            try {
                c = solve_angle_coeffs({a, n});
            } catch (const ConditioningError&) {
                CHECK_MESSAGE(a * n >= 20, "alpha=" << a << " n=" << n);
                continue;
            }
            CHECK(c.residual < 1e-10);
            CHECK(c.N == static_cast<int>(std::floor((a - 1) * n / 2)));
            const double W = to_double(c.W_at_phi_n);
            CHECK(W >= 0);
            CHECK(W <= 1 + 1e-12);
            const double tn = tan_phi_n(n);
            const int steps = 1000;
            double prev = 0, integral = 0;
            bool ok = true;
            for (int i = 0; i <= steps; ++i) {
                const double t = tn * i / steps;
                const double w = tan_pdf(c, t);
                const double Wt = tan_cdf(c, t);
                ok = ok && w >= 0 && Wt >= prev - 1e-15 && Wt <= 1 + 1e-12;
                prev = Wt;
                const double s = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
                integral += s * w;
            }
            integral *= tn / steps / 3;
            CHECK_MESSAGE(ok, "alpha=" << a << " n=" << n);
            CHECK(integral == doctest::Approx(W).epsilon(1e-8));
            CHECK(tan_cdf(c, 0.0) == 0.0);
            CHECK_THROWS_AS(tan_cdf(c, tn * 1.01), DomainError);
        }
    }
    CHECK_THROWS_AS(solve_angle_coeffs({1.5, 3}), DomainError);
}

TEST_CASE("truncated moments for exponential triples") {
    const MomentTable t = build_moments({1, 3}, 400);
    const AngleCoefficients c = solve_angle_coeffs({1, 3});
    const auto gen = truncated_cos_moments(c, t, 400);
    const auto exp1 = truncated_cos_moments_exponential(t, 400);
    const double gbar[] = {0.16081527494727825919, 0.1205322502129171285, 0.090803584713204636203,
                           0.068732634799936683793};
    const double gam[] = {0.60459978807807261686, 0.52359877559829887308, 0.4581333823325245454,
                          0.40462140595442147094};
    for (int k = 0; k < 4; ++k) {
        CHECK(to_double(gen[k]) == doctest::Approx(gbar[k]).epsilon(1e-13));
        CHECK(to_double(t.gamma()[k]) == doctest::Approx(gam[k]).epsilon(1e-14));
    }
    CHECK(to_double(t.gamma()[1]) == doctest::Approx(kPi / 6).epsilon(1e-15));
    for (int k = 0; k <= 400; ++k) {
        CHECK(to_double(abs(gen[k] - exp1[k])) <= 1e-12 * to_double(exp1[k]));
        CHECK(gen[k] >= 0);
        CHECK(gen[k] <= t.gamma()[k]);
    }
    const auto M = truncated_cot_moments(gen, {1, 3}, 2, 1e-14);
    CHECK(to_double(M[0]) == doctest::Approx(0.59170575568544749051).epsilon(1e-12));
    CHECK(to_double(M[1]) == doctest::Approx(0.70919957615614523373).epsilon(1e-12));
    CHECK(to_double(M[2]) == doctest::Approx(0.86587502458133000994).epsilon(1e-12));
}

TEST_CASE("truncated moments, general integer alpha") {
    for (double a : {2.0, 3.0}) {
        for (int n : {2, 3, 4}) {
            const MomentTable t = build_moments({a, n}, 200);
            const AngleCoefficients c = solve_angle_coeffs({a, n});
            const auto g = truncated_cos_moments(c, t, 60);
            for (int k = 0; k <= 60; ++k) {
                CHECK(g[k] >= 0);
                CHECK(g[k] <= t.gamma()[k] * (1 + 1e-12));
                if (n == 2) CHECK(to_double(g[k]) <= 1e-12);
            }
            if (n == 2) {
                for (const Real& m : truncated_cot_moments(g, {a, n}, 5, 1e-12)) CHECK(m == 0);
            }
        }
    }
}
