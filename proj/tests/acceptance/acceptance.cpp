#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gvx/angle.hpp"
#include "gvx/coeffs.hpp"
#include "gvx/errors.hpp"
#include "gvx/oracle.hpp"
#include "gvx/sumsq.hpp"
#include "gvx/variance.hpp"

using namespace gvx;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Least-squares slope of log|y_k| against log k for k in [lo, hi].
double loglog_slope(const std::function<double(int)>& log_y, int lo, int hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = lo; k <= hi; ++k, ++m) {
        const double x = std::log(static_cast<double>(k));
        const double y = log_y(k);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

const double kPi = std::acos(-1.0);
const double kReference = 0.98530379;

void reference_value() {
    const std::string cmd = std::string(GVX_TOOL) + " cdf --dist s --alpha 1 --n 10 --at 2 --method thm41";
    const auto t0 = Clock::now();
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[1024];
    for (std::size_t got; p && (got = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, got);
    const int status = p ? pclose(p) : -1;
    const double secs = since(t0);
    double value = NAN;
    try {
        value = nlohmann::json::parse(out)["cdf"].get<double>();
    } catch (const std::exception&) {
    }
    const double err = std::abs(value - kReference);
    report(1, "reference value", status == 0 && err <= 1e-8 && secs < 1.0,
           fmt("cdf=%.12f |err|=%.2e (tol 1e-8) runtime %.2f s (limit 1 s)", value, err, secs));
}

void cross_route() {
    try {
        SampleVarianceModel m({1, 10}, EvalConfig{});
        const auto r = m.cdf(4.0, Representation::truncated);
        const double err = std::abs(r.value - kReference);
        report(2, "truncated-moment cross-check", err <= 1e-7, fmt("cdf=%.12f |err|=%.2e (tol 1e-7)", r.value, err));
    } catch (const std::exception& e) {
        report(2, "truncated-moment cross-check", false, e.what());
    }
}

void concordance() {
    const auto t0 = Clock::now();
    double worst_main = 0, worst_fourier = 0;
    std::string failing_fourier;
    bool ok = true;
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
        for (int n : {2, 3, 5, 10}) {
            EvalConfig cfg;
            cfg.tol = 1e-10;
            cfg.legendre_kmax = 60;
            SumSquaresModel m({a, n}, cfg);
            double wf = 0;
            for (int i = 1; i <= 9; ++i) {
                const double q = i / 10.0;
                double lo = 0, hi = 1;
                while (m.cdf(hi, Representation::mixture).value < q) hi *= 2;
                for (int it = 0; it < 50; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (m.cdf(mid, Representation::mixture).value < q ? lo : hi) = mid;
                }
                const double r = 0.5 * (lo + hi);
                try {
                    const double pw = m.cdf(r, Representation::power).value;
                    const double mx = m.cdf(r, Representation::mixture).value;
                    const double le = m.cdf(r, Representation::legendre).value;
                    const double fo = m.cdf(r, Representation::fourier).value;
                    worst_main = std::max({worst_main, std::abs(pw - mx), std::abs(pw - le), std::abs(mx - le)});
                    wf = std::max({wf, std::abs(fo - pw), std::abs(fo - mx)});
                } catch (const std::exception& e) {
                    ok = false;
                    std::printf("  (%g,%d) r=%g: %s\n", a, n, r, e.what());
                }
            }
            worst_fourier = std::max(worst_fourier, wf);
            if (wf > 1e-5) failing_fourier += fmt(" (%g,%g)", a, n);
        }
    }
    const double secs = since(t0);
    const bool pass = ok && worst_main <= 1e-7 && worst_fourier <= 1e-5 && secs < 30;
    std::string detail = fmt("power/mixture/Legendre max diff %.2e (tol 1e-7), Fourier max diff %.2e (tol 1e-5), "
                             "runtime %.1f s (limit 30 s)",
                             worst_main, worst_fourier, secs);
    if (!failing_fourier.empty()) detail += "; Fourier outside 1e-5 at" + failing_fourier;
    report(3, "representation concordance", pass, detail);
}

void anchors() {
    bool ok = true;
    double e_mu = 0, e_lam = 0, e_a = 0, e_w = 0;
    const MomentTable t = build_moments({1, 2}, 0);
    e_mu = std::abs(to_double(t.mu()[0]) / (kPi / 2) - 1);
    ok = ok && e_mu <= 1e-15;
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
        for (int n = 1; n <= 12; ++n) {
            const MomentTable m = build_moments({a, n}, 0);
            const double mu0 = to_double(pow(m.mu()[0], 1 / Real(a * n)));
            e_lam = std::max(e_lam, std::abs(lambda_star({a, n}) / mu0 - 1));
        }
    }
    ok = ok && e_lam <= 1e-13;
    for (int n = 2; n <= 12; ++n) {
        const double b = std::pow(kPi, (n - 1) / 2.0) / std::tgamma((n + 1) / 2.0);
        const AngleCoefficients c = solve_angle_coeffs({1, n});
        e_a = std::max(e_a, std::abs(to_double(c.a[0]) / ((n - 1) * b) - 1));
        const double lead = std::tgamma(n) / std::pow(n, n / 2.0) * b;
        for (int i = 0; i <= 50; ++i) {
            const double tt = tan_phi_n(n) * i / 50;
            const double want = lead * std::pow(tt, n - 1);
            e_w = std::max(e_w, std::abs(tan_cdf(c, tt) - want) / std::max(want, 1e-300));
        }
    }
    ok = ok && e_a <= 1e-12 && e_w <= 1e-12;
    report(4, "closed-form anchors", ok,
           fmt("mu_{1,2,0}/(pi/2)-1 = %.1e; lambda* rel %.1e (tol 1e-13); a_{1,n,0} rel %.1e (tol 1e-12); W_{1,n} rel "
               "%.1e (tol 1e-12)",
               e_mu, e_lam, e_a, e_w));
}

void normalization() {
    bool ok = true;
    double worst = 0;
    int maxK = 0;
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
        for (int n : {3, 5, 10}) {
            try {
                SumSquaresModel m({a, n}, EvalConfig{});
                const auto w = m.weights();
                bool nonneg = true;
                for (const Real& v : w->weight) nonneg = nonneg && v >= 0;
                const double def = to_double(w->deficit.back());
                worst = std::max(worst, def);
                maxK = std::max(maxK, static_cast<int>(w->weight.size()) - 1);
                if (!nonneg || def >= 1e-8 || !w->certified) {
                    ok = false;
                    std::printf("  (%g,%d): deficit %.2e nonneg %d\n", a, n, def, nonneg);
                }
            } catch (const std::exception& e) {
                ok = false;
                std::printf("  (%g,%d): %s\n", a, n, e.what());
            }
        }
    }
    int dbar_sets = 0, min_resolved = 101;
    bool dbar_ok = true;
    for (double a : {1.0, 2.0, 3.0}) {
        for (int n : {3, 5}) {
            try {
                const MomentTable t = build_moments({a, n}, 2000);
                const AngleCoefficients c = solve_angle_coeffs({a, n});
                const TruncatedMoments tm = truncated_moments(c, t, 100);
                const auto w = truncated_mixture_weights(tm, {a, n}, sqrt(Real(n * (n - 1))), 100);
                // Resolved weights must be nonnegative; the rest may not sit below their rounding bound.
                for (int k = 0; k <= 100; ++k) {
                    dbar_ok = dbar_ok && w.weight[k] + w.err_bound[k] >= 0;
                    if (k < w.resolved) dbar_ok = dbar_ok && w.weight[k] >= 0;
                }
                dbar_ok = dbar_ok && w.resolved >= 40;
                min_resolved = std::min(min_resolved, w.resolved);
                ++dbar_sets;
            } catch (const std::exception& e) {
                dbar_ok = false;
                std::printf("  Dbar (%g,%d): %s\n", a, n, e.what());
            }
        }
    }
    report(5, "mixture normalization", ok && dbar_ok,
           fmt("max deficit %.2e (tol 1e-8) up to K=%g, weights nonnegative at sqrt(n); Dbar weights at sqrt(n(n-1)) on "
               "%g sets (at least %g resolved of 101) ",
               worst, maxK, dbar_sets, min_resolved) +
               (dbar_ok ? "nonnegative" : "not all nonnegative"));
}

void monte_carlo() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    const ModelParams sets[] = {{0.5, 5}, {1, 10}, {2, 4}, {3, 3}};
    for (const auto& p : sets) {
        VerifyOptions opt;
        opt.samples = 1000000;
        opt.seed = 1;
        try {
            const VerificationReport r = verify(p, opt);
            detail += fmt(" (%g,%g)", p.alpha, p.n);
            for (const auto& k : r.ks) {
                detail += " " + to_string(k.statistic) + fmt("=%.2e", k.distance);
                ok = ok && k.distance < ks_critical(1000000);
            }
            detail += ";";
        } catch (const std::exception& e) {
            ok = false;
            detail += fmt(" (%g,%g) error: ", p.alpha, p.n) + e.what() + ";";
        }
    }
    const double secs = since(t0);
    report(6, "Monte Carlo KS suite", ok && secs < 60,
           fmt("critical %.2e;", ks_critical(1000000)) + detail + fmt(" runtime %.1f s (limit 60 s)", secs));
}

void decay() {
    const int K = 2000;
    double worst_g = 0;
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
        for (int n : {2, 3, 5, 10}) {
            const MomentTable t = build_moments({a, n}, K);
            const double s = loglog_slope([&](int k) { return t.log_gamma_moment(k); }, K / 2, K);
            worst_g = std::max(worst_g, std::abs(s + (n - 1) / 2.0));
        }
    }
    // Outer terms of the double series: envelope over a log-spaced z grid.
    const int J = 400;
    double worst_o = 0;
    std::string outer;
    EvalConfig cfg;
    cfg.tol = 1e-12;
    for (double a : {0.5, 1.0, 2.0}) {
        for (int n : {3, 5}) {
            try {
                const MomentTable t = build_moments({a, n}, 2 * J + 400);
                std::vector<double> sup(J + 1, 0.0);
                for (int e = -24; e <= 8; ++e) {
                    const auto terms = svar_outer_terms(t, std::pow(10.0, e / 4.0), J, cfg);
                    for (int j = 0; j <= J; ++j) sup[j] = std::max(sup[j], std::abs(terms[j]));
                }
                const double s = loglog_slope([&](int j) { return std::log(sup[j]); }, J / 10, J);
                worst_o = std::max(worst_o, std::abs(s + (n + 1) / 2.0));
                outer += fmt(" (%g,%g) %.3f", a, n, s);
            } catch (const std::exception& e) {
                worst_o = INFINITY;
                outer += fmt(" (%g,%g) error: ", a, n) + e.what();
            }
        }
    }
    report(7, "decay laws", worst_g <= 0.15 && worst_o <= 0.25,
           fmt("gamma_k slope max |dev| %.3f over k in [%g, %g] (tol 0.15); outer-term slope max |dev| %.3f (tol 0.25):",
               worst_g, K / 2, K, worst_o) +
               outer);
}

void identities() {
    double worst = 0;
    bool bounds = true;
    const ModelParams sets[] = {{0.5, 5}, {1, 10}, {2, 4}, {3, 3}};
    for (const auto& p : sets) {
        const SampleMatrix s = sample_rows(p, 1000000, 1);
        worst = std::max(worst, identity_violation(s));
        bounds = bounds && u_bounds_hold(s);
    }
    double qd = 0;
    EvalConfig cfg;
    cfg.tol = 1e-12;
    for (double a : {0.5, 1.0, 2.0}) {
        for (double r : {0.5, 1.5, 3.0}) qd = std::max(qd, std::abs(quad_cdf_n2(a, r) - cdf_sumsq({a, 2}, r, cfg).value));
    }
    report(8, "oracle identities", worst <= 1e-12 && bounds && qd <= 1e-9,
           fmt("identity max rel %.1e (tol 1e-12) over 4x10^6 rows; n=2 quadrature max diff %.1e at 3 radii (tol 1e-9)",
               worst, qd) +
               (bounds ? "; U bounds hold" : "; U bounds violated"));
}

}  // namespace

int main() {
    reference_value();
    cross_route();
    concordance();
    anchors();
    normalization();
    monte_carlo();
    decay();
    identities();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
