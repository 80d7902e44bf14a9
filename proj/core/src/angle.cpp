#include "gvx/angle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/constants/constants.hpp>

#include "detail.hpp"
#include "gvx/errors.hpp"
#include "gvx/specfun.hpp"

namespace gvx {

namespace {

using Matrix = std::vector<std::vector<Real>>;

Real lgam(const Real& x) { return specfun::log_gamma(x); }

struct LU {
    Matrix m;
    std::vector<int> piv;
};

LU lu_factor(Matrix a) {
    const int n = static_cast<int>(a.size());
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (abs(a[i][k]) > abs(a[p][k])) p = i;
        if (a[p][k] == 0) throw ConditioningError("angle system is singular");
        std::swap(a[p], a[k]);
        std::swap(piv[p], piv[k]);
        for (int i = k + 1; i < n; ++i) {
            a[i][k] /= a[k][k];
            for (int j = k + 1; j < n; ++j) a[i][j] -= a[i][k] * a[k][j];
        }
    }
    return {std::move(a), std::move(piv)};
}

std::vector<Real> lu_solve(const LU& f, const std::vector<Real>& b) {
    const int n = static_cast<int>(b.size());
    std::vector<Real> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[f.piv[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.m[i][j] * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= f.m[i][j] * x[j];
        x[i] /= f.m[i][i];
    }
    return x;
}

Real norm1(const Matrix& a) {
    Real best = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        Real s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += abs(a[i][j]);
        best = std::max(best, s);
    }
    return best;
}

void require_integer_alpha(const ModelParams& p) {
    p.validate(2);
    if (!p.integer_alpha()) throw DomainError("the polynomial tan(Phi) cdf needs a positive integer alpha");
}

}  // namespace

double tan_phi_n(int n) { return 1.0 / std::sqrt(static_cast<double>(n - 1)); }

AngleCoefficients solve_angle_coeffs(const ModelParams& p) {
    require_integer_alpha(p);
    const int alpha = static_cast<int>(p.alpha);
    const int n = p.n;
    const int N = ((alpha - 1) * n) / 2;
    if (N + 1 > 60) throw DomainError("angle system of size " + std::to_string(N + 1) + " exceeds 60; reduce alpha n");
    const bool odd = alpha % 2 == 1;
    const int beta = odd ? (alpha - 1) / 2 : alpha / 2;
    const Real half = Real(1) / 2;
    const Real bn = Real(beta) * n;

    // Sigma_(m) as an n-fold convolution.
    std::vector<Real> e(N + 1);
    for (int m = 0; m <= N; ++m) {
        const Real lf = odd ? lgam(Real(2 * m + 1)) : lgam(Real(2 * m + 2));
        e[m] = exp(lgam(half + beta + m) - lf);
    }
    const std::vector<Real> sig = convolution_power(e, n, N);

    // Scaled system: row m divided by Gamma(1/2 + beta n + m), column j by
    // Gamma((n-1)/2 + j).
    Matrix A(N + 1, std::vector<Real>(N + 1));
    std::vector<Real> rhs(N + 1);
    std::vector<Real> row_scale(N + 1), col_scale(N + 1);
    for (int m = 0; m <= N; ++m) row_scale[m] = lgam(half + bn + m);
    for (int j = 0; j <= N; ++j) col_scale[j] = lgam(Real(n - 1) / 2 + j);
    for (int m = 0; m <= N; ++m) {
        for (int j = 0; j <= N; ++j) A[m][j] = exp(lgam(half + bn + m - j) - row_scale[m]);
        Real lr;
        if (odd)
            lr = log(Real(2)) + lgam(Real(2 * m + 1)) - m * log(Real(n));
        else
            lr = log(Real(2)) + lgam(Real(2 * m + n + 1)) - (m + Real(n) / 2) * log(Real(n));
        rhs[m] = exp(lr - row_scale[m]) * sig[m];
    }

    const LU f = lu_factor(A);
    std::vector<Real> x = lu_solve(f, rhs);
    // Iterative refinement on the scaled system.
    Real bnorm = 0;
    for (const auto& v : rhs) bnorm = std::max(bnorm, abs(v));
    Real rel = 0;
    for (int it = 0; it < 5; ++it) {
        std::vector<Real> res(N + 1);
        Real rn = 0;
        for (int m = 0; m <= N; ++m) {
            Real s = rhs[m];
            for (int j = 0; j <= N; ++j) s -= A[m][j] * x[j];
            res[m] = s;
            rn = std::max(rn, abs(s));
        }
        rel = rn / bnorm;
        if (rel < Real(1e-90)) break;
        const std::vector<Real> d = lu_solve(f, res);
        for (int j = 0; j <= N; ++j) x[j] += d[j];
    }

    // Condition number via the explicit inverse.
    Matrix inv(N + 1, std::vector<Real>(N + 1));
    for (int j = 0; j <= N; ++j) {
        std::vector<Real> unit(N + 1, Real(0));
        unit[j] = 1;
        const std::vector<Real> col = lu_solve(f, unit);
        for (int i = 0; i <= N; ++i) inv[i][j] = col[i];
    }
    AngleCoefficients out;
    out.params = p;
    out.N = N;
    out.cond_estimate = to_double(norm1(A) * norm1(inv));
    if (out.cond_estimate > 1e12)
        throw ConditioningError("angle system condition estimate " + std::to_string(out.cond_estimate) +
                                " exceeds 1e12; use smaller alpha n");
    out.a.resize(N + 1);
    for (int j = 0; j <= N; ++j) out.a[j] = x[j] / exp(col_scale[j]);

    // Residual of the unscaled equations.
    Real rmax = 0, bmax = 0;
    for (int m = 0; m <= N; ++m) {
        Real s = 0;
        for (int j = 0; j <= N; ++j) s += exp(lgam(half + bn + m - j) + col_scale[j]) * out.a[j];
        const Real b = rhs[m] * exp(row_scale[m]);
        rmax = std::max(rmax, abs(s - b));
        bmax = std::max(bmax, abs(b));
    }
    out.residual = to_double(rmax / bmax);

    const Real an = Real(p.alpha) * n;
    out.norm = exp(lgam(an) - n * lgam(Real(p.alpha)) - an / 2 * log(Real(n)));
    out.W_at_phi_n = tan_cdf(out, Real(1) / sqrt(Real(n - 1)));

    // The density must stay nonnegative on the interval.
    const double tmax = tan_phi_n(n);
    double wmax = 0, wmin = 0;
    for (int i = 0; i <= 200; ++i) {
        const double w = tan_pdf(out, tmax * i / 200.0);
        wmax = std::max(wmax, w);
        wmin = std::min(wmin, w);
    }
    if (wmin < -1e-10 * wmax) throw ConditioningError("negative tan(Phi) density: the angle solve failed");
    return out;
}

Real tan_cdf(const AngleCoefficients& c, const Real& t) {
    const int n = c.params.n;
    if (!(t >= 0) || t > Real(1) / sqrt(Real(n - 1)) * (1 + Real(1e-14)))
        throw DomainError("t must lie in [0, (n-1)^{-1/2}]");
    if (t == 0) return Real(0);
    Real s = 0;
    Real tp = pow(t, n - 1);
    const Real t2 = t * t;
    for (int j = 0; j <= c.N; ++j) {
        s += c.a[j] * tp / (n - 1 + 2 * j);
        tp *= t2;
    }
    return c.norm * s;
}

double tan_cdf(const AngleCoefficients& c, double t) { return to_double(tan_cdf(c, Real(t))); }

double tan_pdf(const AngleCoefficients& c, double t) {
    const int n = c.params.n;
    if (!(t >= 0) || t > tan_phi_n(n) * (1 + 1e-14)) throw DomainError("t must lie in [0, (n-1)^{-1/2}]");
    const Real tt = t;
    Real s = 0, mag = 0;
    Real tp = n >= 2 ? pow(tt, n - 2) : Real(1);
    const Real t2 = tt * tt;
    for (int j = 0; j <= c.N; ++j) {
        s += c.a[j] * tp;
        mag += abs(c.a[j] * tp);
        tp *= t2;
    }
    // The density vanishes at the right end for n = 2; drop rounding noise there.
    if (s < 0 && -s <= 1e-80 * mag) return 0.0;
    return to_double(c.norm * s);
}

namespace {

// B(a, b0 + i; x) for i = 0..count-1 by the upward recurrence
// B(a, b+1; x) = (b B(a, b; x) + x^a (1-x)^b) / (a + b), all terms positive.
std::vector<Real> beta_chain(const Real& a, const Real& b0, const Real& x, int count) {
    std::vector<Real> out(std::max(count, 0));
    if (count <= 0) return out;
    out[0] = specfun::incomplete_beta(a, b0, x);
    Real front = exp(a * log(x) + b0 * log(1 - x));
    Real b = b0;
    for (int i = 1; i < count; ++i) {
        out[i] = (b * out[i - 1] + front) / (a + b);
        front *= (1 - x);
        b += 1;
    }
    return out;
}

// B(a, b0 + k/2; x) for k = 0..kmax.
std::vector<Real> beta_half_steps(const Real& a, const Real& b0, const Real& x, int kmax) {
    const int even = kmax / 2 + 1;
    const int odd = (kmax + 1) / 2;
    const std::vector<Real> be = beta_chain(a, b0, x, even);
    const std::vector<Real> bo = beta_chain(a, b0 + Real(1) / 2, x, odd);
    std::vector<Real> out(kmax + 1);
    for (int k = 0; k <= kmax; ++k) out[k] = (k % 2 == 0) ? be[k / 2] : bo[k / 2];
    return out;
}

std::vector<Real> finish_gbar(const MomentTable& table, std::vector<Real> cone, int kmax) {
    std::vector<Real> out(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        Real v = table.gamma()[k] - cone[k];
        if (v < 0) {
            if (v < Real(-1e-13))
                throw CancellationAlarm("truncated cos moment " + std::to_string(k) + " is negative");
            v = 0;
        }
        out[k] = v;
    }
    return out;
}

}  // namespace

std::vector<Real> truncated_cos_moments(const AngleCoefficients& c, const MomentTable& table, int kmax) {
    const ModelParams& p = c.params;
    if (table.params().alpha != p.alpha || table.params().n != p.n)
        throw DomainError("moment table and angle coefficients describe different models");
    if (kmax > table.K()) throw BudgetExceeded("truncated_cos_moments: moment table too short", kmax);
    const int n = p.n;
    if (n == 2) return std::vector<Real>(kmax + 1, Real(0));
    const Real x = Real(1) / n;
    const int am1n = (static_cast<int>(p.alpha) - 1) * n;
    std::vector<Real> cone(kmax + 1, Real(0));
    for (int j = 0; j <= c.N; ++j) {
        const Real a = Real(n - 1) / 2 + j;
        const Real b0 = Real(am1n + 1) / 2 - j;
        const std::vector<Real> b = beta_half_steps(a, b0, x, kmax);
        for (int k = 0; k <= kmax; ++k) cone[k] += c.a[j] * b[k];
    }
    for (auto& v : cone) v *= c.norm / 2;
    return finish_gbar(table, std::move(cone), kmax);
}

std::vector<Real> truncated_cos_moments_exponential(const MomentTable& table, int kmax) {
    const ModelParams& p = table.params();
    if (p.alpha != 1.0) throw DomainError("closed-form truncated moments need alpha = 1");
    p.validate(2);
    if (kmax > table.K()) throw BudgetExceeded("truncated_cos_moments: moment table too short", kmax);
    const int n = p.n;
    if (n == 2) return std::vector<Real>(kmax + 1, Real(0));
    const Real pi = boost::math::constants::pi<Real>();
    const Real half_nm1 = Real(n - 1) / 2;
    const Real lead =
        exp(lgam(Real(n)) - Real(n) / 2 * log(Real(n)) + half_nm1 * log(pi) - lgam(half_nm1));
    const std::vector<Real> b = beta_half_steps(half_nm1, Real(1) / 2, Real(1) / n, kmax);
    std::vector<Real> cone(kmax + 1);
    for (int k = 0; k <= kmax; ++k) cone[k] = lead * b[k];
    return finish_gbar(table, std::move(cone), kmax);
}

CotMoments truncated_cot_moments(const std::vector<Real>& gbar, const std::vector<Real>& gbar_err,
                                 const ModelParams& p, int kmax, double rel_tol) {
    p.validate(2);
    if (kmax < 0) throw DomainError("kmax must be nonnegative");
    if (gbar_err.size() != gbar.size()) throw DomainError("gbar and its errors differ in length");
    CotMoments out;
    out.value.assign(kmax + 1, Real(0));
    out.err.assign(kmax + 1, Real(0));
    if (p.n == 2) return out;
    const int avail = static_cast<int>(gbar.size()) - 1;
    if (avail < kmax) throw BudgetExceeded("truncated_cot_moments: gbar shorter than kmax", kmax);
    const Real shrink = Real(p.n - 1) / p.n;
    const Real an = Real(p.alpha) * p.n;
    const Real tol = rel_tol;
    for (int k = 0; k <= kmax; ++k) {
        const Real h = (an + k) / 2;
        Real binom = 1;  // C(h + j - 1, j)
        Real sum = 0;
        Real noise = 0;
        Real term = 0;
        Real tail = 0;
        bool done = false;
        int j = 0;
        for (; k + 2 * j <= avail; ++j) {
            term = binom * gbar[k + 2 * j];
            sum += term;
            noise += binom * gbar_err[k + 2 * j];
            const Real rho = (h + j) / (j + 1) * shrink;
            if (rho < 1) {
                tail = term * rho / (1 - rho);
                if (tail <= tol * sum || tail <= noise) {
                    done = true;
                    break;
                }
            }
            binom *= (h + j) / (j + 1);
        }
        if (!done) {
            if (sum == 0 && term == 0) continue;
            // Continue the bound to estimate how far the series must run.
            Real t = term;
            int jj = j;
            for (; jj < 1000000; ++jj) {
                const Real rho = (h + jj) / (jj + 1) * shrink;
                if (rho < 1 && (t * rho / (1 - rho) <= tol * sum || t * rho / (1 - rho) <= noise)) break;
                t *= rho;
            }
            throw BudgetExceeded("truncated_cot_moments: truncated cos moments too short",
                                 static_cast<std::size_t>(kmax + 2 * jj + 16));
        }
        out.value[k] = sum;
        out.err[k] = tail + noise;
    }
    return out;
}

std::vector<Real> truncated_cot_moments(const std::vector<Real>& gbar, const ModelParams& p, int kmax,
                                        double rel_tol) {
    return truncated_cot_moments(gbar, std::vector<Real>(gbar.size(), Real(0)), p, kmax, rel_tol).value;
}

}  // namespace gvx
