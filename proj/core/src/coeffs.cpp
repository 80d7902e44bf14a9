#include "gvx/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gvx/errors.hpp"
#include "gvx/specfun.hpp"

#include <boost/math/special_functions/gamma.hpp>

namespace gvx {

namespace {

// For nonnegative sequences, products more than kSkip e-folds below the
// largest product of the same order do not affect a 100-digit sum. Sequences
// with negative entries are summed in full.
constexpr double kSkip = (kRealDigits + 12) * 2.302585092994046;

std::vector<double> log_magnitudes(const std::vector<Real>& a, int K) {
    std::vector<double> la(K + 1);
    for (int i = 0; i <= K; ++i) {
        if (a[i] < 0) return std::vector<double>(K + 1, 0.0);
        la[i] = a[i] > 0 ? to_double(log(a[i])) : -std::numeric_limits<double>::infinity();
    }
    return la;
}

std::vector<Real> convolve(const std::vector<Real>& a, const std::vector<Real>& b, int K) {
    const std::vector<double> la = log_magnitudes(a, K);
    const std::vector<double> lb = log_magnitudes(b, K);
    std::vector<Real> c(K + 1, Real(0));
    Real::backend_type tmp;
    using boost::multiprecision::default_ops::eval_add;
    using boost::multiprecision::default_ops::eval_multiply;
    for (int k = 0; k <= K; ++k) {
        double top = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= k; ++i) top = std::max(top, la[i] + lb[k - i]);
        const double floor = top - kSkip;
        Real s = 0;
        for (int i = 0; i <= k; ++i) {
            if (la[i] + lb[k - i] < floor) continue;
            eval_multiply(tmp, a[i].backend(), b[k - i].backend());
            eval_add(s.backend(), tmp);
        }
        c[k] = s;
    }
    return c;
}

std::vector<Real> square(const std::vector<Real>& a, int K) {
    const std::vector<double> la = log_magnitudes(a, K);
    std::vector<Real> c(K + 1, Real(0));
    Real::backend_type tmp;
    using boost::multiprecision::default_ops::eval_add;
    using boost::multiprecision::default_ops::eval_multiply;
    for (int k = 0; k <= K; ++k) {
        double top = -std::numeric_limits<double>::infinity();
        for (int i = 0; 2 * i <= k; ++i) top = std::max(top, la[i] + la[k - i]);
        const double floor = top - kSkip;
        Real s = 0;
        for (int i = 0; 2 * i < k; ++i) {
            if (la[i] + la[k - i] < floor) continue;
            eval_multiply(tmp, a[i].backend(), a[k - i].backend());
            eval_add(s.backend(), tmp);
        }
        s *= 2;
        if (k % 2 == 0) s += a[k / 2] * a[k / 2];
        c[k] = s;
    }
    return c;
}

void check_order(int K) {
    if (K < 0) throw DomainError("moment order must be nonnegative");
    if (K > kMaxMomentOrder)
        throw BudgetExceeded("moment order " + std::to_string(K) + " exceeds budget " +
                                 std::to_string(kMaxMomentOrder),
                             static_cast<std::size_t>(K));
}

Real gamma_fn(const Real& x) { return boost::math::tgamma(x); }

}  // namespace

bool ModelParams::integer_alpha() const noexcept { return alpha >= 1 && std::floor(alpha) == alpha; }

void ModelParams::validate(int min_n) const {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("alpha must be a positive finite number");
    if (n < min_n) throw DomainError("n must be at least " + std::to_string(min_n));
}

MomentTable::MomentTable(ModelParams params, std::vector<Real> beta_abs, std::vector<Real> mu,
                         std::vector<Real> gamma)
    : params_(params), beta_abs_(std::move(beta_abs)), mu_(std::move(mu)), gamma_(std::move(gamma)) {}

double MomentTable::log_abs_beta(int k) const { return to_double(log(beta_abs_.at(k))); }
double MomentTable::log_mu(int k) const { return to_double(log(mu_.at(k))); }
double MomentTable::log_gamma_moment(int k) const { return to_double(log(gamma_.at(k))); }

std::vector<Real> convolution_power(const std::vector<Real>& c, int n, int K) {
    if (n < 1) throw DomainError("convolution power needs n >= 1");
    if (static_cast<int>(c.size()) < K + 1) throw DomainError("convolution_power: sequence too short");
    std::vector<Real> base(c.begin(), c.begin() + K + 1);
    std::vector<Real> result;
    bool have = false;
    int e = n;
    while (e > 0) {
        if (e & 1) {
            result = have ? convolve(result, base, K) : base;
            have = true;
        }
        e >>= 1;
        if (e > 0) base = square(base, K);
    }
    return result;
}

std::vector<Real> build_beta(const ModelParams& params, int K) {
    params.validate();
    check_order(K);
    const Real a = params.alpha;
    std::vector<Real> c(K + 1);
    c[0] = gamma_fn(a / 2);
    if (K >= 1) c[1] = gamma_fn((a + 1) / 2);
    for (int k = 0; k + 2 <= K; ++k) c[k + 2] = c[k] * ((a + k) / 2) / ((k + 1) * (k + 2));
    std::vector<Real> b = convolution_power(c, params.n, K);
    const Real scale = pow(2 * gamma_fn(a), -params.n);
    for (auto& v : b) v *= scale;
    return b;
}

MomentTable build_moments(const ModelParams& params, int K) {
    std::vector<Real> beta_abs = build_beta(params, K);
    const Real an = Real(params.alpha) * params.n;
    // q_k = k! / Gamma((an + k)/2)
    std::vector<Real> q(K + 1);
    q[0] = 1 / gamma_fn(an / 2);
    if (K >= 1) q[1] = 1 / gamma_fn((an + 1) / 2);
    for (int k = 0; k + 2 <= K; ++k) q[k + 2] = q[k] * ((k + 1) * (k + 2)) / ((an + k) / 2);
    const Real lead = 2 * gamma_fn(an);
    std::vector<Real> mu(K + 1), gam(K + 1);
    const Real sqrt_n = sqrt(Real(params.n));
    Real npow = pow(sqrt_n, -an);
    for (int k = 0; k <= K; ++k) {
        mu[k] = lead * q[k] * beta_abs[k];
        gam[k] = mu[k] * npow;
        npow /= sqrt_n;
    }
    if (params.n == 1) {
        // Phi is identically zero; remove rounding noise.
        std::fill(mu.begin(), mu.end(), Real(1));
        std::fill(gam.begin(), gam.end(), Real(1));
    }
    return MomentTable(params, std::move(beta_abs), std::move(mu), std::move(gam));
}

std::vector<Real> scaled_moments(const MomentTable& table, const Real& lambda) {
    if (!(lambda > 0)) throw DomainError("scaled_moments: lambda must be positive");
    const Real an = Real(table.params().alpha) * table.params().n;
    std::vector<Real> out(table.mu().size());
    Real f = pow(lambda, -an);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = table.mu()[k] * f;
        f /= lambda;
    }
    return out;
}

bool DiffWeights::reliable(int k) const {
    const Real floor = sqrt(std::numeric_limits<Real>::epsilon()) * scaled_max;
    const Real scale = abs(delta.at(k)) > floor ? abs(delta[k]) : floor;
    return err_bound[k] <= Real(1e-6) * scale;
}

DiffWeights diff_weights(const std::vector<Real>& scaled, int kmax, bool check) {
    return diff_weights(scaled, {}, kmax, check);
}

DiffWeights diff_weights(const std::vector<Real>& scaled, const std::vector<Real>& scaled_err, int kmax, bool check) {
    if (kmax < 0 || static_cast<int>(scaled.size()) < kmax + 1)
        throw DomainError("diff_weights: scaled moments shorter than kmax + 1");
    if (!scaled_err.empty() && static_cast<int>(scaled_err.size()) < kmax + 1)
        throw DomainError("diff_weights: error bounds shorter than kmax + 1");
    const Real eps = std::numeric_limits<Real>::epsilon();
    std::vector<Real> d(scaled.begin(), scaled.begin() + kmax + 1);
    std::vector<Real> e(kmax + 1);
    Real smax = 0;
    for (int i = 0; i <= kmax; ++i) {
        e[i] = 8 * (kmax + 1) * eps * abs(d[i]);
        if (!scaled_err.empty()) e[i] += scaled_err[i];
        if (abs(d[i]) > smax) smax = abs(d[i]);
    }
    DiffWeights w;
    w.scaled_max = smax;
    w.delta.resize(kmax + 1);
    w.err_bound.resize(kmax + 1);
    w.delta[0] = d[0];
    w.err_bound[0] = e[0];
    for (int m = 1; m <= kmax; ++m) {
        for (int i = 0; i + m <= kmax; ++i) {
            d[i] = d[i] - d[i + 1];
            e[i] = e[i] + e[i + 1] + eps * abs(d[i]);
        }
        w.delta[m] = d[0];
        w.err_bound[m] = e[0];
    }
    if (!check) return w;
    for (int k = 0; k <= kmax; ++k) {
        if (!w.reliable(k))
            throw CancellationAlarm("diff_weights: difference weight " + std::to_string(k) +
                                    " lost all significant digits");
    }
    return w;
}

double lambda_star(const ModelParams& params) {
    params.validate();
    const double a = params.alpha;
    const double n = params.n;
    const double an = a * n;
    const double l = std::log(2.0) + specfun::log_gamma(an) + n * specfun::log_gamma(a / 2) -
                     n * (std::log(2.0) + specfun::log_gamma(a)) - specfun::log_gamma(an / 2);
    return std::exp(l / an);
}

std::vector<Real> u2_moments_real(const ModelParams& params, int kmax) {
    params.validate();
    check_order(kmax);
    const Real a = params.alpha;
    const Real an = a * params.n;
    std::vector<Real> d(kmax + 1);
    d[0] = 1;
    for (int m = 0; m < kmax; ++m) d[m + 1] = d[m] * (a + 2 * m) * (a + 2 * m + 1) / (m + 1);
    std::vector<Real> conv = convolution_power(d, params.n, kmax);
    std::vector<Real> out(kmax + 1);
    Real ratio = 1;
    for (int k = 0; k <= kmax; ++k) {
        out[k] = ratio * conv[k];
        ratio *= Real(k + 1) / ((an + 2 * k) * (an + 2 * k + 1));
    }
    return out;
}

std::vector<double> u2_moments(const ModelParams& params, int kmax) {
    std::vector<double> out;
    for (const auto& v : u2_moments_real(params, kmax)) out.push_back(to_double(v));
    return out;
}

}  // namespace gvx
