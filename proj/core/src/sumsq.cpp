#include "gvx/sumsq.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/constants/constants.hpp>

#include "detail.hpp"
#include "gvx/errors.hpp"
#include "gvx/specfun.hpp"

namespace gvx {

namespace {

const Real& pi_real() {
    static const Real pi = boost::math::constants::pi<Real>();
    return pi;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Upper bound on log|term_k| of the power series when gamma_k <= 1.
double log_power_term_bound(double an, double x, int k) {
    return (an + k) * std::log(x) - std::lgamma(an) - std::lgamma(k + 1.0) - std::log(an + k);
}

int power_order_needed(double an, double r, int n, double tol) {
    const double x = r * std::sqrt(static_cast<double>(n));
    if (x == 0) return 1;
    const double target = std::log(tol) - std::log(1e3);
    int k = static_cast<int>(std::ceil(x));
    while (log_power_term_bound(an, x, k) > target) k += 8;
    return k + 2;
}

bool uncertified_orthogonal(const ModelParams& p) { return std::min(p.an(), static_cast<double>(p.n)) <= 2.0; }

// Rough tail estimate for a sequence of term magnitudes from its last three
// entries, assuming geometric decay.
double geometric_tail(const std::vector<double>& mags) {
    const std::size_t m = mags.size();
    if (m < 3) return m ? mags.back() : 0.0;
    const double a = mags[m - 3];
    const double c = mags[m - 1];
    if (a <= 0 || c <= 0) return c;
    const double q = std::sqrt(c / a);
    if (q < 0.95) return c * q / (1 - q);
    return c * static_cast<double>(m);
}

}  // namespace

namespace detail {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

std::vector<Real> gamma_ladder(const Real& a0, const Real& x, int K) {
    std::vector<Real> g(K + 1);
    if (x == 0) return std::vector<Real>(K + 1, Real(0));
    g[K] = specfun::reg_gamma_cdf(Real(a0 + K), x);
    const Real a_top = a0 + (K - 1);
    if (K == 0) return g;
    // t(a) = x^a e^{-x} / Gamma(a + 1)
    Real t = exp(a_top * log(x) - x - specfun::log_gamma(Real(a_top + 1)));
    for (int k = K - 1; k >= 0; --k) {
        g[k] = g[k + 1] + t;
        const Real a = a0 + k;
        t *= a / x;
    }
    return g;
}

}  // namespace detail

using detail::fmt;
using detail::gamma_ladder;

std::string to_string(Representation rep) {
    switch (rep) {
        case Representation::automatic: return "auto";
        case Representation::power: return "power";
        case Representation::mixture: return "mixture";
        case Representation::legendre: return "legendre";
        case Representation::fourier: return "fourier";
        case Representation::series: return "series";
        case Representation::svar_mixture: return "svar-mixture";
        case Representation::truncated: return "truncated-moments";
        case Representation::tan_polynomial: return "tan-polynomial";
        case Representation::u_legendre: return "u-legendre";
    }
    return "unknown";
}

Representation representation_from_string(const std::string& name) {
    for (auto rep : {Representation::automatic, Representation::power, Representation::mixture,
                     Representation::legendre, Representation::fourier, Representation::series,
                     Representation::svar_mixture, Representation::truncated, Representation::tan_polynomial,
                     Representation::u_legendre}) {
        if (to_string(rep) == name) return rep;
    }
    throw DomainError("unknown representation '" + name + "'");
}

void EvalConfig::validate() const {
    if (!(tol > 0) || !std::isfinite(tol)) throw DomainError("tol must be positive");
    if (max_k < 1 || max_j < 1) throw DomainError("term budgets must be positive");
    if (legendre_kmax < 2 || legendre_kmax > specfun::ShiftedLegendre::kMaxOrder)
        throw DomainError("legendre_kmax must lie in [2, " + std::to_string(specfun::ShiftedLegendre::kMaxOrder) + "]");
    if (fourier_mmax < 4) throw DomainError("fourier_mmax must be at least 4");
    if (lambda.kind == LambdaStrategy::Kind::fixed && !(lambda.value > 0))
        throw DomainError("fixed lambda must be positive");
}

Real resolve_lambda(const MomentTable& table, const LambdaStrategy& strategy) {
    const ModelParams& p = table.params();
    switch (strategy.kind) {
        case LambdaStrategy::Kind::sqrt_n: return sqrt(Real(p.n));
        case LambdaStrategy::Kind::moment: return pow(table.mu()[0], 1 / (Real(p.alpha) * p.n));
        case LambdaStrategy::Kind::fixed: return Real(strategy.value);
    }
    return sqrt(Real(p.n));
}

namespace {

// Power series plus the ratio of its largest term to the result.
SeriesResult power_impl(const MomentTable& table, double r, const EvalConfig& cfg, double& ratio) {
    cfg.validate();
    ratio = 0;
    if (!(r >= 0)) throw DomainError("r must be nonnegative");
    const ModelParams& p = table.params();
    SeriesResult res;
    res.representation = Representation::power;
    if (r == 0) return res;
    const double an_d = p.an();
    const int needed = power_order_needed(an_d, r, p.n, cfg.tol);
    if (needed > cfg.max_k)
        throw BudgetExceeded("power series needs " + std::to_string(needed) + " terms, above max_k; use mixture",
                             static_cast<std::size_t>(needed));
    if (needed > table.K()) throw BudgetExceeded("power series: moment table too short", needed);

    const Real an = Real(p.alpha) * p.n;
    const Real rr = r;
    const Real pre = exp(an * log(rr) - specfun::log_gamma(an));
    Real sum = 0;
    Real maxterm = 0;
    Real fact = 1;  // (-r)^k / k!
    Real last = 0;
    int k = 0;
    for (; k <= needed; ++k) {
        const Real term = table.mu()[k] / (an + k) * fact;
        sum += term;
        if (abs(term) > maxterm) maxterm = abs(term);
        last = abs(term);
        fact *= -rr / (k + 1);
    }
    const Real value = pre * sum;
    const double lost = detail::log10_abs(maxterm / std::max(abs(sum), Real(1e-300) * maxterm));
    if (lost - std::log10(cfg.tol) > detail::usable_digits())
        throw CancellationAlarm("power series loses " + fmt(lost) + " digits at r=" + fmt(r) +
                                "; use the mixture representation");
    const Real next = table.mu()[std::min(k, table.K())] / (an + k) * abs(fact);
    res.value = clamp01(to_double(value));
    res.est_error = to_double(pre * (next + maxterm * detail::real_eps() * k));
    res.terms_used = k;
    ratio = to_double(pre * maxterm / std::max(abs(value), Real(1e-300)));
    res.diagnostics = "max-term/result=" + fmt(ratio);
    return res;
}

}  // namespace

SeriesResult cdf_sumsq_power(const MomentTable& table, double r, const EvalConfig& cfg) {
    double ratio;
    return power_impl(table, r, cfg, ratio);
}

MixtureWeights mixture_weights(const MomentTable& table, const Real& lambda, double tol) {
    const ModelParams& p = table.params();
    const Real an = Real(p.alpha) * p.n;
    const std::vector<Real> scaled = scaled_moments(table, lambda);
    const bool certified = abs(lambda - sqrt(Real(p.n))) < Real(1e-30);
    int K = std::min(table.K(), 64);
    for (;;) {
        DiffWeights dw = diff_weights(scaled, K);
        MixtureWeights w;
        w.lambda = lambda;
        w.certified = certified;
        w.weight.resize(K + 1);
        w.deficit.resize(K + 1);
        Real binom = 1;  // C(an+k-1, k)
        Real acc = 0;
        for (int k = 0; k <= K; ++k) {
            w.weight[k] = dw.delta[k] * binom;
            acc += w.weight[k];
            w.deficit[k] = 1 - acc;
            binom *= (an + k) / (k + 1);
        }
        const double target = tol / 10;
        bool done;
        if (certified) {
            done = w.deficit[K] < target;
        } else {
            done = abs(w.deficit[K]) < target && abs(w.weight[K]) < target;
        }
        if (done) {
            // Trim to the first order where the mass is accounted for.
            int cut = K;
            for (int k = 0; k <= K; ++k) {
                if (abs(w.deficit[k]) < target && (certified || abs(w.weight[k]) < target)) {
                    cut = k;
                    break;
                }
            }
            w.weight.resize(cut + 1);
            w.deficit.resize(cut + 1);
            return w;
        }
        if (K >= table.K()) throw BudgetExceeded("mixture weights: moment table too short", 2 * K);
        K = std::min(table.K(), 2 * K);
    }
}

SeriesResult cdf_sumsq_mixture(const MixtureWeights& w, const ModelParams& p, double r, const EvalConfig& cfg) {
    if (!(r >= 0)) throw DomainError("r must be nonnegative");
    SeriesResult res;
    res.representation = Representation::mixture;
    const int K = static_cast<int>(w.weight.size()) - 1;
    const Real an = Real(p.alpha) * p.n;
    const Real x = w.lambda * Real(r);
    if (x == 0) {
        res.terms_used = 0;
        return res;
    }
    const std::vector<Real> g = gamma_ladder(an, x, K + 1);
    const Real target = Real(cfg.tol) / 10;
    Real sum = 0;
    Real abs_sum = 0;
    int used = K + 1;
    Real bound = abs(w.deficit[K]) * g[K + 1];
    for (int k = 0; k <= K; ++k) {
        sum += w.weight[k] * g[k];
        abs_sum += abs(w.weight[k] * g[k]);
        // Remaining weights multiply G factors no larger than g[k+1].
        const Real rem = abs(w.deficit[k]) * g[k + 1];
        if (w.certified && rem < target) {
            used = k + 1;
            bound = rem;
            break;
        }
    }
    if (used - 1 > cfg.max_k)
        throw BudgetExceeded("mixture needs " + std::to_string(used) + " weights, above max_k", used);
    res.value = clamp01(to_double(sum));
    res.est_error = to_double(bound + abs_sum * detail::real_eps() * 100);
    res.terms_used = used;
    std::ostringstream os;
    os << "lambda=" << to_double(w.lambda) << (w.certified ? " certified" : " uncertified");
    res.diagnostics = os.str();
    return res;
}

SeriesResult cdf_sumsq_mixture(const MomentTable& table, double r, const EvalConfig& cfg) {
    cfg.validate();
    const MixtureWeights w = mixture_weights(table, resolve_lambda(table, cfg.lambda), cfg.tol);
    return cdf_sumsq_mixture(w, table.params(), r, cfg);
}

LegendreCoefficients legendre_coeffs(const MomentTable& table, const EvalConfig& cfg) {
    cfg.validate();
    const ModelParams& p = table.params();
    const int L = cfg.legendre_kmax;
    if (table.K() < L) throw BudgetExceeded("legendre_coeffs: moment table too short", L);
    const specfun::ShiftedLegendre pl(L);
    const Real an = Real(p.alpha) * p.n;
    const Real pref = exp(an / 2 * log(Real(p.n)) - specfun::log_gamma(an));
    std::vector<Real> g(L + 1);
    for (int j = 0; j <= L; ++j) g[j] = table.gamma()[j] / (an + j);
    LegendreCoefficients out;
    out.params = p;
    out.c.resize(L + 1);
    out.rel_err.resize(L + 1);
    Real cmax = 0;
    std::vector<Real> err(L + 1);
    for (int k = 0; k <= L; ++k) {
        const std::vector<Real> row = pl.row<Real>(k);
        Real s = 0;
        Real sabs = 0;
        for (int j = 0; j <= k; ++j) {
            const Real t = row[j] * g[j];
            s += t;
            sabs += abs(t);
        }
        out.c[k] = (2 * k + 1) * pref * s;
        err[k] = (2 * k + 1) * pref * sabs * detail::real_eps() * (k + 2);
        cmax = std::max(cmax, abs(out.c[k]));
    }
    const Real floor = cmax * Real(1e-40);
    for (int k = 0; k <= L; ++k) {
        const Real scale = std::max(abs(out.c[k]), floor);
        out.rel_err[k] = to_double(err[k] / scale);
        if (out.rel_err[k] > 1e-6)
            throw CancellationAlarm("legendre_coeffs: coefficient " + std::to_string(k) + " is unreliable");
    }
    return out;
}

SeriesResult cdf_sumsq_legendre(const LegendreCoefficients& lc, double r, const EvalConfig& cfg) {
    if (!(r >= 0)) throw DomainError("r must be nonnegative");
    const ModelParams& p = lc.params;
    SeriesResult res;
    res.representation = Representation::legendre;
    if (r == 0) return res;
    const int L = static_cast<int>(lc.c.size()) - 1;
    const Real an = Real(p.alpha) * p.n;
    const Real rr = r;
    const Real x = rr * sqrt(Real(p.n)) / 2;
    const auto bes = specfun::mod_sph_bessel_i_scaled(L, x);
    const Real pre = exp(an * log(rr));
    Real sum = 0;
    Real maxterm = 0;
    std::vector<double> mags;
    for (int k = 0; k <= L; ++k) {
        Real t = lc.c[k] * bes.values[k];
        if (k % 2 == 1) t = -t;
        sum += t;
        maxterm = std::max(maxterm, abs(t));
        mags.push_back(to_double(abs(t) * pre));
    }
    const double lost = detail::log10_abs(maxterm / std::max(abs(sum), Real(1e-300) * maxterm));
    if (lost - std::log10(cfg.tol) > detail::usable_digits())
        throw CancellationAlarm("legendre series loses " + fmt(lost) + " digits at r=" + fmt(r));
    res.value = clamp01(to_double(pre * sum));
    res.est_error = geometric_tail(mags) + to_double(pre * maxterm * detail::real_eps() * (L + 1));
    res.terms_used = L + 1;
    if (uncertified_orthogonal(p)) res.diagnostics = "uncertified: min(alpha n, n) <= 2";
    return res;
}

SeriesResult cdf_sumsq_legendre(const MomentTable& table, double r, const EvalConfig& cfg) {
    return cdf_sumsq_legendre(legendre_coeffs(table, cfg), r, cfg);
}

FourierCoefficients fourier_coeffs(const LegendreCoefficients& lc, const EvalConfig& cfg) {
    cfg.validate();
    const ModelParams& p = lc.params;
    const int L = static_cast<int>(lc.c.size()) - 1;
    const int M = cfg.fourier_mmax;
    FourierCoefficients out;
    out.params = p;
    out.b.assign(M + 1, Real(0));
    const Real scale = 2 / sqrt(Real(p.n));
    for (int m = 1; m <= M; ++m) {
        const std::vector<Real> j = specfun::sph_bessel_j(L, Real(m * pi_real() / 2));
        Real s = 0;
        for (int k = 0; k <= L; ++k) {
            if ((m + k) % 2 == 0) continue;
            const int e = (m + k - 1) / 2;
            const Real t = lc.c[k] * j[k];
            s += (e % 2 == 0) ? t : Real(-t);
        }
        out.b[m] = scale * s;
    }
    return out;
}

FourierCoefficients fourier_coeffs(const MomentTable& table, const EvalConfig& cfg) {
    return fourier_coeffs(legendre_coeffs(table, cfg), cfg);
}

SeriesResult cdf_sumsq_fourier(const FourierCoefficients& fc, double r, const EvalConfig& cfg) {
    (void)cfg;
    if (!(r >= 0)) throw DomainError("r must be nonnegative");
    const ModelParams& p = fc.params;
    SeriesResult res;
    res.representation = Representation::fourier;
    if (r == 0) return res;
    const int M = static_cast<int>(fc.b.size()) - 1;
    const Real an = Real(p.alpha) * p.n;
    const Real rr = r;
    const Real sn = sqrt(Real(p.n));
    const Real decay = exp(-rr * sn);
    const Real nr2 = p.n * rr * rr;
    Real sum = 0;
    for (int m = 1; m <= M; ++m) {
        const Real mp = m * pi_real();
        const Real factor = (m % 2 == 0) ? Real(1 - decay) : Real(1 + decay);
        sum += mp * sn / (nr2 + mp * mp) * fc.b[m] * factor;
    }
    const Real pre = exp(an * log(rr));
    // Envelope of |b_m| over the last two octaves gives a power-law tail.
    auto env = [&](int lo, int hi) {
        Real v = 0;
        for (int m = std::max(lo, 1); m <= hi; ++m) v = std::max(v, abs(fc.b[m]));
        return to_double(v);
    };
    const double a1 = env(M / 4, M / 2);
    const double a2 = env(M / 2 + 1, M);
    double tail;
    const double q = a2 > 0 && a1 > 0 ? std::log2(a1 / a2) : 0.0;
    const double sq = std::sqrt(static_cast<double>(p.n));
    if (q > 0.1)
        tail = a2 * 2 * sq / (M_PI * q);
    else
        tail = a2 * 2 * sq / M_PI * std::log(static_cast<double>(M));
    res.value = clamp01(to_double(pre * sum));
    res.est_error = to_double(pre) * tail;
    res.terms_used = M;
    res.diagnostics = "slow convergence: targets ~1e-6";
    if (uncertified_orthogonal(p)) res.diagnostics += "; uncertified: min(alpha n, n) <= 2";
    return res;
}

SeriesResult cdf_sumsq_fourier(const MomentTable& table, double r, const EvalConfig& cfg) {
    return cdf_sumsq_fourier(fourier_coeffs(table, cfg), r, cfg);
}

SeriesResult cdf_u(const LegendreCoefficients& lc, const FourierCoefficients* fc, double u, const EvalConfig& cfg) {
    (void)cfg;
    const ModelParams& p = lc.params;
    const double lo = 1.0 / std::sqrt(static_cast<double>(p.n));
    if (!(u >= lo * (1 - 1e-15)) || !(u <= 1 + 1e-15))
        throw DomainError("u must lie in [1/sqrt(n), 1]");
    SeriesResult res;
    res.representation = Representation::legendre;
    if (p.n == 1 || u >= 1) {
        res.value = 1;
        return res;
    }
    if (u <= lo) return res;
    const int L = static_cast<int>(lc.c.size()) - 1;
    const Real an = Real(p.alpha) * p.n;
    const Real uu = std::clamp(u, lo, 1.0);
    const Real sn = sqrt(Real(p.n));
    const Real y = 1 / (sn * uu);
    const Real t = 2 * y - 1;
    const Real pre = exp(specfun::log_gamma(an) + (an - 1) * log(uu)) / sn;
    Real p0 = 1, p1 = t;
    Real sum = lc.c[0];
    std::vector<double> cm;
    cm.push_back(to_double(abs(lc.c[0])));
    for (int k = 1; k <= L; ++k) {
        sum += lc.c[k] * p1;
        cm.push_back(to_double(abs(lc.c[k])));
        const Real p2 = ((2 * k + 1) * t * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
    }
    // Power-law fit of |c_k| over the last half for the tail.
    double cmax_hi = 0, cmax_mid = 0;
    for (int k = L / 2; k <= L; ++k) cmax_hi = std::max(cmax_hi, cm[k]);
    for (int k = L / 4; k < L / 2; ++k) cmax_mid = std::max(cmax_mid, cm[k]);
    const double slope = (cmax_mid > 0 && cmax_hi > 0) ? std::log2(cmax_mid / cmax_hi) : 0.0;
    // |c_k| <= C k^{-s} beyond L; |P_k(cos th)| <= min(1, B / sqrt(k)) with
    // B = sqrt(2 / (pi sin th)) (Bernstein).
    const double th = std::acos(std::clamp(to_double(t), -1.0, 1.0));
    const double sin_th = std::sin(th);
    const double B2 = sin_th > 0 ? 2.0 / (M_PI * sin_th) : HUGE_VAL;
    const double s = slope;
    const double C = cmax_hi * std::pow(static_cast<double>(L), s);
    auto power_integral = [](double q, double a, double b) {
        // int_a^b k^{-q} dk, b may be infinite (q > 1 then)
        if (std::abs(q - 1) < 1e-9) return std::log(b / a);
        return (std::pow(a, 1 - q) - (std::isinf(b) ? 0.0 : std::pow(b, 1 - q))) / (q - 1);
    };
    double tail;
    const double Ld = L;
    const double kstar = std::max(Ld, B2);
    if (s > 0.75 && (std::isfinite(B2) || s > 1.25)) {
        tail = std::isfinite(kstar) ? C * power_integral(s, Ld, kstar) : C * power_integral(s, Ld, HUGE_VAL);
        if (std::isfinite(kstar)) tail += C * std::sqrt(B2) * power_integral(s + 0.5, kstar, HUGE_VAL);
    } else {
        tail = cmax_hi * L * 10;
    }
    res.value = clamp01(to_double(pre * sum));
    res.est_error = to_double(pre) * tail;
    res.terms_used = L + 1;
    if (fc) {
        const int M = static_cast<int>(fc->b.size()) - 1;
        Real fs = 0;
        const Real arg = pi_real() / (sn * uu);
        for (int m = 1; m <= M; ++m) fs += fc->b[m] * sin(m * arg);
        const Real fval = exp(specfun::log_gamma(an) + (an - 1) * log(uu)) * fs;
        std::ostringstream os;
        os.precision(12);
        os << "fourier=" << to_double(fval);
        res.diagnostics = os.str();
    }
    if (uncertified_orthogonal(p)) res.diagnostics += (res.diagnostics.empty() ? "" : "; ") + std::string("uncertified");
    return res;
}

SeriesResult cdf_u(const MomentTable& table, double u, const EvalConfig& cfg) {
    const LegendreCoefficients lc = legendre_coeffs(table, cfg);
    const FourierCoefficients fc = fourier_coeffs(lc, cfg);
    return cdf_u(lc, &fc, u, cfg);
}

MomentCache::MomentCache(ModelParams params, int initial_order)
    : params_(params), initial_order_(std::max(initial_order, 8)) {
    params_.validate();
}

std::shared_ptr<const MomentTable> MomentCache::at_least(int K) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!table_ || table_->K() < K) {
        int target = std::max(K, initial_order_);
        if (table_) target = std::max(target, std::min(kMaxMomentOrder, table_->K() + table_->K() / 2));
        target = std::min(target, kMaxMomentOrder);
        if (target < K) throw BudgetExceeded("moment order above supported maximum", K);
        table_ = std::make_shared<const MomentTable>(build_moments(params_, target));
    }
    return table_;
}

SumSquaresModel::SumSquaresModel(ModelParams params, EvalConfig cfg)
    : params_(params), cfg_(cfg), cache_(params, 64) {
    params_.validate();
    cfg_.validate();
}

int SumSquaresModel::order_budget() const { return std::min(cfg_.max_k, kMaxMomentOrder); }

std::shared_ptr<const LegendreCoefficients> SumSquaresModel::legendre() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!legendre_) {
        auto t = cache_.at_least(cfg_.legendre_kmax);
        legendre_ = std::make_shared<const LegendreCoefficients>(legendre_coeffs(*t, cfg_));
    }
    return legendre_;
}

std::shared_ptr<const FourierCoefficients> SumSquaresModel::fourier() const {
    auto lc = legendre();
    std::lock_guard<std::mutex> lock(mutex_);
    if (!fourier_) fourier_ = std::make_shared<const FourierCoefficients>(fourier_coeffs(*lc, cfg_));
    return fourier_;
}

std::shared_ptr<const MixtureWeights> SumSquaresModel::weights() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!weights_) {
        auto w = with_table(cache_, 64, order_budget(), [&](const MomentTable& t) {
            return mixture_weights(t, resolve_lambda(t, cfg_.lambda), cfg_.tol);
        });
        weights_ = std::make_shared<const MixtureWeights>(std::move(w));
    }
    return weights_;
}

SeriesResult SumSquaresModel::cdf(double r, Representation rep) const {
    if (!(r >= 0) || !std::isfinite(r)) throw DomainError("r must be a nonnegative finite number");
    switch (rep) {
        case Representation::power: {
            const int needed = power_order_needed(params_.an(), r, params_.n, cfg_.tol);
            return with_table(cache_, needed, order_budget(),
                              [&](const MomentTable& t) { return cdf_sumsq_power(t, r, cfg_); });
        }
        case Representation::mixture: return cdf_sumsq_mixture(*weights(), params_, r, cfg_);
        case Representation::legendre: return cdf_sumsq_legendre(*legendre(), r, cfg_);
        case Representation::fourier: return cdf_sumsq_fourier(*fourier(), r, cfg_);
        case Representation::automatic: break;
        default: throw DomainError("representation " + to_string(rep) + " does not apply to the sum of squares");
    }
    // Power series when its cancellation stays mild, otherwise the mixture.
    try {
        double ratio = 0;
        const int needed = power_order_needed(params_.an(), r, params_.n, cfg_.tol);
        SeriesResult pw = with_table(cache_, needed, order_budget(),
                                     [&](const MomentTable& t) { return power_impl(t, r, cfg_, ratio); });
        if (r == 0 || (pw.value > 0 && ratio < 1e6)) {
            pw.diagnostics += "; auto: power";
            return pw;
        }
    } catch (const NumericalError&) {
    }
    SeriesResult mx = cdf(r, Representation::mixture);
    mx.diagnostics += "; auto: mixture";
    return mx;
}

SeriesResult SumSquaresModel::cdf(double r) const { return cdf(r, cfg_.representation); }

SeriesResult SumSquaresModel::cdf_u(double u) const {
    auto lc = legendre();
    auto fc = fourier();
    return gvx::cdf_u(*lc, fc.get(), u, cfg_);
}

SeriesResult cdf_sumsq(const ModelParams& params, double r, const EvalConfig& cfg) {
    return SumSquaresModel(params, cfg).cdf(r);
}

}  // namespace gvx
