#include "gvx/variance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <boost/math/constants/constants.hpp>

#include "detail.hpp"
#include "gvx/errors.hpp"
#include "gvx/specfun.hpp"

namespace gvx {

using detail::fmt;

namespace {

// x0 = r sqrt(n(n-1)) below which auto prefers the truncated-moment series.
constexpr double kTruncatedAutoRadius = 12.0;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Real lgam(const Real& x) { return specfun::log_gamma(x); }

void check_z(double z) {
    if (!(z >= 0) || !std::isfinite(z)) throw DomainError("z must be finite and nonnegative");
}

void check_digits(const Real& maxmag, double tol, const char* what) {
    if (maxmag == 0) return;
    const double need = detail::log10_abs(maxmag) - std::log10(tol);
    if (need > detail::usable_digits())
        throw CancellationAlarm(std::string(what) + " needs " + fmt(need) + " digits; use the mixture representation");
}

struct Term {
    Real value = 0;
    Real err = 0;
    Real maxmag = 0;  // largest summand in absolute value
    int k = 0;
};

// Outer terms of the double series, produced in order j = 0, 1, ...
class SeriesTerms {
public:
    SeriesTerms(const MomentTable& table, double r, const EvalConfig& cfg)
        : table_(table), cfg_(cfg), an_(Real(table.params().alpha) * table.params().n), r_(r) {
        x_d_ = r * std::sqrt(static_cast<double>(table.params().n));
        x_ = Real(r) * sqrt(Real(table.params().n));
        pre_ = r > 0 ? exp(an_ * log(x_) - lgam(an_)) : Real(0);
        pre_d_ = to_double(pre_);
    }

    Term next() {
        ++j_;
        if (j_ > 0) {
            const Real inv = Real(1) / j_;
            const Real jm1 = j_ - 1;
            for (std::size_t k = 0; k < binom_.size(); ++k) binom_[k] *= (halves_[k] + jm1) * inv;
        }
        Term t;
        if (r_ == 0) return t;
        const double inner_tol = cfg_.tol * 1e-6;
        Real sum = 0;
        double maxmag = 0;
        int k = 0;
        for (;; ++k) {
            if (k > cfg_.max_k)
                throw BudgetExceeded("double series: inner sum needs more than max_k terms; use the mixture",
                                     static_cast<std::size_t>(k));
            const int idx = 2 * j_ + k;
            if (idx > table_.K())
                throw BudgetExceeded("double series: moment table too short", idx + idx / 2 + 16);
            ensure(k);
            const Real term = binom_[k] * table_.gamma()[idx] * pw_[k];
            if (k % 2 == 1)
                sum -= term;
            else
                sum += term;
            const double mag = std::abs(to_double(term)) * pre_d_;
            maxmag = std::max(maxmag, mag);
            const double h = (an_d() + k) / 2;
            const double rho = x_d_ / (k + 1) * std::sqrt((h + j_) * (h + 0.5)) / h;
            if (rho < 1) {
                const double tail = mag * rho / (1 - rho);
                if (tail < inner_tol) {
                    t.err = tail;
                    break;
                }
            }
        }
        t.maxmag = maxmag;
        t.value = pre_ * sum;
        t.err += t.maxmag * detail::real_eps() * (k + 1);
        t.k = k + 1;
        check_digits(t.maxmag, cfg_.tol, "double series");
        return t;
    }

private:
    double an_d() const { return table_.params().an(); }
    Real half(std::size_t k) const { return (an_ + static_cast<int>(k)) / 2; }

    void ensure(int k) {
        while (static_cast<int>(pw_.size()) <= k) {
            const int m = static_cast<int>(pw_.size());
            // x^m / (m! (an+m))
            if (m == 0) {
                fact_ = 1;
            } else {
                fact_ *= x_ / m;
            }
            pw_.push_back(fact_ / (an_ + m));
        }
        while (static_cast<int>(binom_.size()) <= k) {
            const Real h = half(binom_.size());
            halves_.push_back(h);
            binom_.push_back(j_ == 0 ? Real(1) : exp(lgam(h + j_) - lgam(h) - lgam(Real(j_ + 1))));
        }
    }

    const MomentTable& table_;
    const EvalConfig& cfg_;
    Real an_;
    double r_;
    double x_d_;
    Real x_;
    Real pre_;
    double pre_d_ = 0;
    Real fact_ = 1;
    int j_ = -1;
    std::vector<Real> pw_;
    std::vector<Real> binom_;
    std::vector<Real> halves_;
};

// Maximum over a window whose ends only move forward.
class SlidingMax {
public:
    void push(int i, double v) {
        while (!q_.empty() && q_.back().second <= v) q_.pop_back();
        q_.emplace_back(i, v);
    }
    double max_from(int lo) {
        while (!q_.empty() && q_.front().first < lo) q_.pop_front();
        return q_.empty() ? 0.0 : q_.front().second;
    }

private:
    std::deque<std::pair<int, double>> q_;
};

// Sums outer terms until the tail is below tolerance. The terms oscillate
// with slowly growing period; the partial sums at sign changes form an
// alternating sequence that Wynn epsilon extrapolates well. A power-law
// envelope c j^{-(n+1)/2} fitted over [j/2, j] serves as the fallback.
template <class F>
SeriesResult sum_outer(int n, const EvalConfig& cfg, F&& term) {
    const double p = (n + 1) / 2.0;
    SeriesResult res;
    Real sum = 0;
    Real err = 0;
    int inner = 0;
    std::vector<double> mags;
    SlidingMax recent_max, scaled_max;
    detail::WynnEpsilon wynn;
    int last_sign = 0;
    bool oscillating = false;
    double peak = 0;  // max |term| over j < current j/2
    int peak_upto = 0;
    auto finish = [&](const Real& value, double tail, int j, const char* how) {
        res.value = clamp01(to_double(value));
        res.est_error = tail + to_double(err);
        res.terms_used = j + 1;
        res.diagnostics = "outer=" + std::to_string(j + 1) + " inner<=" + std::to_string(inner) + " " + how;
        return res;
    };
    for (int j = 0; j <= cfg.max_j; ++j) {
        const Term t = term(j);
        if (j == 0 && t.value == 0 && t.maxmag == 0) {
            res.terms_used = 1;
            return res;
        }
        const int sign = t.value > 0 ? 1 : (t.value < 0 ? -1 : 0);
        if (sign != 0 && last_sign != 0 && sign != last_sign) {
            oscillating = true;
            wynn.push(sum);
            if (wynn.size() >= 4 && wynn.change() < cfg.tol / 2)
                return finish(wynn.estimate(), wynn.change(), j - 1, "extrapolated");
        }
        if (sign != 0) last_sign = sign;
        sum += t.value;
        err += t.err;
        inner = std::max(inner, t.k);
        const double mag = to_double(abs(t.value));
        mags.push_back(mag);
        recent_max.push(j, mag);
        scaled_max.push(j, mag * std::pow(static_cast<double>(std::max(j, 1)), p));
        if (j < 20 || !oscillating) continue;
        // The envelope only holds once the terms are past their peak.
        const double recent = recent_max.max_from(j / 2);
        for (; peak_upto < j / 2; ++peak_upto) peak = std::max(peak, mags[peak_upto]);
        if (recent > 0.5 * peak) continue;
        const double c = scaled_max.max_from(j / 2);
        const double tail = c * std::pow(static_cast<double>(j), 1 - p) / (p - 1);
        if (tail < cfg.tol / 2) return finish(sum, tail, j, "envelope");
    }
    throw ConvergenceError("outer sum did not reach tol within max_j=" + std::to_string(cfg.max_j) +
                           " terms; raise max_j or tol");
}

// First k with G_{an+k}(y) below 1e-40 (bounded via the leading series term).
int ladder_order(double an, double y) {
    if (y <= 0) return 1;
    int k = 0;
    for (;; ++k) {
        const double a = an + k;
        if (a + 1 > 2 * y) {
            const double lb = a * std::log(y) - y - std::lgamma(a + 1) - std::log1p(-y / (a + 1));
            if (lb < std::log(1e-40)) return std::max(k, 4);
        }
    }
}

}  // namespace

SeriesResult svar_cdf_series(const MomentTable& table, double z, const EvalConfig& cfg) {
    cfg.validate();
    check_z(z);
    table.params().validate(2);
    SeriesTerms terms(table, std::sqrt(z), cfg);
    SeriesResult res = sum_outer(table.params().n, cfg, [&](int) { return terms.next(); });
    res.representation = Representation::series;
    return res;
}

std::vector<double> svar_outer_terms(const MomentTable& table, double z, int jmax, const EvalConfig& cfg) {
    check_z(z);
    table.params().validate(2);
    SeriesTerms terms(table, std::sqrt(z), cfg);
    std::vector<double> out;
    out.reserve(jmax + 1);
    for (int j = 0; j <= jmax; ++j) out.push_back(to_double(terms.next().value));
    return out;
}

SvarMixturePlan::SvarMixturePlan(std::shared_ptr<const MomentTable> table, Real lambda)
    : table_(std::move(table)), lambda_(std::move(lambda)) {
    if (!(lambda_ > 0)) throw DomainError("lambda must be positive");
}

std::shared_ptr<const SvarMixturePlan::Row> SvarMixturePlan::row(int j, int kmax) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (j < static_cast<int>(rows_.size()) && rows_[j] &&
            static_cast<int>(rows_[j]->weight.size()) > kmax)
            return rows_[j];
    }
    const MomentTable& t = *table_;
    const int top = 2 * j + kmax;
    if (top > t.K()) throw BudgetExceeded("sample-variance mixture: moment table too short", top + top / 2 + 16);
    const ModelParams& p = t.params();
    const Real an = Real(p.alpha) * p.n;
    const Real q = sqrt(Real(p.n)) / lambda_;
    // s_l = C((an+l)/2 + j - 1, j) gamma_{2j+l} (sqrt(n)/lambda)^{an+l}
    std::vector<Real> s(kmax + 1);
    Real b[2];
    for (int l = 0; l < 2; ++l) {
        const Real h = (an + l) / 2;
        b[l] = j == 0 ? Real(1) : exp(lgam(h + j) - lgam(h) - lgam(Real(j + 1)));
    }
    Real qp = pow(q, an);
    for (int l = 0; l <= kmax; ++l) {
        const Real h = (an + l) / 2;
        Real& bl = b[l % 2];
        s[l] = bl * t.gamma()[2 * j + l] * qp;
        bl *= (h + j) / h;
        qp *= q;
    }
    // Weights far below the largest one may lose every digit; their rounding
    // bounds travel with them into the error estimate.
    const DiffWeights dw = diff_weights(s, kmax, false);
    auto row = std::make_shared<Row>();
    row->weight.resize(kmax + 1);
    row->err.resize(kmax + 1);
    Real c = 1;  // C(an+k-1, k)
    for (int k = 0; k <= kmax; ++k) {
        row->weight[k] = dw.delta[k] * c;
        row->err[k] = dw.err_bound[k] * c;
        c *= (an + k) / (k + 1);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (static_cast<int>(rows_.size()) <= j) rows_.resize(j + 1);
    if (!rows_[j] || rows_[j]->weight.size() < row->weight.size()) rows_[j] = row;
    return rows_[j];
}

SeriesResult svar_cdf_mixture(const SvarMixturePlan& plan, double z, const EvalConfig& cfg) {
    cfg.validate();
    check_z(z);
    const ModelParams& p = plan.table().params();
    p.validate(2);
    SeriesResult res;
    res.representation = Representation::svar_mixture;
    if (z == 0) return res;
    const Real an = Real(p.alpha) * p.n;
    const Real y = plan.lambda() * sqrt(Real(z));
    int K = ladder_order(p.an(), to_double(y));
    std::vector<Real> g = detail::gamma_ladder(an, y, K);
    const Real cut = Real(cfg.tol) * Real(1e-6);
    res = sum_outer(p.n, cfg, [&](int j) {
        for (;;) {
            if (K > cfg.max_k)
                throw BudgetExceeded("sample-variance mixture needs more than max_k weights", K);
            const auto row = plan.row(j, K);
            Term t;
            for (int k = 0; k <= K; ++k) {
                const Real v = row->weight[k] * g[k];
                t.value += v;
                t.err += row->err[k] * g[k];
                t.maxmag = std::max(t.maxmag, abs(v));
            }
            const Real last = abs(row->weight[K] * g[K]) + abs(row->weight[K - 1] * g[K - 1]);
            if (last < cut) {
                if (t.err > Real(cfg.tol))
                    throw CancellationAlarm("sample-variance mixture: weight rounding bound " +
                                            fmt(to_double(t.err)) + " exceeds tol; use thm41 series");
                t.err += last;
                t.k = K + 1;
                return t;
            }
            K *= 2;
            g = detail::gamma_ladder(an, y, K);
        }
    });
    res.representation = Representation::svar_mixture;
    res.diagnostics += " lambda=" + fmt(to_double(plan.lambda()));
    return res;
}

SeriesResult svar_cdf_mixture(const MomentTable& table, double z, const EvalConfig& cfg) {
    auto copy = std::make_shared<const MomentTable>(table);
    SvarMixturePlan plan(copy, resolve_lambda(table, cfg.lambda));
    return svar_cdf_mixture(plan, z, cfg);
}

TruncatedMoments truncated_moments(const AngleCoefficients& coeffs, const MomentTable& table, int kmax) {
    const ModelParams& p = coeffs.params;
    TruncatedMoments tm;
    tm.gbar = p.alpha == 1.0 ? truncated_cos_moments_exponential(table, table.K())
                             : truncated_cos_moments(coeffs, table, table.K());
    // gbar = gamma - cone with cone <= gamma: rounding is a few ulps of gamma.
    std::vector<Real> gerr(tm.gbar.size());
    for (std::size_t m = 0; m < gerr.size(); ++m) gerr[m] = table.gamma()[m] * Real(1e-95);
    CotMoments cm = truncated_cot_moments(tm.gbar, gerr, p, kmax, 1e-40);
    tm.Mbar = std::move(cm.value);
    tm.Mbar_err = std::move(cm.err);
    return tm;
}

int truncated_order_needed(const ModelParams& p, double r, double tol) {
    const double an = p.an();
    const double x = r * std::sqrt(static_cast<double>(p.n));
    if (x == 0) return 1;
    const double l1 = std::log(static_cast<double>(p.n - 1)) / 2;
    const double x0 = x * std::sqrt(static_cast<double>(p.n - 1));
    const double target = std::log(tol) - std::log(1e3);
    auto bound = [&](int k) {
        return an * std::log(x) - std::lgamma(an) + (an + k) * l1 + k * std::log(x) - std::lgamma(k + 1.0) -
               std::log(an + k);
    };
    int k = static_cast<int>(std::ceil(x0));
    while (bound(k) > target) k += 4;
    return k + 2;
}

Real boundary_terms(const AngleCoefficients& c, double r) {
    const ModelParams& p = c.params;
    const int n = p.n;
    const Real an = Real(p.alpha) * n;
    const Real x = Real(r) * sqrt(Real(n));
    const Real x0 = x * sqrt(Real(n - 1));
    Real total = c.W_at_phi_n * specfun::reg_gamma_cdf(an, x0);
    if (r == 0) return total;
    const int am1n = static_cast<int>(p.alpha - 1) * n;
    const Real lg_an = lgam(an);
    for (int j = 0; j <= c.N; ++j) {
        const int e = n - 1 + 2 * j;
        const Real s = Real(am1n + 1 - 2 * j);
        const Real upper = exp(lgam(s) - lg_an) * specfun::upper_gamma_ratio(s, x0);
        total += c.norm * c.a[j] / e * pow(x, e) * upper;
    }
    return total;
}

Real boundary_terms_exponential(int n, double r) {
    if (n < 2) throw DomainError("n must be at least 2");
    const Real pi = boost::math::constants::pi<Real>();
    const Real nn = n;
    const Real b = pow(pi, (nn - 1) / 2) / exp(lgam((nn + 1) / 2));
    const Real lead = exp(lgam(nn) - log(nn) / 2 - (nn - 1) / 2 * log(nn * (nn - 1)));
    const Real x0 = Real(r) * sqrt(nn * (nn - 1));
    return lead * b * specfun::reg_gamma_cdf(nn - 1, x0);
}

TruncatedWeights truncated_mixture_weights(const TruncatedMoments& tm, const ModelParams& p, const Real& lambda,
                                           int kmax) {
    if (!(lambda > 0)) throw DomainError("lambda must be positive");
    if (kmax + 1 > static_cast<int>(tm.Mbar.size()))
        throw BudgetExceeded("truncated mixture: Mbar too short", static_cast<std::size_t>(kmax));
    const Real an = Real(p.alpha) * p.n;
    const Real q = sqrt(Real(p.n)) / lambda;
    std::vector<Real> s(kmax + 1), se(kmax + 1, Real(0));
    Real qp = pow(q, an);
    for (int l = 0; l <= kmax; ++l) {
        s[l] = qp * tm.Mbar[l];
        if (l < static_cast<int>(tm.Mbar_err.size())) se[l] = qp * tm.Mbar_err[l];
        qp *= q;
    }
    const DiffWeights dw = diff_weights(s, se, kmax, false);
    TruncatedWeights out;
    out.weight.resize(kmax + 1);
    out.err_bound.resize(kmax + 1);
    Real c = 1;
    bool lead = true;
    for (int k = 0; k <= kmax; ++k) {
        out.weight[k] = dw.delta[k] * c;
        out.err_bound[k] = dw.err_bound[k] * c;
        lead = lead && out.err_bound[k] <= Real(1e-6) * abs(out.weight[k]);
        if (lead) out.resolved = k + 1;
        c *= (an + k) / (k + 1);
    }
    return out;
}

Real truncated_mixture_lambda(const AngleCoefficients& c, const std::vector<Real>& Mbar) {
    const ModelParams& p = c.params;
    const Real rest = 1 - c.W_at_phi_n;
    if (Mbar.empty() || !(Mbar[0] > 0) || !(rest > 0)) return sqrt(Real(p.n) * (p.n - 1));
    return sqrt(Real(p.n)) * pow(Mbar[0] / rest, 1 / (Real(p.alpha) * p.n));
}

SeriesResult svar_cdf_integer_alpha(const AngleCoefficients& c, const TruncatedMoments& tm, double r,
                                    const EvalConfig& cfg) {
    cfg.validate();
    if (!(r >= 0) || !std::isfinite(r)) throw DomainError("r must be finite and nonnegative");
    const ModelParams& p = c.params;
    SeriesResult res;
    res.representation = Representation::truncated;
    if (r == 0) return res;
    const int needed = truncated_order_needed(p, r, cfg.tol);
    if (needed > cfg.max_k)
        throw BudgetExceeded("truncated-moment series needs " + std::to_string(needed) +
                                 " terms, above max_k; use the double series",
                             static_cast<std::size_t>(needed));
    if (needed + 1 > static_cast<int>(tm.Mbar.size()))
        throw BudgetExceeded("truncated-moment series: Mbar too short", static_cast<std::size_t>(needed));
    const int n = p.n;
    const Real an = Real(p.alpha) * n;
    const Real x = Real(r) * sqrt(Real(n));
    const double x0 = r * std::sqrt(static_cast<double>(n) * (n - 1));
    const Real pre = exp(an * log(x) - lgam(an));
    Real sum = 0, maxmag = 0, fact = 1, tail = 0, moment_err = 0;
    int k = 0;
    for (; k <= needed; ++k) {
        Real term = tm.Mbar[k] / (an + k) * fact;
        sum += term;
        if (k < static_cast<int>(tm.Mbar_err.size())) moment_err += tm.Mbar_err[k] / (an + k) * abs(fact);
        maxmag = std::max(maxmag, abs(term));
        const double rho = x0 / (k + 1);
        if (rho < 1) {
            tail = pre * abs(term) * rho / (1 - rho);
            if (tail < Real(cfg.tol) * Real(1e-3)) break;
        }
        fact *= -x / (k + 1);
    }
    maxmag *= pre;
    check_digits(maxmag, cfg.tol, "truncated-moment series");
    const Real bt = boundary_terms(c, r);
    const Real value = pre * sum + bt;
    res.value = clamp01(to_double(value));
    res.est_error = to_double(tail + pre * moment_err + maxmag * detail::real_eps() * (k + 1)) +
                    1e-40 * to_double(maxmag);
    res.terms_used = k + 1;
    if (res.est_error > 1e3 * cfg.tol)
        throw CancellationAlarm("truncated-moment series error bound " + fmt(res.est_error) + " at r=" + fmt(r) +
                                " exceeds tol; use the double series (thm41)");

    std::ostringstream os;
    os.precision(15);
    // Mixture form of the same series.
    const Real lambda = cfg.lambda.kind == LambdaStrategy::Kind::fixed ? Real(cfg.lambda.value)
                                                                        : truncated_mixture_lambda(c, tm.Mbar);
    const Real y = lambda * Real(r);
    const int km = std::min(ladder_order(p.an(), to_double(y)), static_cast<int>(tm.Mbar.size()) - 1);
    try {
        const TruncatedWeights w = truncated_mixture_weights(tm, p, lambda, km);
        const std::vector<Real> g = detail::gamma_ladder(an, y, km);
        Real mix = 0, mix_err = 0;
        for (int i = 0; i <= km; ++i) {
            mix += w.weight[i] * g[i];
            mix_err += w.err_bound[i] * abs(g[i]);
        }
        os << "mixture=" << to_double(mix + bt) << " mixture_err=" << to_double(mix_err)
           << " lambda=" << to_double(lambda);
    } catch (const NumericalError& e) {
        os << "mixture unavailable (" << e.what() << ")";
    }
    if (p.alpha == 1.0) os << " boundary-check=" << to_double(abs(bt - boundary_terms_exponential(n, r)));
    res.diagnostics = os.str();
    return res;
}

SampleVarianceModel::SampleVarianceModel(ModelParams params, EvalConfig cfg)
    : params_(params), cfg_(cfg), cache_(params, 256) {
    params_.validate(2);
    cfg_.validate();
}

int SampleVarianceModel::order_budget() const {
    return static_cast<int>(std::min<long>(kMaxMomentOrder, 2L * cfg_.max_j + cfg_.max_k));
}

std::shared_ptr<const AngleCoefficients> SampleVarianceModel::angle() const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (angle_) return angle_;
    }
    auto a = std::make_shared<const AngleCoefficients>(solve_angle_coeffs(params_));
    std::lock_guard<std::mutex> lock(mutex_);
    if (!angle_) angle_ = a;
    return angle_;
}

std::shared_ptr<const TruncatedMoments> SampleVarianceModel::truncated(int kmax) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (truncated_ && static_cast<int>(truncated_->Mbar.size()) > kmax) return truncated_;
    }
    const auto a = angle();
    auto tm = with_table(cache_, 2 * kmax + 64, kMaxMomentOrder, [&](const MomentTable& t) {
        return std::make_shared<const TruncatedMoments>(truncated_moments(*a, t, kmax));
    });
    std::lock_guard<std::mutex> lock(mutex_);
    if (!truncated_ || truncated_->Mbar.size() < tm->Mbar.size()) truncated_ = tm;
    return truncated_;
}

std::vector<double> SampleVarianceModel::outer_terms(double z, int jmax) const {
    return with_table(cache_, 2 * jmax + 64, kMaxMomentOrder,
                      [&](const MomentTable& t) { return svar_outer_terms(t, z, jmax, cfg_); });
}

SeriesResult SampleVarianceModel::mixture_route(double z) const {
    int K = 256;
    const int budget = order_budget();
    for (;;) {
        auto table = cache_.at_least(K);
        std::shared_ptr<const SvarMixturePlan> plan;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!plan_ || plan_->table_ptr() != table)
                plan_ = std::make_shared<const SvarMixturePlan>(table, resolve_lambda(*table, cfg_.lambda));
            plan = plan_;
        }
        try {
            return svar_cdf_mixture(*plan, z, cfg_);
        } catch (const BudgetExceeded& e) {
            const int needed = static_cast<int>(e.needed());
            if (needed <= table->K() || needed > budget) throw;
            K = std::max(needed, std::min(budget, 2 * table->K()));
        }
    }
}

SeriesResult SampleVarianceModel::truncated_route(double z) const {
    const double r = std::sqrt(z);
    const int kmax = truncated_order_needed(params_, r, cfg_.tol) + 8;
    if (kmax > cfg_.max_k)
        throw BudgetExceeded("truncated-moment series needs " + std::to_string(kmax) +
                                 " terms, above max_k; use the double series (thm41)",
                             static_cast<std::size_t>(kmax));
    const auto a = angle();
    const auto tm = truncated(kmax);
    return svar_cdf_integer_alpha(*a, *tm, r, cfg_);
}

SeriesResult SampleVarianceModel::auto_route(double z) const {
    SeriesResult res;
    if (z == 0) {
        res.representation = Representation::series;
        return res;
    }
    // Integer alpha near the origin: the truncated-moment series needs only
    // a few terms there, while the outer sum of the double series is long.
    const bool integer_route = params_.integer_alpha() && [&] {
        try {
            angle();
            return true;
        } catch (const NumericalError&) {
            return false;
        }
    }();
    const double x0 = std::sqrt(z * params_.n * (params_.n - 1));
    if (integer_route && x0 <= kTruncatedAutoRadius) {
        try {
            res = truncated_route(z);
            res.diagnostics += "; auto: truncated";
            return res;
        } catch (const NumericalError&) {
        }
    }
    // Cancellation precheck on the j = 0 term.
    double ratio = 0;
    try {
        ratio = with_table(cache_, 256, order_budget(), [&](const MomentTable& t) {
            SeriesTerms terms(t, std::sqrt(z), cfg_);
            const Term first = terms.next();
            return to_double(first.maxmag / std::max(abs(first.value), Real(1e-300)));
        });
    } catch (const NumericalError&) {
        ratio = 1e300;
    }
    if (ratio < 1e6) {
        try {
            res = with_table(cache_, 256, order_budget(),
                             [&](const MomentTable& t) { return svar_cdf_series(t, z, cfg_); });
            res.diagnostics += "; auto: series";
            return res;
        } catch (const NumericalError&) {
        }
    }
    try {
        res = mixture_route(z);
        res.diagnostics += "; auto: mixture";
        return res;
    } catch (const NumericalError&) {
        if (!integer_route || x0 <= kTruncatedAutoRadius) throw;
    }
    res = truncated_route(z);
    res.diagnostics += "; auto: truncated";
    return res;
}

SeriesResult SampleVarianceModel::cdf(double s2, Representation rep) const {
    if (!(s2 >= 0) || !std::isfinite(s2)) throw DomainError("s2 must be finite and nonnegative");
    try {
        return dispatch(s2, rep);
    } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(std::string(e.what()) + " (moment order budget " + std::to_string(order_budget()) +
                                 "; loosen tol, raise max_j, or use another method)",
                             e.needed());
    }
}

SeriesResult SampleVarianceModel::dispatch(double s2, Representation rep) const {
    const double z = (params_.n - 1) * s2;
    switch (rep) {
        case Representation::automatic: return auto_route(z);
        case Representation::series:
            return with_table(cache_, 256, order_budget(),
                              [&](const MomentTable& t) { return svar_cdf_series(t, z, cfg_); });
        case Representation::svar_mixture: return mixture_route(z);
        case Representation::truncated: return truncated_route(z);
        default:
            throw DomainError("representation " + to_string(rep) + " does not apply to the sample variance");
    }
}

SeriesResult SampleVarianceModel::cdf(double s2) const { return cdf(s2, cfg_.representation); }

SeriesResult svar_cdf(const ModelParams& params, double s2, const EvalConfig& cfg) {
    return SampleVarianceModel(params, cfg).cdf(s2);
}

}  // namespace gvx
