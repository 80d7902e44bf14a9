#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "gvx/angle.hpp"
#include "gvx/coeffs.hpp"
#include "gvx/real.hpp"
#include "gvx/sumsq.hpp"

namespace gvx {

// Representation-level functions take z = (n-1) s^2 = r^2 and return
// Pr{(n-1) S^2 <= z}.

// Double series over j (outer) and k (inner).
SeriesResult svar_cdf_series(const MomentTable& table, double z, const EvalConfig& cfg);

// Outer terms j = 0..jmax of the double series at z. Throws BudgetExceeded if
// the table is too short.
std::vector<double> svar_outer_terms(const MomentTable& table, double z, int jmax, const EvalConfig& cfg);

// Per-j gamma-mixture weights for one lambda, extended lazily in j and k.
// Thread-safe.
class SvarMixturePlan {
public:
    SvarMixturePlan(std::shared_ptr<const MomentTable> table, Real lambda);

    struct Row {
        std::vector<Real> weight;  // C(an+k-1, k) delta_{j,k} (lambda^2/n)^j
        std::vector<Real> err;     // rounding bound per weight
    };

    const Real& lambda() const noexcept { return lambda_; }
    const MomentTable& table() const noexcept { return *table_; }
    const std::shared_ptr<const MomentTable>& table_ptr() const noexcept { return table_; }

    // Row j with at least kmax + 1 weights. Throws BudgetExceeded when
    // 2j + kmax exceeds the table.
    std::shared_ptr<const Row> row(int j, int kmax) const;

private:
    std::shared_ptr<const MomentTable> table_;
    Real lambda_;
    mutable std::mutex mutex_;
    mutable std::vector<std::shared_ptr<const Row>> rows_;
};

SeriesResult svar_cdf_mixture(const SvarMixturePlan& plan, double z, const EvalConfig& cfg);
SeriesResult svar_cdf_mixture(const MomentTable& table, double z, const EvalConfig& cfg);

// Integer alpha: truncated-moment route.
struct TruncatedMoments {
    std::vector<Real> gbar;  // truncated cos moments
    std::vector<Real> Mbar;  // truncated cot moments, k = 0..kmax
    std::vector<Real> Mbar_err;
};

// gbar from the full table, Mbar to order kmax. Throws BudgetExceeded with
// the table order needed.
TruncatedMoments truncated_moments(const AngleCoefficients& coeffs, const MomentTable& table, int kmax);

// Order of Mbar needed by svar_cdf_integer_alpha at radius r.
int truncated_order_needed(const ModelParams& params, double r, double tol);

// W(1/sqrt(n-1)) G_an(x0) + the tail integral over x > x0, x0 = r sqrt(n(n-1)).
Real boundary_terms(const AngleCoefficients& coeffs, double r);
// Closed form of the same two terms for alpha = 1.
Real boundary_terms_exponential(int n, double r);

// Weights C(an+k-1, k) Dbar_k of the truncated-moment mixture, k = 0..kmax,
// with absolute bounds seeded from Mbar_err. Entries whose bound exceeds
// 1e-6 of their size carry no sign information.
struct TruncatedWeights {
    std::vector<Real> weight;
    std::vector<Real> err_bound;
    int resolved = 0;  // leading entries with a resolved sign
};
TruncatedWeights truncated_mixture_weights(const TruncatedMoments& tm, const ModelParams& params,
                                           const Real& lambda, int kmax);
// sqrt(n) (Mbar_0 / (1 - W(1/sqrt(n-1))))^{1/(an)}.
Real truncated_mixture_lambda(const AngleCoefficients& coeffs, const std::vector<Real>& Mbar);

// Pr{sqrt(n-1) S <= r}; diagnostics carry the mixture value and, for
// alpha = 1, the boundary-term check.
SeriesResult svar_cdf_integer_alpha(const AngleCoefficients& coeffs, const TruncatedMoments& tm, double r,
                                    const EvalConfig& cfg);

// Public entry point: Pr{S^2 <= s2}.
SeriesResult svar_cdf(const ModelParams& params, double s2, const EvalConfig& cfg);

// Repeated evaluation for one (alpha, n). Thread-safe.
class SampleVarianceModel {
public:
    SampleVarianceModel(ModelParams params, EvalConfig cfg);

    const ModelParams& params() const noexcept { return params_; }
    const EvalConfig& config() const noexcept { return cfg_; }

    // Pr{S^2 <= s2}.
    SeriesResult cdf(double s2) const;
    // representation: automatic, series, svar_mixture or truncated.
    SeriesResult cdf(double s2, Representation rep) const;

    std::vector<double> outer_terms(double z, int jmax) const;

    std::shared_ptr<const AngleCoefficients> angle() const;
    std::shared_ptr<const TruncatedMoments> truncated(int kmax) const;

private:
    int order_budget() const;
    SeriesResult dispatch(double s2, Representation rep) const;
    SeriesResult auto_route(double z) const;
    SeriesResult mixture_route(double z) const;
    SeriesResult truncated_route(double z) const;

    ModelParams params_;
    EvalConfig cfg_;
    MomentCache cache_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const SvarMixturePlan> plan_;
    mutable std::shared_ptr<const AngleCoefficients> angle_;
    mutable std::shared_ptr<const TruncatedMoments> truncated_;
};

}  // namespace gvx
