#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gvx/coeffs.hpp"
#include "gvx/errors.hpp"
#include "gvx/real.hpp"

namespace gvx {

enum class Representation {
    automatic,
    power,
    mixture,
    legendre,
    fourier,
    series,         // double series for the sample variance
    svar_mixture,   // gamma mixture for the sample variance
    truncated,      // truncated-moment form for integer alpha
    tan_polynomial, // polynomial cdf of tan(Phi)
    u_legendre,     // tan(Phi) through the cdf of U
};

std::string to_string(Representation rep);
// Accepts the names produced by to_string plus "auto"; throws DomainError otherwise.
Representation representation_from_string(const std::string& name);

struct LambdaStrategy {
    enum class Kind { sqrt_n, moment, fixed };
    Kind kind = Kind::sqrt_n;
    double value = 0.0;  // used by Kind::fixed
};

struct EvalConfig {
    double tol = 1e-10;
    int max_k = 2000;
    int max_j = 5000;
    Representation representation = Representation::automatic;
    LambdaStrategy lambda;
    int legendre_kmax = 40;
    int fourier_mmax = 200;

    void validate() const;
};

struct SeriesResult {
    double value = 0.0;
    double est_error = 0.0;
    int terms_used = 0;
    Representation representation = Representation::automatic;
    std::string diagnostics;
};

Real resolve_lambda(const MomentTable& table, const LambdaStrategy& strategy);

// H(r) = Pr{Z <= r^2} by the alternating power series.
SeriesResult cdf_sumsq_power(const MomentTable& table, double r, const EvalConfig& cfg);

// Mixture weights C(an+k-1, k) delta_k for a given lambda, extended until the
// weights account for the whole mass (certified when lambda = sqrt(n)).
struct MixtureWeights {
    Real lambda;
    std::vector<Real> weight;
    std::vector<Real> deficit;  // 1 - sum_{i<=k} weight_i
    bool certified = false;
};

MixtureWeights mixture_weights(const MomentTable& table, const Real& lambda, double tol);

SeriesResult cdf_sumsq_mixture(const MomentTable& table, double r, const EvalConfig& cfg);
SeriesResult cdf_sumsq_mixture(const MixtureWeights& weights, const ModelParams& params, double r,
                               const EvalConfig& cfg);

struct LegendreCoefficients {
    ModelParams params;
    std::vector<Real> c;
    std::vector<double> rel_err;
};

LegendreCoefficients legendre_coeffs(const MomentTable& table, const EvalConfig& cfg);

SeriesResult cdf_sumsq_legendre(const MomentTable& table, double r, const EvalConfig& cfg);
SeriesResult cdf_sumsq_legendre(const LegendreCoefficients& coeffs, double r, const EvalConfig& cfg);

struct FourierCoefficients {
    ModelParams params;
    std::vector<Real> b;  // b[0] is unused; b_1..b_M
};

FourierCoefficients fourier_coeffs(const LegendreCoefficients& coeffs, const EvalConfig& cfg);
FourierCoefficients fourier_coeffs(const MomentTable& table, const EvalConfig& cfg);

SeriesResult cdf_sumsq_fourier(const MomentTable& table, double r, const EvalConfig& cfg);
SeriesResult cdf_sumsq_fourier(const FourierCoefficients& coeffs, double r, const EvalConfig& cfg);

// F(u) = Pr{U <= u} on [1/sqrt(n), 1].
SeriesResult cdf_u(const MomentTable& table, double u, const EvalConfig& cfg);
SeriesResult cdf_u(const LegendreCoefficients& lc, const FourierCoefficients* fc, double u, const EvalConfig& cfg);

// Dispatching entry point.
SeriesResult cdf_sumsq(const ModelParams& params, double r, const EvalConfig& cfg);

// Moment tables that grow on demand; shared snapshots stay immutable.
class MomentCache {
public:
    explicit MomentCache(ModelParams params, int initial_order = 64);

    const ModelParams& params() const noexcept { return params_; }
    std::shared_ptr<const MomentTable> at_least(int K) const;

private:
    ModelParams params_;
    int initial_order_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const MomentTable> table_;
};

// Runs f(table) and rebuilds a larger table while f reports BudgetExceeded,
// up to the given order budget.
template <class F>
auto with_table(const MomentCache& cache, int start_order, int budget, F&& f) {
    int K = start_order;
    for (;;) {
        auto table = cache.at_least(K);
        try {
            return f(*table);
        } catch (const BudgetExceeded& e) {
            const int needed = static_cast<int>(e.needed());
            if (needed <= table->K() || needed > budget) throw;
            K = std::max(needed, std::min(budget, 2 * table->K()));
        }
    }
}

// Repeated evaluation of H and F_U for one (alpha, n); caches moments and
// expansion coefficients. Thread-safe.
class SumSquaresModel {
public:
    SumSquaresModel(ModelParams params, EvalConfig cfg);

    const ModelParams& params() const noexcept { return params_; }
    const EvalConfig& config() const noexcept { return cfg_; }

    SeriesResult cdf(double r) const;
    SeriesResult cdf(double r, Representation rep) const;
    SeriesResult cdf_u(double u) const;

    const MomentCache& moments() const noexcept { return cache_; }
    std::shared_ptr<const LegendreCoefficients> legendre() const;
    std::shared_ptr<const FourierCoefficients> fourier() const;
    std::shared_ptr<const MixtureWeights> weights() const;

private:
    int order_budget() const;

    ModelParams params_;
    EvalConfig cfg_;
    MomentCache cache_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const LegendreCoefficients> legendre_;
    mutable std::shared_ptr<const FourierCoefficients> fourier_;
    mutable std::shared_ptr<const MixtureWeights> weights_;
};

}  // namespace gvx
