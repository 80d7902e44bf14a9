#pragma once

#include <vector>

#include "gvx/real.hpp"

namespace gvx {

// Gamma(alpha) parent with sample size n.
struct ModelParams {
    double alpha = 1.0;
    int n = 1;

    double an() const noexcept { return alpha * n; }
    bool integer_alpha() const noexcept;
    // Throws DomainError unless alpha > 0 and n >= min_n.
    void validate(int min_n = 1) const;
};

// Moments of cos(Phi) up to order K together with the beta coefficients.
// Immutable after construction.
class MomentTable {
public:
    MomentTable(ModelParams params, std::vector<Real> beta_abs, std::vector<Real> mu, std::vector<Real> gamma);

    const ModelParams& params() const noexcept { return params_; }
    int K() const noexcept { return static_cast<int>(mu_.size()) - 1; }

    // |beta_k|; the sign is (-1)^k.
    const std::vector<Real>& beta_abs() const noexcept { return beta_abs_; }
    // mu_k = E (sqrt(n) cos Phi)^{alpha n + k}
    const std::vector<Real>& mu() const noexcept { return mu_; }
    // gamma_k = E (cos Phi)^{alpha n + k}
    const std::vector<Real>& gamma() const noexcept { return gamma_; }

    int beta_sign(int k) const noexcept { return k % 2 == 0 ? 1 : -1; }
    double log_abs_beta(int k) const;
    double log_mu(int k) const;
    double log_gamma_moment(int k) const;

private:
    ModelParams params_;
    std::vector<Real> beta_abs_;
    std::vector<Real> mu_;
    std::vector<Real> gamma_;
};

// Truncated convolution power c^{*n}, entries 0..K, by square-and-multiply.
std::vector<Real> convolution_power(const std::vector<Real>& c, int n, int K);

// |beta_{alpha,n,k}| for k = 0..K.
std::vector<Real> build_beta(const ModelParams& params, int K);

MomentTable build_moments(const ModelParams& params, int K);

// mu_k / lambda^{alpha n + k}
std::vector<Real> scaled_moments(const MomentTable& table, const Real& lambda);

struct DiffWeights {
    std::vector<Real> delta;      // alternating differences delta_0..delta_kmax
    std::vector<Real> err_bound;  // absolute rounding bound per entry
    Real scaled_max;              // largest input entry

    // Rounding bound within 1e-6 of the entry (or of sqrt(eps) scaled_max).
    bool reliable(int k) const;
};

// delta_k = sum_j (-1)^j C(k,j) s_j by repeated adjacent differencing.
// With check set, throws CancellationAlarm unless every weight is reliable.
DiffWeights diff_weights(const std::vector<Real>& scaled, int kmax, bool check = true);
// Same, with absolute error bounds on the inputs carried into err_bound.
DiffWeights diff_weights(const std::vector<Real>& scaled, const std::vector<Real>& scaled_err, int kmax,
                         bool check = true);

// (E U^{-alpha n})^{1/(alpha n)} in closed form.
double lambda_star(const ModelParams& params);

// E U^{2k} for k = 0..kmax.
std::vector<double> u2_moments(const ModelParams& params, int kmax);
std::vector<Real> u2_moments_real(const ModelParams& params, int kmax);

// Largest supported moment order.
inline constexpr int kMaxMomentOrder = 10000;

}  // namespace gvx
