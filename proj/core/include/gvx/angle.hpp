#pragma once

#include <vector>

#include "gvx/coeffs.hpp"
#include "gvx/real.hpp"

namespace gvx {

// Polynomial cdf of tan(Phi) on [0, (n-1)^{-1/2}] for integer alpha.
struct AngleCoefficients {
    ModelParams params;
    int N = 0;                   // floor((alpha-1) n / 2)
    std::vector<Real> a;         // a_{2j}, j = 0..N
    Real norm;                   // Gamma(alpha n) / (Gamma(alpha)^n n^{alpha n / 2})
    double cond_estimate = 0.0;  // 1-norm condition number of the scaled system
    double residual = 0.0;       // relative residual of the unscaled system
    Real W_at_phi_n;             // W((n-1)^{-1/2})
};

// Upper end (n-1)^{-1/2} of the polynomial's validity interval.
double tan_phi_n(int n);

AngleCoefficients solve_angle_coeffs(const ModelParams& params);

double tan_cdf(const AngleCoefficients& coeffs, double t);
Real tan_cdf(const AngleCoefficients& coeffs, const Real& t);
double tan_pdf(const AngleCoefficients& coeffs, double t);

// Truncated moments E((cos Phi)^{alpha n + k}; tan Phi > (n-1)^{-1/2}), k = 0..kmax.
std::vector<Real> truncated_cos_moments(const AngleCoefficients& coeffs, const MomentTable& table, int kmax);
// Closed form used for alpha = 1.
std::vector<Real> truncated_cos_moments_exponential(const MomentTable& table, int kmax);

// Truncated moments of cot(Phi)^{alpha n + k}, k = 0..kmax, summed until the
// geometric tail bound falls below rel_tol relative to the partial sum.
// Throws BudgetExceeded (with the gbar order needed) when gbar is too short.
std::vector<Real> truncated_cot_moments(const std::vector<Real>& gbar, const ModelParams& params, int kmax,
                                        double rel_tol);

struct CotMoments {
    std::vector<Real> value;
    std::vector<Real> err;  // truncation plus propagated gbar error
};

// As above with absolute errors of gbar: each series also stops once its tail
// bound falls below the accumulated propagated error.
CotMoments truncated_cot_moments(const std::vector<Real>& gbar, const std::vector<Real>& gbar_err,
                                 const ModelParams& params, int kmax, double rel_tol);

}  // namespace gvx
