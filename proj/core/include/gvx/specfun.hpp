#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gvx/real.hpp"

// Special-function kernels. The templates are instantiated for double and
// gvx::Real only.
namespace gvx::specfun {

double log_gamma(double x);
Real log_gamma(const Real& x);

// Regularized lower incomplete gamma G_a(x).
template <class T>
T reg_gamma_cdf(const T& a, const T& x);

// 1 - G_a(x), evaluated without subtraction on the continued-fraction side.
template <class T>
T upper_gamma_ratio(const T& a, const T& x);

// Non-regularized incomplete beta B(a, b; x).
template <class T>
T incomplete_beta(const T& a, const T& b, const T& x);

// Complete beta B(a, b).
template <class T>
T beta(const T& a, const T& b);

// Confluent hypergeometric M(a, b; z).
double kummer_m(double a, double b, double z);

// Laplace transform E exp(-t X^2) of a squared gamma(alpha) variate.
double psi_alpha(double alpha, double t);

// Exact coefficients p*_{k,j} of the shifted Legendre polynomials on [0,1].
class ShiftedLegendre {
public:
    static constexpr int kMaxOrder = 100;

    explicit ShiftedLegendre(int kmax);

    int kmax() const noexcept { return kmax_; }
    const boost::multiprecision::cpp_int& coeff(int k, int j) const { return p_[k][j]; }

    // Row k converted to T, lowest power first.
    template <class T>
    std::vector<T> row(int k) const;

private:
    int kmax_;
    std::vector<std::vector<boost::multiprecision::cpp_int>> p_;
};

ShiftedLegendre shifted_legendre(int kmax);

// j_0(x) ... j_kmax(x).
template <class T>
std::vector<T> sph_bessel_j(int kmax, const T& x);

template <class T>
struct ScaledBesselI {
    std::vector<T> values;  // exp(-x) i_k(x), k = 0..kmax
    bool underflow = false;
};

// exp(-x) sqrt(pi/(2x)) I_{k+1/2}(x) for k = 0..kmax.
template <class T>
ScaledBesselI<T> mod_sph_bessel_i_scaled(int kmax, const T& x);

}  // namespace gvx::specfun
