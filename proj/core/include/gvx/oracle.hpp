#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gvx/coeffs.hpp"
#include "gvx/sumsq.hpp"

namespace gvx {

// Sampling is split into blocks of kSampleBlock rows. Block b draws from an
// mt19937_64 seeded with splitmix64 applied b + 1 times to the user seed, so
// the output does not depend on how blocks are spread over workers.
inline constexpr std::size_t kSampleBlock = 4096;

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t block_seed(std::uint64_t seed, std::size_t block);

// Unit-scale gamma(alpha) variates. threads = 0 uses the hardware count.
std::vector<double> sample_gamma(double alpha, std::size_t count, std::uint64_t seed, int threads = 0);

// rows x n gamma(alpha) variates, row-major.
struct SampleMatrix {
    ModelParams params;
    std::size_t rows = 0;
    std::vector<double> x;

    const double* row(std::size_t i) const { return x.data() + i * static_cast<std::size_t>(params.n); }
};

SampleMatrix sample_rows(const ModelParams& params, std::size_t rows, std::uint64_t seed, int threads = 0);

enum class Statistic { Z, S2, tanPhi, U, cosPow };

std::string to_string(Statistic s);

// Per-row values: Z = sum x^2, S2 = (n-1) s^2, tanPhi, U = sqrt(Z)/Y and
// cosPow = (cos Phi)^{alpha n + k}. Throws DomainError for n < 2 where the
// statistic needs it.
std::vector<double> row_statistic(const SampleMatrix& s, Statistic stat, int k = 0);

struct MomentEstimate {
    double mean = 0.0;
    double se = 0.0;
};

MomentEstimate mc_moment(const std::vector<double>& values);

// Largest relative gap between (n-1) s^2 and (u^2 - 1/n) y^2 over the rows,
// both sides in double-double.
double identity_violation(const SampleMatrix& s);
// True if 1/sqrt(n) <= u <= 1 holds for every row (up to rounding).
bool u_bounds_hold(const SampleMatrix& s);

// Pr{X1^2 + X2^2 <= r^2} for gamma(alpha) pairs by quadrature.
double quad_cdf_n2(double alpha, double r);

struct KsResult {
    double distance = 0.0;
    double at = 0.0;        // sample point where the sup is attained
    std::size_t points = 0; // sample points inside the domain
    int evaluations = 0;    // cdf calls
};

// sup |Fhat - F| over the sample points in [lo, hi]. Fhat counts every sample,
// so the critical value stays 1.63/sqrt(N) with N = sorted.size(). F must be
// nondecreasing; the sup is found exactly with far fewer than N calls.
KsResult ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf,
                     double lo = -HUGE_VAL, double hi = HUGE_VAL);

inline double ks_critical(std::size_t N) { return 1.63 / std::sqrt(static_cast<double>(N)); }

// Piecewise Chebyshev interpolant of an expensive cdf on [a, b], built in
// v = x or v = log(x - shift). Pieces start at degree 8, double up to 32 and
// are halved after that. Values are clamped to [0, 1]; x outside [a, b] is
// clamped to the ends.
class CdfInterpolant {
public:
    struct Options {
        double tol = 1e-7;
        bool log_scale = false;
        double shift = 0.0;
        int max_evaluations = 600;
        int checks = 4;  // extra exact evaluations compared with the interpolant
    };

    CdfInterpolant(const std::function<double(double)>& f, double a, double b, Options opt);

    double operator()(double x) const;
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int evaluations() const noexcept { return evaluations_; }
    int pieces() const noexcept { return static_cast<int>(pieces_.size()); }
    // Largest of the coefficient-tail estimates and the check deviations.
    double error_estimate() const noexcept { return error_; }

private:
    struct Piece {
        double v0, v1;
        std::vector<double> c;
    };

    double to_v(double x) const;

    double a_, b_;
    Options opt_;
    std::vector<Piece> pieces_;
    int evaluations_ = 0;
    double error_ = 0.0;
};

struct VerificationReport {
    struct KsEntry {
        Statistic statistic;
        double distance = 0.0;
        double critical = 0.0;
        double lo = 0.0, hi = 0.0;
        int evaluations = 0;      // exact cdf calls
        double cdf_error = 0.0;   // bound on |cdf used - exact cdf|
        double seconds = 0.0;
        bool pass = false;
        std::string note;
    };
    struct MomentEntry {
        int k = 0;
        double exact = 0.0;
        double mean = 0.0;
        double se = 0.0;
        double z = 0.0;
        bool pass = false;
    };

    ModelParams params;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    std::vector<KsEntry> ks;
    std::vector<MomentEntry> moments;
    double identity_violation = 0.0;
    bool identity_pass = false;
    bool u_bounds_pass = false;
    double seconds = 0.0;

    bool pass() const;
};

struct VerifyOptions {
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;
    double tol = 1e-7;          // accuracy of the exact cdfs
    double interp_tol = 1e-6;   // interpolation tolerance for the costly cdfs
    double tail_quantile = 1e-4; // sample quantiles bounding the interpolation range
    int moment_kmax = 12;
    double moment_z = 4.0;
    bool statistics[4] = {true, true, true, true};  // Z, S2, tanPhi, U
};

// Samples, computes every check and compares with the exact cdfs.
VerificationReport verify(const ModelParams& params, const VerifyOptions& opt);

std::string to_json(const VerificationReport& report, int indent = 2);

}  // namespace gvx
