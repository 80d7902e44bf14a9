#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gvx/real.hpp"

namespace gvx::detail {

inline Real real_eps() { return std::numeric_limits<Real>::epsilon(); }

// log10 of a positive Real as double; -inf for zero.
inline double log10_abs(const Real& x) {
    if (x == 0) return -std::numeric_limits<double>::infinity();
    return to_double(log10(abs(x)));
}

// Three significant digits.
std::string fmt(double v);

// G_{a0+k}(x) for k = 0..K by downward recurrence from a directly evaluated top.
std::vector<Real> gamma_ladder(const Real& a0, const Real& x, int K);

// Digits available for cancellation after reserving a safety margin.
inline double usable_digits() { return kRealDigits - 5.0; }

// Wynn epsilon acceleration over a growing sequence of partial sums.
class WynnEpsilon {
public:
    void push(const Real& s);
    // Latest and previous accelerated estimates (same as partial sums until
    // enough terms are available).
    const Real& estimate() const { return estimate_; }
    double change() const { return change_; }
    std::size_t size() const { return count_; }

private:
    std::vector<Real> row_;  // current anti-diagonal
    Real estimate_ = 0;
    double change_ = std::numeric_limits<double>::infinity();
    std::size_t count_ = 0;
};

inline void WynnEpsilon::push(const Real& s) {
    // row_[k] = eps_k^{(m-k)} on the latest ascending diagonal; the new
    // diagonal follows eps_{k+1}^{(p)} = eps_{k-1}^{(p+1)} + 1 / (eps_k^{(p+1)} - eps_k^{(p)}).
    std::vector<Real> next;
    next.reserve(row_.size() + 1);
    next.push_back(s);
    for (std::size_t k = 0; k < row_.size(); ++k) {
        const Real lower = k == 0 ? Real(0) : row_[k - 1];
        const Real diff = next[k] - row_[k];
        if (diff == 0) break;
        next.push_back(lower + 1 / diff);
    }
    row_ = std::move(next);
    ++count_;
    std::size_t top = (row_.size() - 1) / 2 * 2;
    const Real best = row_[top];
    change_ = count_ > 1 ? to_double(abs(best - estimate_)) : std::numeric_limits<double>::infinity();
    estimate_ = best;
}

}  // namespace gvx::detail
