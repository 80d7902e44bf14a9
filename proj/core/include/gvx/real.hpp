#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace gvx {

// Wide working type for sums that cancel heavily. The exponent range is
// effectively unbounded, so moment sequences are stored directly.
using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>,
                                           boost::multiprecision::et_off>;

inline constexpr int kRealDigits = 100;

inline double to_double(const Real& x) { return x.convert_to<double>(); }
inline double to_double(double x) { return x; }

}  // namespace gvx
