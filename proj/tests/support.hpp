#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

namespace testsupport {

inline const std::vector<double>& two_gap_edges() {
    static const std::vector<double> e{0.0, 3.8571, 6.8571, 12.1004, 100.7092};
    return e;
}

// Double-exponential quadrature; handles the inverse square-root endpoints
// without any substitution, so it is independent of the library's rules.
template <class F>
double tanh_sinh(F f, double a, double b) {
    static boost::math::quadrature::tanh_sinh<double> ts(12);
    return ts.integrate(f, a, b, 1e-14);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testsupport
