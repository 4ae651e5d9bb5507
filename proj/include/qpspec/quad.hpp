#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace qpspec::quad {

using cplx = std::complex<double>;

// Adaptive bisection with 20-point Gauss-Legendre panels; a panel is accepted
// when it agrees with the sum over its halves.
double adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol = 1e-13, double* err = nullptr);

// Complex-valued version with an extra absolute tolerance.
cplx adaptive_c(const std::function<cplx(double)>& f, double a, double b,
                double rel_tol = 1e-13, double abs_tol = 1e-300);

// Adaptive integral over [0, inf).
double half_line(const std::function<double(double)>& f, double rel_tol = 1e-13);

// Fixed n-point Gauss-Legendre on [a, b] (n in {10, 20, 30, 40}).
double gauss(const std::function<double(double)>& f, double a, double b, int n = 40);

// Nodes and weights on [-1, 1], ascending.
struct Rule {
    std::vector<double> x, w;
};
const Rule& legendre(int n);

// S[i][j] = integral over [-1, x_i] of the j-th Lagrange basis polynomial on
// the n-point Gauss-Legendre nodes: cumulative integration of interpolants.
const std::vector<std::vector<double>>& integration_matrix(int n);

// Integral of f over theta in [0, pi] by the n-point midpoint rule.
// Exact for trigonometric polynomials of degree < 2n: this is Gauss-Chebyshev
// after the substitution E = a + (b - a)(1 - cos theta)/2.
double chebyshev(const std::function<double(double)>& f, int n);

}  // namespace qpspec::quad
