#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace qpspec {

using cplx = std::complex<double>;

// Finite-gap spectrum: bands [E1,E2], [E3,E4], ..., [E_{2g+1}, inf).
// The quasi-momentum differential is dk = P(E) dE / (2 sqrt(R(E))) with P
// monic of degree g, R(E) = prod (E - E_j), and the g coefficients of P fixed
// by requiring the integral over every gap to vanish.
struct PeriodicSpectrum {
    std::vector<double> edges;
    int g = 0;
    std::vector<double> diff_coeffs;  // c_0 .. c_{g-1}
    std::vector<double> k_edge;       // Re k at each edge, k(E1) = 0

    double P(double E) const;
    cplx P(cplx E) const;
    double R(double E) const;
    // Branch of sqrt(R) on the sheet where Im k > 0 for Im E > 0; cuts on the
    // gaps and on (-inf, E1). Real E is read as E + i0.
    cplx sqrtR(cplx E) const;
    // Re k on gap j (1-based), i.e. the total increment over bands 1..j.
    double gap_level(int j) const { return k_edge[2 * j - 1]; }
    double band_increment(int j) const { return k_edge[2 * j - 1] - k_edge[2 * j - 2]; }
    // Integral of P/sqrt|R| over a gap, the normalization residual.
    double gap_residual(int j) const;
};

enum class Sheet { Upper, Lower };

struct Momentum {
    cplx value;
    Sheet sheet = Sheet::Upper;
    std::optional<int> band;  // 1-based, set when E is real and inside a band
};

PeriodicSpectrum build_spectrum(const std::vector<double>& edges);

// k(E). Real E is taken as the boundary value from Im E > 0.
Momentum quasi_momentum(const PeriodicSpectrum& s, cplx E, Sheet sheet = Sheet::Upper);

// Shorthand for the upper-sheet value at real E (from above).
cplx k_above(const PeriodicSpectrum& s, double E);

// k'(E) on the upper sheet. Throws BranchPointSingularity at an edge.
cplx dk_dE(const PeriodicSpectrum& s, cplx E);

// Real preimage of k. Where k equals a gap level the top of the lower band is
// returned.
double dispersion(const PeriodicSpectrum& s, double k);

// Index (1-based) of the band containing real E, or 0 if E is in a gap or
// below E1.
int band_of(const PeriodicSpectrum& s, double E);
// Index (1-based) of the gap containing real E, or 0.
int gap_of(const PeriodicSpectrum& s, double E);

namespace detail {
// Integral of |P|/(2 sqrt|R|) over [edge lo, E] within the band or gap that
// starts at edge index lo (0-based). Uses the arccos substitution.
double segment_integral(const PeriodicSpectrum& s, int lo, double E);
// Same quantity by a fixed rule: n-point Gauss-Chebyshev for a whole segment,
// n panels of Gauss-Legendre otherwise.
double segment_integral_chebyshev(const PeriodicSpectrum& s, int lo, double E, int n);
}  // namespace detail

}  // namespace qpspec
