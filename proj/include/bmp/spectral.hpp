#pragma once

#include <optional>

#include "bmp/linalg.hpp"

// ============================================================================
// Perron-Frobenius eigendata of the mean generator and the normalized
// semigroup it drives. The dominant triple (lambda, phi, phi_tilde) is the
// backbone of every limit statement in the toolkit: e^{-lambda t} psi_t[f]
// converges to phi * phi_tilde[f] at the spectral-gap rate, and the h1 gap
// measures how far the normalized kernel is from that product form.
// ============================================================================

namespace bmp::spectral {

struct SpectralData {
    double lambda = 0.0;            // dominant eigenvalue of A
    linalg::Vector phi;             // right eigenvector, > 0, phi_tilde . phi = 1
    linalg::Vector phi_tilde;       // left eigenvector, > 0, sums to 1
    std::optional<double> spectral_gap;  // lambda - max Re(other eigenvalues); absent when n = 1
    bool supercritical = false;     // lambda > 0
    double right_residual = 0.0;    // ||A phi - lambda phi||_inf / (||A||_inf ||phi||_inf)
    double left_residual = 0.0;     // same for the left pair
};

/// Dominant eigendata of an irreducible mean generator (Metzler matrix).
/// Errors: `reducible` when the off-diagonal support is not strongly
/// connected; `non_simple_leading` when the leading eigenvalue is complex or
/// not separated from the rest by 1e-8 (1 + |lambda|).
SpectralData compute_eigendata(const linalg::Matrix& a);

/// Largest real part over the spectrum of a. Used for resolvent-set and
/// overflow guards.
double max_real_eigenvalue(const linalg::Matrix& a);

/// psi_t[f] = exp(tA) f. Errors: `overflow` when lambda t > 700.
linalg::Vector semigroup_apply(const linalg::Matrix& a, double t, const linalg::Vector& f);

/// max_x sum_y | e^{-lambda t} phi(x)^{-1} exp(tA)(x, y) - phi_tilde(y) |:
/// the uniform distance of the normalized kernel from its rank-one limit.
double h1_gap(const linalg::Matrix& a, const SpectralData& sd, double t);

}  // namespace bmp::spectral
