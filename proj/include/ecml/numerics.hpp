#pragma once

// Special functions used by the Dirichlet losses and their gradients.
// All routines take strictly positive arguments and throw std::domain_error
// otherwise.

namespace ecml::numerics {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Digamma function psi(x) = d/dx ln Gamma(x).
/// Absolute error below 1e-12 on [1e-3, 1e6].
double digamma(double x);

/// Trigamma function psi'(x).
/// Absolute error below 1e-10 on [1e-3, 1e6].
double trigamma(double x);

/// ln Gamma(x), relative error below 1e-12 (exact zeros at x = 1 and x = 2).
double log_gamma(double x);

}  // namespace ecml::numerics
