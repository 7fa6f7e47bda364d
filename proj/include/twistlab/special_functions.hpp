#pragma once

#include <complex>

// Log-gamma (real and complex) and the Barnes double gamma function.
// Everything here is returned on the log scale where overflow is possible;
// callers exponentiate.  All functions are pure and reentrant.

namespace twistlab {

// ln Gamma(x) for x > 0.  Argument-shift recurrence into the Stirling
// window, then the asymptotic series with Bernoulli coefficients.
// Throws std::domain_error for x <= 0.
double log_gamma_real(double x);

// Principal-branch ln Gamma(z), continuous along vertical lines
// Re z = c > 0.  Throws std::domain_error at the poles 0, -1, -2, ...
std::complex<double> log_gamma_complex(std::complex<double> z);

// Barnes double gamma G(x) for x > 0, with G(1) = 1 and the recurrence
// G(x+1) = Gamma(x) G(x).  Throws std::domain_error for x <= 0.
double barnes_g(double x);

// ln G(x) for x > 0; use this form when G itself would overflow
// (G(n) ~ exp(n^2 log n / 2) for large n).
double log_barnes_g(double x);

}  // namespace twistlab
