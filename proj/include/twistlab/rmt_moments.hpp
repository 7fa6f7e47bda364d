#pragma once

#include <Eigen/Core>
#include <complex>

// Moments of |det(U - I)| over SO(2N) with Haar measure, their large-N
// asymptotics, and the value density P_O(N, x) recovered from the moments
// by numerical Mellin inversion along a vertical contour.

namespace twistlab {

// (N, s): half-dimension of SO(2N) and the moment order.  The moment
// M_O(N, s) is finite for Re s > -1/2; the first pole sits at s = -1/2.
struct MomentSpec {
  int N = 1;
  std::complex<double> s;
};

// Tabulated density values.  xs strictly increasing in (0, 4^N], ps >= 0.
struct DensityGrid {
  int N = 1;
  Eigen::ArrayXd xs;
  Eigen::ArrayXd ps;
};

// ln M_O(N, s) where
//   M_O(N,s) = 2^{2Ns} prod_{j=1}^{N}
//       Gamma(N+j-1) Gamma(s+j-1/2) / (Gamma(j-1/2) Gamma(s+j+N-1)).
// Throws std::domain_error at the poles of the gamma factors.
std::complex<double> log_moment_so_even(int N, std::complex<double> s);

std::complex<double> moment_so_even(int N, std::complex<double> s);
double moment_so_even(int N, double s);
inline std::complex<double> moment_so_even(const MomentSpec& spec) {
  return moment_so_even(spec.N, spec.s);
}

// g_k(O+) = 2^{k(k+1)/2} prod_{l=1}^{k-1} l!/(2l)!  in exact rational
// arithmetic (reduced 128-bit fraction), converted to double at the end.
// Throws std::overflow_error when the reduced fraction leaves 128 bits
// (k <= 10 is always safe).
double g_k_product(int k);

// The same constant extended to real k >= 0 through the Barnes G form
//   2^{k^2/2} G(1+k) sqrt(Gamma(1+2k)) / sqrt(G(1+2k) Gamma(1+k)).
double g_k_barnes(double k);

// M_O(N, k) / (g_k(O+) N^{k(k-1)/2}); tends to 1 as N grows.
double moment_asymptotic_ratio(int N, int k);

// Small-x density coefficient:  P_O(N, x) ~ x^{-1/2} h(N) as x -> 0+ with
//   h(N) = 2^{-N} Gamma(N)^{-1} prod_{j=1}^{N}
//       Gamma(N+j-1) Gamma(j) / (Gamma(j-1/2) Gamma(j+N-3/2)).
double h_small_x(int N);
double log_h_small_x(int N);

// Contour and quadrature controls for the Mellin inversion
//   P_O(N,x) = (1/(2 pi i x)) \int_{(c)} M_O(N,s) x^{-s} ds.
// The contour is a vertical segment |Im s| <= bend_height capped by two
// rays tilted into the left half-plane, where x^{-s} M_O(N,s) decays
// exponentially for 0 < x < 4^N.  Each analytic piece is integrated by
// Gauss-Legendre panels, all panels split in half per refinement round
// until two rounds agree within eps_abs.
struct DensityParams {
  double contour_c = 0.25;
  double eps_abs = 1e-8;
  double bend_height = 0.0;    // 0 = auto: max(10, N)
  double ray_angle = 2.35619449019234493;  // 3*pi/4
  int max_refine = 8;
};

// P_O(N, x) for x > 0.  Returns 0 for x >= 4^N.  Throws QuadratureError
// when the tail of the contour integral cannot be pushed below eps_abs.
double density_po(int N, double x, const DensityParams& params = {});

// Fill a grid of density values; points are independent, so the grid is
// split across threads with a fixed index assignment (results do not
// depend on the thread count).
DensityGrid density_grid(int N, double xmin, double xmax, int points,
                         const DensityParams& params = {}, int threads = 1,
                         bool log_spacing = false);

// Small-x cumulative law: integral of x^{-1/2} h(N) on (0, X], i.e.
// 2 sqrt(X) h(N) ~ Prob(det(U-I) <= X).  The asymptotic is trusted for
// X <= 1e-2; outside that window the value is still returned but flagged.
struct SmallXCdf {
  double value = 0.0;
  bool in_small_x_regime = true;
};
SmallXCdf cdf_small_x(int N, double X);

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace twistlab
