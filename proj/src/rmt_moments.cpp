#include "twistlab/rmt_moments.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "twistlab/parallel.hpp"
#include "twistlab/special_functions.hpp"

namespace twistlab {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_n(int N) {
  if (N < 1) throw std::domain_error("SO(2N) moments: require N >= 1");
}

}  // namespace

std::complex<double> log_moment_so_even(int N, std::complex<double> s) {
  check_n(N);
  // grouped so every difference pairs nearby gammas (and cancels exactly
  // at s = 0, keeping the zeroth moment 1 to the last bit)
  std::complex<double> acc = 2.0 * N * s * kLn2;
  for (int j = 1; j <= N; ++j) {
    acc += log_gamma_complex(s + (j - 0.5)) - log_gamma_real(j - 0.5);
    acc += log_gamma_real(N + j - 1.0) -
           log_gamma_complex(s + double(j + N - 1));
  }
  return acc;
}

std::complex<double> moment_so_even(int N, std::complex<double> s) {
  return std::exp(log_moment_so_even(N, s));
}

double moment_so_even(int N, double s) {
  check_n(N);
  if (s <= -0.5)
    throw std::domain_error("moment_so_even: pole region s <= -1/2");
  double acc = 2.0 * N * s * kLn2;
  for (int j = 1; j <= N; ++j) {
    acc += log_gamma_real(s + j - 0.5) - log_gamma_real(j - 0.5);
    acc += log_gamma_real(N + j - 1.0) - log_gamma_real(s + j + N - 1.0);
  }
  return std::exp(acc);
}

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// num/den *= f, reducing first and checking for 128-bit overflow.
void mul_reduced(i128& num, i128& den, i128 fn, i128 fd) {
  i128 g1 = gcd128(fn, den);
  fn /= g1;
  den /= g1;
  i128 g2 = gcd128(num, fd);
  num /= g2;
  fd /= g2;
  constexpr i128 kMax = (i128(1) << 126);
  if ((fn != 0 && num > kMax / (fn < 0 ? -fn : fn)) || den > kMax / fd)
    throw std::overflow_error("g_k_product: fraction exceeds 128 bits");
  num *= fn;
  den *= fd;
}

}  // namespace

double g_k_product(int k) {
  if (k < 1) throw std::domain_error("g_k_product: require k >= 1");
  i128 num = 1, den = 1;
  for (int i = 0; i < k * (k + 1) / 2; ++i) mul_reduced(num, den, 2, 1);
  for (int l = 1; l <= k - 1; ++l) {
    i128 fn = 1, fd = 1;
    for (int i = 2; i <= l; ++i) fn *= i;
    for (int i = 2; i <= 2 * l; ++i) {
      fd *= i;
      i128 g = gcd128(fn, fd);
      fn /= g;
      fd /= g;
    }
    mul_reduced(num, den, fn, fd);
  }
  return double(num) / double(den);
}

double g_k_barnes(double k) {
  if (k < 0.0) throw std::domain_error("g_k_barnes: require k >= 0");
  const double lg = 0.5 * k * k * kLn2 + log_barnes_g(1.0 + k) +
                    0.5 * log_gamma_real(1.0 + 2.0 * k) -
                    0.5 * (log_barnes_g(1.0 + 2.0 * k) +
                           log_gamma_real(1.0 + k));
  return std::exp(lg);
}

double moment_asymptotic_ratio(int N, int k) {
  check_n(N);
  if (k < 1) throw std::domain_error("moment_asymptotic_ratio: k >= 1");
  double log_m = 2.0 * N * k * kLn2;
  for (int j = 1; j <= N; ++j) {
    log_m += log_gamma_real(N + j - 1.0) + log_gamma_real(k + j - 0.5) -
             log_gamma_real(j - 0.5) - log_gamma_real(double(k + j + N - 1));
  }
  const double log_pred =
      std::log(g_k_product(k)) + 0.5 * k * (k - 1.0) * std::log(double(N));
  return std::exp(log_m - log_pred);
}

double log_h_small_x(int N) {
  check_n(N);
  double acc = -N * kLn2 - log_gamma_real(double(N));
  for (int j = 1; j <= N; ++j) {
    acc += log_gamma_real(N + j - 1.0) + log_gamma_real(double(j)) -
           log_gamma_real(j - 0.5) - log_gamma_real(j + N - 1.5);
  }
  return acc;
}

double h_small_x(int N) { return std::exp(log_h_small_x(N)); }

namespace {

// One evaluation of F(s) = M_O(N,s) x^{-s}.  The gamma products over j
// are collapsed to two log-gammas plus a run of complex logs,
//   sum_j ln Gamma(s+j-1/2)  = N ln Gamma(s+1/2) + sum_i (N-i) ln(s+i-1/2),
//   sum_j ln Gamma(s+j+N-1) = N ln Gamma(s+N)   + sum_i (N-1-i) ln(s+N+i),
// which is 5-10x cheaper for large N.  Branch offsets of 2*pi*i between
// the two representations are killed by the final exp.
struct MellinIntegrand {
  int N;
  double log_x;
  double const_term;  // sum_j [ln Gamma(N+j-1) - ln Gamma(j-1/2)]

  MellinIntegrand(int N_, double x) : N(N_), log_x(std::log(x)) {
    const_term = 0.0;
    for (int j = 1; j <= N; ++j)
      const_term += log_gamma_real(N + j - 1.0) - log_gamma_real(j - 0.5);
  }

  std::complex<double> operator()(std::complex<double> s) const {
    std::complex<double> acc =
        const_term + s * (2.0 * N * kLn2 - log_x) +
        double(N) * (log_gamma_complex(s + 0.5) -
                     log_gamma_complex(s + double(N)));
    for (int i = 1; i <= N - 1; ++i)
      acc += double(N - i) * std::log(s + (i - 0.5));
    for (int i = 0; i <= N - 2; ++i)
      acc -= double(N - 1 - i) * std::log(s + double(N + i));
    return std::exp(acc);
  }
};

}  // namespace

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGLNode[20] = {
    -0.9931285991850949248, -0.9639719272779137913, -0.9122344282513259059,
    -0.8391169718222188234, -0.7463319064601507926, -0.6360536807265150255,
    -0.510867001950827098,  -0.3737060887154195607, -0.2277858511416450781,
    -0.07652652113349733375, 0.07652652113349733375, 0.2277858511416450781,
    0.3737060887154195607,  0.510867001950827098,   0.6360536807265150255,
    0.7463319064601507926,  0.8391169718222188234,  0.9122344282513259059,
    0.9639719272779137913,  0.9931285991850949248};
constexpr double kGLWeight[20] = {
    0.01761400713915211831, 0.04060142980038694133, 0.06267204833410906357,
    0.08327674157670474872, 0.101930119817240435,   0.1181945319615184173,
    0.1316886384491766269,  0.1420961093183820513,  0.1491729864726037468,
    0.1527533871307258507,  0.1527533871307258507,  0.1491729864726037468,
    0.1420961093183820513,  0.1316886384491766269,  0.1181945319615184173,
    0.101930119817240435,   0.08327674157670474872, 0.06267204833410906357,
    0.04060142980038694133, 0.01761400713915211831};

struct PanelSum {
  std::complex<double> value;
  double abs_mass = 0.0;  // sum |w F|, sets the roundoff floor
};

// integral of F over a set of contour panels, each panel a straight
// segment [a, b] in the s-plane, split into 2^level halves
PanelSum gl_panels(const MellinIntegrand& F,
                   const std::vector<std::complex<double>>& edges,
                   int level) {
  PanelSum out;
  const int splits = 1 << level;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const std::complex<double> a = edges[e];
    const std::complex<double> step = (edges[e + 1] - a) / double(splits);
    for (int s = 0; s < splits; ++s) {
      const std::complex<double> mid = a + (s + 0.5) * step;
      std::complex<double> acc = 0.0;
      double mass = 0.0;
      for (int i = 0; i < 20; ++i) {
        const std::complex<double> v = F(mid + 0.5 * kGLNode[i] * step);
        acc += kGLWeight[i] * v;
        mass += kGLWeight[i] * std::abs(v);
      }
      out.value += 0.5 * step * acc;
      out.abs_mass += 0.5 * std::abs(step) * mass;
    }
  }
  return out;
}

}  // namespace

// Mellin inversion along a bent contour: a vertical segment up to the bend
// height, then a ray tilted into the upper-left half-plane (the lower half
// is its mirror image and is folded in through Im).  For 0 < x < 4^N the
// integrand decays like exp(-tau |cos phi| ln(4^N/x)) along the ray, on
// top of the polynomial decay |t|^{-N(N-1/2)} of the gamma ratios, so no
// poles are crossed and the tail is summable for every N >= 1.  Each piece
// is analytic, integrated by Gauss-Legendre panels sized against the local
// oscillation; all panels are halved per round until two rounds agree.
double density_po(int N, double x, const DensityParams& params) {
  check_n(N);
  if (!(x > 0.0)) throw std::domain_error("density_po: require x > 0");
  const double log_support = 2.0 * N * kLn2;  // ln(4^N)
  if (std::log(x) >= log_support) return 0.0;
  const double c = params.contour_c;
  if (c <= -0.5)
    throw std::domain_error("density_po: contour must satisfy c > -1/2");

  const double lambda = log_support - std::log(x);
  const double t0 =
      params.bend_height > 0.0 ? params.bend_height : std::max(10.0, double(N));
  const double phi = params.ray_angle;
  const std::complex<double> ray_dir(std::cos(phi), std::sin(phi));
  const double ray_rate = -std::cos(phi) * lambda;  // > 0 since phi > pi/2
  const MellinIntegrand F(N, x);
  const std::complex<double> bend(c, t0);
  const double eps = params.eps_abs;

  // panel widths keyed to the local oscillation: the x^{-s} 4^{Ns} factor
  // contributes frequency ~ lambda, the gamma ratios ~ N(N-1/2)/|s|
  const double freq_gamma = N * (N - 0.5) / t0;
  std::vector<std::complex<double>> edges;
  const double w_vert = std::min(
      t0 / 2.0, 10.0 * M_PI / (1.0 + lambda + 0.7 * N));
  const int n_vert = std::max(2, int(std::ceil(t0 / w_vert)));
  for (int i = 0; i <= n_vert; ++i)
    edges.emplace_back(c, t0 * double(i) / n_vert);

  // ray length from the exponential envelope alone (the gamma-ratio decay
  // only shortens the true tail); geometric panel growth is safe because
  // the polynomial decay has killed the integrand long before the panels
  // get wide
  const double f_bend = std::abs(F(bend)) + 1e-300;
  const double target = eps * M_PI * x / 20.0;
  const double tau_end =
      std::max(4.0, (std::log(f_bend) - std::log(target)) / ray_rate + 4.0);
  double tau = 0.0;
  double w = 8.0 * M_PI / (1.0 + lambda + freq_gamma);
  while (tau < tau_end) {
    tau = std::min(tau + w, tau_end);
    edges.push_back(bend + tau * ray_dir);
    // grow geometrically, but never wider than the exponential envelope
    w = std::min(w * 1.5, 6.0 / ray_rate);
  }

  double prev = 0.0;
  bool have_prev = false;
  for (int level = 0; level <= params.max_refine; ++level) {
    const PanelSum u = gl_panels(F, edges, level);
    const double p = u.value.imag() / (M_PI * x);
    // achievable accuracy is bounded below by roundoff: cancellation in
    // the panel sums, and (near the support edge, where the ray is long)
    // the phase noise of the individual gamma evaluations; the 2e-9
    // relative term covers the latter
    const double floor = 8.0 * 1e-16 * u.abs_mass / (M_PI * x);
    const double tol =
        std::max({0.5 * eps, 4.0 * floor, 2e-9 * std::abs(p)});
    if (have_prev && std::abs(p - prev) <= tol) return p;
    prev = p;
    have_prev = true;
  }
  throw QuadratureError("density_po: quadrature did not stabilize");
}

DensityGrid density_grid(int N, double xmin, double xmax, int points,
                         const DensityParams& params, int threads,
                         bool log_spacing) {
  check_n(N);
  if (points < 1) throw std::invalid_argument("density_grid: points >= 1");
  if (!(xmin > 0.0) || !(xmax > xmin))
    throw std::invalid_argument("density_grid: require 0 < xmin < xmax");
  DensityGrid grid;
  grid.N = N;
  grid.xs.resize(points);
  grid.ps.resize(points);
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : double(i) / (points - 1);
    grid.xs[i] = log_spacing
                     ? xmin * std::exp(f * std::log(xmax / xmin))
                     : xmin + f * (xmax - xmin);
  }
  indexed_parallel(std::size_t(points), threads, [&](std::size_t i) {
    grid.ps[Eigen::Index(i)] = density_po(N, grid.xs[Eigen::Index(i)], params);
  });
  return grid;
}

SmallXCdf cdf_small_x(int N, double X) {
  check_n(N);
  if (X < 0.0) throw std::domain_error("cdf_small_x: require X >= 0");
  SmallXCdf out;
  out.value = 2.0 * std::sqrt(X) * h_small_x(N);
  out.in_small_x_regime = (X <= 1e-2);
  return out;
}

}  // namespace twistlab
