#pragma once

// Independent oracles used by the tests.  Everything here deliberately
// avoids the library's own code paths: different shift windows, product
// representations instead of asymptotics, direct quadrature instead of
// closed forms.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------
// Complex log-gamma by Stirling at z + shift with recurrence pull-back.
// The shift threshold is a parameter so the oracle can cross-check itself
// at two different windows.
inline std::complex<double> lgamma_shifted(std::complex<double> z,
                                           double threshold) {
  static constexpr double coeff[] = {
      1.0 / 12.0,           -1.0 / 360.0,         1.0 / 1260.0,
      -1.0 / 1680.0,        1.0 / 1188.0,         -691.0 / 360360.0,
      1.0 / 156.0,          -3617.0 / 122400.0,   43867.0 / 244188.0,
      -174611.0 / 125400.0,
  };
  std::complex<double> shift = 0.0;
  while (z.real() < threshold) {
    shift -= std::log(z);
    z += 1.0;
  }
  const std::complex<double> inv = 1.0 / z;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> sum = 0.0;
  std::complex<double> power = inv;
  for (double c : coeff) {
    sum += c * power;
    power *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.91893853320467274178 + sum + shift;
}

// Cross-checked at two shift windows; throws if they disagree.
inline std::complex<double> lgamma_oracle(std::complex<double> z) {
  const std::complex<double> a = lgamma_shifted(z, 25.0);
  const std::complex<double> b = lgamma_shifted(z, 40.0);
  if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
    throw std::runtime_error("lgamma oracle: shift windows disagree");
  return a;
}

// ---------------------------------------------------------------------
// Barnes G by the Weierstrass-type product
//   ln G(1+z) = (z/2) ln(2 pi) - z(z+1)/2 - gamma z^2/2
//               + sum_{k>=1} [ k ln(1+z/k) - z + z^2/(2k) ],
// truncated at K with Euler-Maclaurin tail corrections
//   term_k = sum_{m>=3} (-1)^{m-1} z^m / (m k^{m-1}).
// Stability between K and 2K is asserted.
inline double log_barnes_g_product_once(double z, long long K) {
  constexpr double kEulerGamma = 0.57721566490153286061;
  constexpr double kLog2Pi = 1.83787706640934548356;
  double sum = 0.0;
  for (long long k = K; k >= 1; --k) {  // ascending magnitude
    const double zk = z / double(k);
    sum += double(k) * std::log1p(zk) - z + 0.5 * z * zk;
  }
  // tail: sum_{m=3..10} (-1)^{m-1} z^m/m * S_{m-1}(K),
  // S_j(K) = sum_{k>K} k^{-j} ~ K^{1-j}/(j-1) - K^{-j}/2 + j K^{-j-1}/12
  double tail = 0.0;
  double zm = z * z;
  for (int m = 3; m <= 10; ++m) {
    zm *= z;
    const int j = m - 1;
    const double S = std::pow(double(K), 1.0 - j) / (j - 1.0) -
                     0.5 * std::pow(double(K), double(-j)) +
                     j / 12.0 * std::pow(double(K), -j - 1.0);
    tail += ((m % 2) ? 1.0 : -1.0) * zm / m * S;
  }
  return 0.5 * z * kLog2Pi - 0.5 * z * (z + 1.0) -
         0.5 * kEulerGamma * z * z + sum + tail;
}

// G(x) for 0 < x <= 3.5 (larger arguments via the recurrence in the test).
inline double barnes_g_product_oracle(double x) {
  const double z = x - 1.0;
  const double a = log_barnes_g_product_once(z, 200000);
  const double b = log_barnes_g_product_once(z, 400000);
  if (std::abs(a - b) > 1e-11)
    throw std::runtime_error("barnes product oracle: truncation unstable");
  return std::exp(b);
}

// ---------------------------------------------------------------------
// (1/2pi) int_0^{2pi} (2 - 2 cos t)^s dt by doubling trapezoid (periodic).
inline double so2_moment_quadrature(double s) {
  double prev = 0.0;
  for (int n = 64; n <= (1 << 22); n *= 2) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * M_PI * (i + 0.5) / n;
      sum += std::pow(2.0 - 2.0 * std::cos(t), s);
    }
    const double val = sum / n;
    if (n > 64 && std::abs(val - prev) < 1e-10 * (1.0 + std::abs(val)))
      return val;
    prev = val;
  }
  return prev;
}

// ---------------------------------------------------------------------
// 20-point Gauss-Legendre panel rule.
struct GL20 {
  static constexpr std::array<std::array<double, 2>, 20> nw = {{
      {-0.9931285991850949248, 0.01761400713915211831},
      {-0.9639719272779137913, 0.04060142980038694133},
      {-0.9122344282513259059, 0.06267204833410906357},
      {-0.8391169718222188234, 0.08327674157670474872},
      {-0.7463319064601507926, 0.101930119817240435},
      {-0.6360536807265150255, 0.1181945319615184173},
      {-0.510867001950827098, 0.1316886384491766269},
      {-0.3737060887154195607, 0.1420961093183820513},
      {-0.2277858511416450781, 0.1491729864726037468},
      {-0.07652652113349733375, 0.1527533871307258507},
      {0.07652652113349733375, 0.1527533871307258507},
      {0.2277858511416450781, 0.1491729864726037468},
      {0.3737060887154195607, 0.1420961093183820513},
      {0.510867001950827098, 0.1316886384491766269},
      {0.6360536807265150255, 0.1181945319615184173},
      {0.7463319064601507926, 0.101930119817240435},
      {0.8391169718222188234, 0.08327674157670474872},
      {0.9122344282513259059, 0.06267204833410906357},
      {0.9639719272779137913, 0.04060142980038694133},
      {0.9931285991850949248, 0.01761400713915211831},
  }};

  template <typename F>
  static double panel(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (const auto& [x, w] : nw) sum += w * f(mid + half * x);
    return half * sum;
  }

  template <typename F>
  static double panels(F&& f, const std::vector<double>& edges) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      sum += panel(f, edges[i], edges[i + 1]);
    return sum;
  }
};

inline std::vector<double> linspace_edges(double a, double b, int n) {
  std::vector<double> e(std::size_t(n) + 1);
  for (int i = 0; i <= n; ++i) e[std::size_t(i)] = a + (b - a) * i / n;
  return e;
}

inline std::vector<double> logspace_edges(double a, double b, int n) {
  std::vector<double> e(std::size_t(n) + 1);
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i <= n; ++i)
    e[std::size_t(i)] = std::exp(la + (lb - la) * i / n);
  return e;
}

// ---------------------------------------------------------------------
// Kolmogorov-Smirnov statistic of sorted (ascending) u in [0,1] against
// the uniform CDF.  1% critical value ~ 1.6276/sqrt(n).
inline double ks_statistic_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = double(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::abs((i + 1) / n - u[i]));
    d = std::max(d, std::abs(u[i] - i / n));
  }
  return d;
}

// two-sample KS statistic; 1% critical value ~ 1.6276 sqrt((m+n)/(mn))
inline double ks_statistic_two_sample(std::vector<double> a,
                                      std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace oracles
