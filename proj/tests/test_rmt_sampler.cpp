#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "twistlab/rmt_moments.hpp"
#include "twistlab/rmt_sampler.hpp"

using namespace twistlab;

TEST_CASE("sample_so2n: orthogonality, determinant, reproducibility") {
  for (int N : {1, 3, 10, 50}) {
    const Eigen::MatrixXd u = sample_so2n(N, 42);
    const int n = 2 * N;
    const double ortho =
        (u.transpose() * u - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    CHECK(ortho <= 1e-12);
    const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(u).determinant();
    CHECK(std::abs(det - 1.0) <= 1e-9);
  }
  // same seed, same matrix, bitwise
  const Eigen::MatrixXd a = sample_so2n(4, 123), b = sample_so2n(4, 123);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd c = sample_so2n(4, 124);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("char_poly_at_one on rotations") {
  Eigen::MatrixXd u(2, 2);
  // identity (degenerate): det(U - I) = 0
  u = Eigen::MatrixXd::Identity(2, 2);
  CHECK(char_poly_at_one(u) == doctest::Approx(0.0).epsilon(1e-14));
  // rotation by pi: 2 - 2 cos(pi) = 4
  u << -1, 0, 0, -1;
  CHECK(char_poly_at_one(u) == doctest::Approx(4.0).epsilon(1e-14));
  // rotation by pi/2: 2 - 2 cos(pi/2) = 2
  u << 0, -1, 1, 0;
  CHECK(char_poly_at_one(u) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("SO(2) rotation angle is uniform (KS at the 1% level)") {
  const int n = 100000;
  const std::vector<double> values = sample_values(1, n, 2024);
  // det(U-I) = 2 - 2 cos(theta); theta uniform on (-pi, pi] means
  // u = |theta|/pi should be uniform on (0,1)
  std::vector<double> u;
  u.reserve(values.size());
  for (double v : values) {
    const double ct = 1.0 - v / 2.0;
    u.push_back(std::acos(std::min(1.0, std::max(-1.0, ct))) / M_PI);
  }
  const double d = oracles::ks_statistic_uniform(u);
  CHECK(d < 1.6276 / std::sqrt(double(n)));
}

TEST_CASE("Haar invariance: det(VU - I) distributed like det(U - I)") {
  const int N = 3, n = 10000;
  const Eigen::MatrixXd v = sample_so2n(N, 99991);
  std::vector<double> base(n), shifted(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd u = sample_so2n(N, 5000000u + std::uint64_t(i));
    base[std::size_t(i)] = char_poly_at_one(u);
    shifted[std::size_t(i)] = char_poly_at_one(v * u);
  }
  const double d = oracles::ks_statistic_two_sample(base, shifted);
  CHECK(d < 1.6276 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("empirical moments vs closed form") {
  // k = 0 is exactly 1
  const MomentEstimate zero = empirical_moment(2, 0.0, 500, 3);
  CHECK(zero.mean == 1.0);
  CHECK(zero.std_error == 0.0);

  const MomentEstimate m1 = empirical_moment(5, 1.0, 100000, 11);
  CHECK(std::abs(m1.mean - moment_so_even(5, 1.0)) <= 3.0 * m1.std_error);
  const MomentEstimate m2 = empirical_moment(5, 2.0, 100000, 12);
  CHECK(std::abs(m2.mean - moment_so_even(5, 2.0)) <= 3.0 * m2.std_error);
  CHECK_FALSE(m1.heavy_tail_warning);
  CHECK(empirical_moment(2, -0.3, 500, 5).heavy_tail_warning);
}

TEST_CASE("seed determinism across thread counts") {
  const std::vector<double> s1 = sample_values(3, 2000, 77, 1);
  const std::vector<double> s4 = sample_values(3, 2000, 77, 4);
  REQUIRE(s1.size() == s4.size());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s4[i]);
  // addressable single draws match the batch
  CHECK(draw_sample(3, 77, 0).value == s1[0]);
  CHECK(draw_sample(3, 77, 1234).value == s1[1234]);
  const MomentEstimate a = empirical_moment(3, 1.0, 2000, 77, 1);
  const MomentEstimate b = empirical_moment(3, 1.0, 2000, 77, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("empirical density: N=1 arcsine law, multinomial 3 sigma") {
  const int n = 1000000, bins = 40;
  const HistSpec spec{0.0, 4.0, bins};
  const DensityGrid hist = empirical_density(1, n, spec, 31337);
  const double width = 4.0 / bins;
  // interior bins only (edge bins integrate a singular density)
  for (int b = 1; b + 1 < bins; ++b) {
    const double lo = b * width, hi = lo + width;
    // closed-form bin mass of the arcsine law: CDF = (2/pi) asin(sqrt(x)/2)
    auto cdf = [](double x) { return 2.0 / M_PI * std::asin(std::sqrt(x) / 2.0); };
    const double p = cdf(hi) - cdf(lo);
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(hist.ps[b] * width - p) <= 3.5 * sigma);
  }
}

namespace {

// expected probability mass of [lo, hi] under P_O(N, .); the x = v^2
// substitution handles the x^{-1/2} behavior at the left edge
double model_bin_mass(int N, double lo, double hi) {
  DensityParams params;
  params.eps_abs = 1e-9;
  auto g = [&](double v) { return 2.0 * v * density_po(N, v * v, params); };
  return oracles::GL20::panels(
      g, oracles::linspace_edges(std::sqrt(lo), std::sqrt(hi), 2));
}

}  // namespace

TEST_CASE("empirical density: N=20 bulk agreement with density_po") {
  const int n = 20000, bins = 25;
  const HistSpec spec{0.0, 25.0, bins};
  const DensityGrid hist = empirical_density(20, n, spec, 555);
  const double width = 1.0;
  int checked = 0;
  for (int b = 0; b < bins; ++b) {
    const double mass = model_bin_mass(20, b * width, (b + 1) * width);
    if (mass * n < 100.0) continue;  // bulk bins only
    const double sigma = std::sqrt(mass * (1.0 - mass) / n);
    CHECK(std::abs(hist.ps[b] * width - mass) <= 5.0 * sigma);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("empirical density input validation") {
  CHECK_THROWS_AS(empirical_density(2, 0, HistSpec{}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_values(2, -5, 1), std::invalid_argument);
}
