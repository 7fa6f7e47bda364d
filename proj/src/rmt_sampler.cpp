#include "twistlab/rmt_sampler.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "twistlab/parallel.hpp"

namespace twistlab {

namespace {

// SplitMix64 finalizer used as a counter-based source: draw i of stream
// (seed, stream) is mix(base + (i+1)*phi).  No state is carried between
// draws, so any draw is addressable directly.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;

struct CounterRng {
  std::uint64_t base;
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base(mix64(seed ^ mix64(stream * kPhi + 0xD1B54A32D192ED03ull))) {}

  double uniform(std::uint64_t i) const {
    // in (0,1): 53 mantissa bits, offset keeps 0 out
    return (mix64(base + (i + 1) * kPhi) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }
};

}  // namespace

Eigen::MatrixXd sample_so2n(int N, std::uint64_t seed) {
  if (N < 1) throw std::domain_error("sample_so2n: require N >= 1");
  const int n = 2 * N;
  const CounterRng rng(seed, 0);
  Eigen::MatrixXd a(n, n);
  // Box-Muller, two gaussians per two uniforms, column-major fill
  std::uint64_t idx = 0;
  double spare = 0.0;
  bool have_spare = false;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (have_spare) {
        a(i, j) = spare;
        have_spare = false;
      } else {
        const double u1 = rng.uniform(idx++);
        const double u2 = rng.uniform(idx++);
        const double r = std::sqrt(-2.0 * std::log(u1));
        a(i, j) = r * std::cos(2.0 * M_PI * u2);
        spare = r * std::sin(2.0 * M_PI * u2);
        have_spare = true;
      }
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& qrm = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (qrm(j, j) < 0.0) q.col(j) = -q.col(j);
  if (Eigen::PartialPivLU<Eigen::MatrixXd>(q).determinant() < 0.0)
    q.col(n - 1) = -q.col(n - 1);
  return q;
}

double char_poly_at_one(const Eigen::MatrixXd& U) {
  if (U.rows() != U.cols() || U.rows() < 2)
    throw std::invalid_argument("char_poly_at_one: square matrix expected");
  Eigen::MatrixXd m = U - Eigen::MatrixXd::Identity(U.rows(), U.cols());
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

namespace {

// det(U-I) for sample index `stream`; each sample owns its own stream.
double one_value(int N, std::uint64_t seed, std::uint64_t stream) {
  Eigen::MatrixXd u = sample_so2n(N, seed ^ mix64(stream + 1));
  return char_poly_at_one(u);
}

}  // namespace

OrthogonalSample draw_sample(int N, std::uint64_t seed, std::uint64_t index) {
  OrthogonalSample s;
  s.N = N;
  s.seed = seed;
  s.value = one_value(N, seed, index);
  return s;
}

std::vector<double> sample_values(int N, std::int64_t n_samples,
                                  std::uint64_t seed, int threads) {
  if (n_samples <= 0)
    throw std::invalid_argument("sample_values: empty sample set");
  const std::size_t count = std::size_t(n_samples);
  std::vector<double> values(count);
  indexed_parallel(count, threads, [&](std::size_t i) {
    values[i] = one_value(N, seed, std::uint64_t(i));
  });
  return values;
}

MomentEstimate empirical_moment(int N, double k, std::int64_t n_samples,
                                std::uint64_t seed, int threads) {
  if (n_samples < 1)
    throw std::invalid_argument("empirical_moment: n_samples >= 1");
  const std::vector<double> values = sample_values(N, n_samples, seed, threads);
  // fixed reduction order keyed by sample index
  double sum = 0.0, sum2 = 0.0;
  for (double v : values) {
    const double p = std::pow(v, k);
    sum += p;
    sum2 += p * p;
  }
  MomentEstimate est;
  est.n_samples = n_samples;
  est.mean = sum / double(n_samples);
  if (n_samples > 1) {
    const double var =
        std::max(0.0, (sum2 - sum * sum / double(n_samples)) /
                          double(n_samples - 1));
    est.std_error = std::sqrt(var / double(n_samples));
  }
  est.heavy_tail_warning = (k <= -0.25);
  return est;
}

DensityGrid empirical_density(int N, std::int64_t n_samples,
                              const HistSpec& spec, std::uint64_t seed,
                              int threads) {
  if (n_samples <= 0)
    throw std::invalid_argument("empirical_density: empty sample set");
  if (spec.bins < 1 || !(spec.hi > spec.lo))
    throw std::invalid_argument("empirical_density: bad bin spec");
  const std::vector<double> values = sample_values(N, n_samples, seed, threads);
  const double width = (spec.hi - spec.lo) / spec.bins;
  std::vector<std::int64_t> counts(std::size_t(spec.bins), 0);
  for (double v : values) {
    const double f = (v - spec.lo) / width;
    if (f < 0.0 || f >= spec.bins) continue;
    ++counts[std::size_t(f)];
  }
  DensityGrid grid;
  grid.N = N;
  grid.xs.resize(spec.bins);
  grid.ps.resize(spec.bins);
  for (int b = 0; b < spec.bins; ++b) {
    grid.xs[b] = spec.lo + (b + 0.5) * width;
    grid.ps[b] = double(counts[std::size_t(b)]) / (double(n_samples) * width);
  }
  return grid;
}

}  // namespace twistlab
