#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "twistlab/rmt_moments.hpp"

// Haar-distributed SO(2N) sampling, used as an independent Monte-Carlo
// check on the closed-form moments and the Mellin-inverted density.
// Sampling is fully deterministic: the random source is counter-based and
// every sample owns the stream keyed by its index, so results are
// bit-identical for any thread count.

namespace twistlab {

struct OrthogonalSample {
  int N = 1;
  double value = 0.0;  // det(U - I), in [0, 4^N]
  std::uint64_t seed = 0;
};

// One Haar matrix from SO(2N): a Gaussian matrix is QR-factorized with the
// sign convention diag(R) > 0 (which makes the factorization unique and
// the Q factor Haar on O(2N)); when det Q = -1 the last column is negated,
// i.e. Q is right-multiplied by the fixed reflection diag(1,...,1,-1),
// a measure-preserving bijection between the two cosets.
Eigen::MatrixXd sample_so2n(int N, std::uint64_t seed);

// Sample `index` of the stream owned by `seed`; equals
// sample_values(N, n, seed)[index] for any n > index.
OrthogonalSample draw_sample(int N, std::uint64_t seed, std::uint64_t index);

// det(U - I) through a partially pivoted LU factorization.
double char_poly_at_one(const Eigen::MatrixXd& U);

// Batch of det(U - I) draws; sample i uses stream (seed, i).
std::vector<double> sample_values(int N, std::int64_t n_samples,
                                  std::uint64_t seed, int threads = 1);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  // k <= -1/4 makes value^k heavy-tailed (the x^{-1/2} small-x law gives
  // infinite variance); the estimate is still returned but flagged.
  bool heavy_tail_warning = false;
};

MomentEstimate empirical_moment(int N, double k, std::int64_t n_samples,
                                std::uint64_t seed, int threads = 1);

struct HistSpec {
  double lo = 0.0;
  double hi = 4.0;
  int bins = 50;
};

// Normalized histogram (area = fraction of samples inside [lo, hi]);
// xs holds bin centers.
DensityGrid empirical_density(int N, std::int64_t n_samples,
                              const HistSpec& spec, std::uint64_t seed,
                              int threads = 1);

}  // namespace twistlab
