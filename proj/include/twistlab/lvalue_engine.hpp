#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistlab/curve_arithmetic.hpp"

// Central values L_E(1/2, chi_d) of quadratic twists:
//   * directly, by the exponentially convergent series that follows from
//     the completed functional equation (even-sign twists only), and
//   * for the conductor-32 curve, through the ternary theta-series route
//     (Tunnell): integer coefficients c(|d|) whose squares are
//     proportional to sqrt(|d|) L_E(1/2, chi_d)  (Waldspurger /
//     Kohnen-Zagier), so L = 0 is an exact integer statement.

namespace twistlab {

struct TwistRecord {
  long long d = 0;
  int sign = 0;          // w_E * chi_d(-N)
  double lvalue = 0.0;   // central value (0 identically when sign = -1)
  long long c = -1;      // discretized coefficient; -1 = not calibrated
  bool is_zero = false;
};

// sign of the twisted functional equation, w_E * kronecker(d, -N).
// Rejects d with gcd(d, N) > 1.
int twist_sign(const EllipticCurveData& e, long long d);

// L_E(1/2, chi_d) = 2 sum_{n>=1} (a_n / n) chi_d(n) exp(-2 pi n/(|d| sqrt N))
// truncated once the divisor-bound tail 4 e^{-cM}/c falls below epsilon.
// Requires sign +1 (d = 1 is accepted as the untwisted smoke value).
// The an table must reach the truncation point, else std::length_error.
double central_value(const EllipticCurveData& e, const CoefficientTable& an,
                     long long d, double epsilon = 1e-8);

// Truncation point of the series for a given |d| and tolerance.
long long series_cutoff(const EllipticCurveData& e, long long d_abs,
                        double epsilon);

// Positive-definite diagonal ternary form a x^2 + b y^2 + c z^2.
struct TernaryForm {
  long long a = 1, b = 1, c = 1;
};

// Tunnell wiring for the conductor-32 curve, odd discriminants:
//   c(n) = r_1(n) - multiplier * r_2(n)
// with r_i(n) the representation counts of the two forms.  Treated as
// configuration; the cross-engine equivalence tests pin it down.
struct ThetaConfig {
  TernaryForm form1{2, 1, 8};
  TernaryForm form2{2, 1, 32};
  long long multiplier = 2;
};

// c(n) for all odd n <= T, indexed by (n-1)/2.  Single sweep over the
// lattice points of both ellipsoids (O(T^{3/2}) work); thread shards own
// disjoint counter arrays that are summed afterwards, so the counts are
// exact and independent of the thread count.
std::vector<std::int32_t> theta_coefficients_batch(const ThetaConfig& config,
                                                   long long T,
                                                   int threads = 1);

// kappa of L = kappa c^2 / sqrt|d|, fitted per discretization class.
// Classes: -1 = all discriminants share one kappa; otherwise the key is
// (|d| mod 8) + 8*(d < 0).
struct CurveCalibration {
  std::string curve_label;
  bool single_class = true;
  std::map<int, double> kappa;

  static int class_key(long long d);
  double kappa_for(long long d) const;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DiscretizationAmbiguity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fit kappa from reference twists with sign +1 and lvalue > 0: the largest
// kappa such that sqrt(L sqrt|d| / kappa) lands within snap_tol of a
// positive integer for every reference.  A single class is attempted
// first; on failure the references split by (|d| mod 8, sign d).
CurveCalibration calibrate_kappa(const EllipticCurveData& e,
                                 std::span<const TwistRecord> references,
                                 double snap_tol = 1e-3);

struct Discretized {
  long long c = 0;
  bool is_zero = false;
};

// c = nearest integer to sqrt(L sqrt|d| / kappa); L vanishes iff the value
// sits below the discretization threshold kappa/sqrt|d| (equivalently
// c = 0).  With tau_refined the threshold grows to kappa tau(d)^2/sqrt|d|
// (the coefficients of the conductor-32 curve are divisible by tau(d) for
// squarefree d), i.e. zero iff c rounds below tau(d).
Discretized discretize(const EllipticCurveData& e,
                       const CurveCalibration& calib, long long d, double L,
                       bool tau_refined = false, double ambiguity_tol = 1e-3);

// Coefficient-file import: one "|d| c" pair per line, ascending |d|,
// '#' comments.
std::map<long long, long long> load_coefficient_file(const std::string& path);

enum class ScanEngine { Series, Theta, Import };
enum class ParityFilter { Odd, All };
enum class SignFilter { Even, All };
enum class DSignFilter { Negative, Positive, Both };

struct ScanConfig {
  std::string curve_label = "E32";
  long long dmin_abs = 3;
  long long dmax_abs = 1000;
  ParityFilter parity = ParityFilter::Odd;
  SignFilter sign_filter = SignFilter::Even;
  DSignFilter d_sign = DSignFilter::Both;
  bool prime_only = false;
  ScanEngine engine = ScanEngine::Series;
  double epsilon = 1e-8;
  bool tau_refined = false;
  std::string import_path;
  int threads = 1;
  std::string cache_dir;
  std::string registry_path;
};

struct ScanResult {
  EllipticCurveData curve;
  std::vector<TwistRecord> records;  // ascending |d|
  CurveCalibration calibration;
  bool calibrated = false;
};

// Run a family scan.  Series engine: L-values summed per twist (parallel
// across twists), kappa calibrated from the largest nonzero references,
// then every record discretized.  Theta engine (conductor 32, odd d):
// exact integer coefficients; lvalue is reconstructed as kappa c^2/sqrt|d|
// after calibrating kappa against a short series run.  Import engine:
// exact coefficients from a file.
ScanResult run_scan(const ScanConfig& config);

}  // namespace twistlab
