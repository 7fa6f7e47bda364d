#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Elliptic-curve data and the arithmetic feeding the twist statistics:
// Hecke coefficients a_n from point counts, Kronecker characters,
// fundamental discriminants, and the Euler-product factor a_k(E).

namespace twistlab {

struct EllipticCurveData {
  std::string label;
  // Weierstrass coefficients a1, a2, a3, a4, a6 of a (minimal) model
  // y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
  std::array<long long, 5> a{};
  long long conductor = 0;
  int root_number = +1;  // sign w_E of the functional equation
};

// Discriminant of the Weierstrass model (must be nonzero).
long long curve_discriminant(const EllipticCurveData& e);

// The built-in curves: the unique isogeny classes at conductors 11, 19
// and the congruent-number curve y^2 = x^3 - x at conductor 32.
const std::vector<EllipticCurveData>& builtin_curves();
const EllipticCurveData& builtin_curve(std::string_view label);

// Parse a curve registry (one curve per line:
//   label a1 a2 a3 a4 a6 conductor [root_number]
// '#' starts a comment).  Built-in labels are available implicitly.
std::vector<EllipticCurveData> load_curve_registry(const std::string& path);
EllipticCurveData find_curve(std::string_view label,
                             const std::string& registry_path = "");

// a_p = p + 1 - #E(F_p) for good p, via the quadratic-character sum over
// the completed-square cubic (O(p) with a residue table).  For p | N the
// smooth locus is used: a_p = p - #E_ns(F_p), which lands in {-1, 0, +1}.
int ap_point_count(const EllipticCurveData& e, long long p);

// Hecke eigenvalues a_n, n <= limit, a_n = sqrt(n) a_n^*:
// multiplicative, with a_{p^{r+1}} = a_p a_{p^r} - p a_{p^{r-1}} at good p
// and a_{p^r} = a_p^r at bad p.
struct CoefficientTable {
  std::string curve_label;
  long long limit = 0;
  std::vector<std::int32_t> an;  // an[n], valid for 1 <= n <= limit
};

// The a_p sweep parallelizes over primes; pass cache_dir != "" to reuse
// (and incrementally extend) a per-curve table on disk.
CoefficientTable an_table(const EllipticCurveData& e, long long limit,
                          int threads = 1, const std::string& cache_dir = "");

// Kronecker symbol (d/n), fully defined for all integers.
int kronecker(long long d, long long n);

// d is a fundamental discriminant: d = 1 mod 4 squarefree, or d = 4m with
// m = 2,3 mod 4 squarefree.  (d = 1 is excluded.)
bool is_fundamental_discriminant(long long d);

// Number of divisors (used by the tau-refined discretization threshold).
long long divisor_count(long long n);

struct DiscriminantFilter {
  int d_sign = 0;            // -1: d < 0 only, +1: d > 0 only, 0: both
  bool odd_only = false;     // |d| odd
  bool prime_only = false;   // |d| prime
  long long coprime_to = 1;  // require gcd(d, coprime_to) = 1
  // When set, keep only even functional-equation twists:
  // w_E * kronecker(d, -N) = +1.
  const EllipticCurveData* even_sign_for = nullptr;
};

// All fundamental discriminants with lo_abs <= |d| <= hi_abs passing the
// filter, ascending by |d| (for equal |d| the negative one first).
std::vector<long long> fundamental_discriminants(long long lo_abs,
                                                 long long hi_abs,
                                                 const DiscriminantFilter& f);

struct EulerProductValue {
  double value = 1.0;
  // |a_k(P) - a_k(P/2)|: stabilization of the truncated product.
  double tail_estimate = 0.0;
};

// Truncated Euler product
//   a_k(E) = prod_{p <= P} (1-1/p)^{k(k-1)/2} *
//     [ ((1 - a_p/p + 1/p)^{-k} + (1 + a_p/p + 1/p)^{-k})/2 * p/(p+1)
//       + 1/(p+1) ]
// with the integer a_p (so 1 -+ a_p/p + 1/p is the normalized local Euler
// value at the center).  At p | N the 1/p inside the bases is dropped
// (degenerate Euler factor), same (p/(p+1), 1/(p+1)) weights.
EulerProductValue arithmetic_factor_ak(const EllipticCurveData& e, double k,
                                       long long prime_cutoff,
                                       int threads = 1,
                                       const std::string& cache_dir = "");

// Primes <= limit (shared sieve helper).
std::vector<long long> primes_upto(long long limit);

}  // namespace twistlab
