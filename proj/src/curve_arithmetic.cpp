#include "twistlab/curve_arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "twistlab/parallel.hpp"

namespace twistlab {

long long curve_discriminant(const EllipticCurveData& e) {
  const long long a1 = e.a[0], a2 = e.a[1], a3 = e.a[2], a4 = e.a[3],
                  a6 = e.a[4];
  const long long b2 = a1 * a1 + 4 * a2;
  const long long b4 = 2 * a4 + a1 * a3;
  const long long b6 = a3 * a3 + 4 * a6;
  const long long b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 +
                       a2 * a3 * a3 - a4 * a4;
  return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

const std::vector<EllipticCurveData>& builtin_curves() {
  static const std::vector<EllipticCurveData> curves = {
      {"E11", {0, -1, 1, -10, -20}, 11, +1},
      {"E19", {0, 1, 1, -9, -15}, 19, +1},
      {"E32", {0, 0, 0, -1, 0}, 32, +1},  // y^2 = x^3 - x
  };
  return curves;
}

const EllipticCurveData& builtin_curve(std::string_view label) {
  for (const auto& e : builtin_curves())
    if (e.label == label) return e;
  throw std::invalid_argument("unknown built-in curve: " + std::string(label));
}

std::vector<EllipticCurveData> load_curve_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve registry: " + path);
  std::vector<EllipticCurveData> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    EllipticCurveData e;
    if (!(ss >> e.label)) continue;  // blank line
    if (!(ss >> e.a[0] >> e.a[1] >> e.a[2] >> e.a[3] >> e.a[4] >>
          e.conductor))
      throw std::runtime_error("curve registry: malformed line: " + line);
    if (!(ss >> e.root_number)) e.root_number = +1;
    if (e.root_number != 1 && e.root_number != -1)
      throw std::runtime_error("curve registry: root number must be +-1");
    if (curve_discriminant(e) == 0)
      throw std::runtime_error("curve registry: singular model: " + e.label);
    out.push_back(std::move(e));
  }
  return out;
}

EllipticCurveData find_curve(std::string_view label,
                             const std::string& registry_path) {
  if (!registry_path.empty()) {
    for (auto& e : load_curve_registry(registry_path))
      if (e.label == label) return e;
  }
  return builtin_curve(label);
}

namespace {

inline long long mod_ll(long long a, long long m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

// Legendre symbol table mod an odd prime p: chi[v] in {-1, 0, +1}.
std::vector<std::int8_t> legendre_table(long long p) {
  std::vector<std::int8_t> chi(std::size_t(p), -1);
  chi[0] = 0;
  for (long long x = 1; x <= (p - 1) / 2; ++x)
    chi[std::size_t((x * x) % p)] = 1;
  return chi;
}

// a_p at a prime of bad reduction via the smooth locus:
// #E_ns(F_p) = p - a_p with a_p = +1 split, -1 non-split, 0 additive.
int ap_bad_prime(const EllipticCurveData& e, long long p) {
  const long long a1 = mod_ll(e.a[0], p), a2 = mod_ll(e.a[1], p),
                  a3 = mod_ll(e.a[2], p), a4 = mod_ll(e.a[3], p),
                  a6 = mod_ll(e.a[4], p);
  if (p == 2 || p == 3 || p * p <= 4096) {
    // direct smooth-point count, O(p^2), plenty for small bad primes
    long long smooth = 1;  // point at infinity
    for (long long x = 0; x < p; ++x) {
      for (long long y = 0; y < p; ++y) {
        const long long F =
            mod_ll(y * y + a1 * x * y + a3 * y -
                       (((x * x) % p) * x % p + a2 * x * x + a4 * x + a6),
                   p);
        if (F != 0) continue;
        const long long fy = mod_ll(2 * y + a1 * x + a3, p);
        const long long fx = mod_ll(a1 * y - 3 * x * x - 2 * a2 * x - a4, p);
        if (fy == 0 && fx == 0) continue;
        ++smooth;
      }
    }
    return int(p - smooth);
  }
  // odd p: complete the square, f(x) = 4x^3 + b2 x^2 + 2 b4 x + b6 has a
  // multiple root x0; node is split iff x0 - x1 is a square, where x1 is
  // the remaining simple root (triple root = additive).
  const long long b2 = mod_ll(a1 * a1 + 4 * a2, p);
  const long long b4 = mod_ll(2 * a4 + a1 * a3, p);
  const long long b6 = mod_ll(a3 * a3 + 4 * a6, p);
  const auto chi = legendre_table(p);
  long long x0 = -1;
  for (long long x = 0; x < p; ++x) {
    const long long f =
        mod_ll(4 * ((x * x) % p) * x + b2 * x * x + 2 * b4 * x + b6, p);
    const long long fp = mod_ll(12 * x * x + 2 * b2 * x + 2 * b4, p);
    if (f == 0 && fp == 0) {
      x0 = x;
      break;
    }
  }
  if (x0 < 0)
    throw std::runtime_error("ap_point_count: no singular point at bad prime");
  const long long fpp = mod_ll(24 * x0 + 2 * b2, p);
  if (fpp == 0) return 0;  // additive
  // sum of roots = -b2/4: x1 = -b2/4 - 2 x0
  long long inv4 = 1;
  {  // modular inverse of 4 mod p (p odd): (p+1)/4 doubling trick
    long long t = (p + 1) / 2;         // inverse of 2
    inv4 = (t % p) * (t % p) % p;      // inverse of 4
  }
  const long long x1 = mod_ll(-(b2 % p) * inv4 % p - 2 * x0, p);
  return chi[std::size_t(mod_ll(x0 - x1, p))];
}

}  // namespace

int ap_point_count(const EllipticCurveData& e, long long p) {
  if (p < 2) throw std::invalid_argument("ap_point_count: p must be prime");
  if (e.conductor % p == 0) return ap_bad_prime(e, p);
  if (p == 2) {
    long long count = 1;
    for (long long x = 0; x < 2; ++x)
      for (long long y = 0; y < 2; ++y)
        if (mod_ll(y * y + e.a[0] * x * y + e.a[2] * y - x * x * x -
                       e.a[1] * x * x - e.a[3] * x - e.a[4],
                   2) == 0)
          ++count;
    return int(2 + 1 - count);
  }
  // a_p = -sum_x chi(4x^3 + b2 x^2 + 2 b4 x + b6), via finite differences:
  // three additions mod p per x, no multiplies in the loop.
  const long long b2 = mod_ll(e.a[0] * e.a[0] + 4 * e.a[1], p);
  const long long b4 = mod_ll(2 * e.a[3] + e.a[0] * e.a[2], p);
  const long long b6 = mod_ll(e.a[2] * e.a[2] + 4 * e.a[4], p);
  const auto chi = legendre_table(p);
  // f(0), and forward differences at x=0:
  //   d1 = f(x+1)-f(x) = 4(3x^2+3x+1) + b2(2x+1) + 2 b4
  //   d2 = d1(x+1)-d1(x) = 24 x + 24 + 2 b2,  d3 = 24
  unsigned long long f = std::uint64_t(b6);
  unsigned long long d1 = std::uint64_t(mod_ll(4 + b2 + 2 * b4, p));
  unsigned long long d2 = std::uint64_t(mod_ll(24 + 2 * b2, p));
  const unsigned long long d3 = std::uint64_t(24 % p);
  const unsigned long long up = std::uint64_t(p);
  long long sum = 0;
  for (long long x = 0; x < p; ++x) {
    sum += chi[std::size_t(f)];
    f += d1;
    if (f >= up) f -= up;
    d1 += d2;
    if (d1 >= up) d1 -= up;
    d2 += d3;
    if (d2 >= up) d2 -= up;
  }
  return int(-sum);
}

std::vector<long long> primes_upto(long long limit) {
  std::vector<long long> primes;
  if (limit < 2) return primes;
  std::vector<std::uint8_t> composite(std::size_t(limit) + 1, 0);
  for (long long i = 2; i <= limit; ++i) {
    if (composite[std::size_t(i)]) continue;
    primes.push_back(i);
    for (long long j = i * i; j <= limit; j += i) composite[std::size_t(j)] = 1;
  }
  return primes;
}

namespace {

struct ApCacheHeader {
  char magic[8] = {'T', 'L', 'A', 'P', '0', '1', '\n', 0};
  long long limit = 0;
};

std::string ap_cache_path(const std::string& dir,
                          const EllipticCurveData& e) {
  return dir + "/ap_" + e.label + ".bin";
}

bool load_ap_cache(const std::string& path, long long want_limit,
                   std::vector<long long>& primes,
                   std::vector<std::int32_t>& aps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  ApCacheHeader h;
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::string_view(h.magic, 6) != "TLAP01" || h.limit < want_limit)
    return false;
  primes = primes_upto(h.limit);
  aps.resize(primes.size());
  in.read(reinterpret_cast<char*>(aps.data()),
          std::streamsize(aps.size() * sizeof(std::int32_t)));
  return bool(in);
}

void store_ap_cache(const std::string& path, long long limit,
                    const std::vector<std::int32_t>& aps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return;  // cache is best-effort
  ApCacheHeader h;
  h.limit = limit;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  out.write(reinterpret_cast<const char*>(aps.data()),
            std::streamsize(aps.size() * sizeof(std::int32_t)));
}

// a_p for all primes <= limit; interleaved stripes over the prime list so
// the expensive large primes spread evenly, slot-per-prime writes keep the
// result independent of the thread count.
std::vector<std::int32_t> ap_sweep(const EllipticCurveData& e,
                                   const std::vector<long long>& primes,
                                   int threads) {
  std::vector<std::int32_t> aps(primes.size());
  indexed_parallel(primes.size(), threads, [&](std::size_t i) {
    aps[i] = std::int32_t(ap_point_count(e, primes[i]));
  });
  return aps;
}

}  // namespace

CoefficientTable an_table(const EllipticCurveData& e, long long limit,
                          int threads, const std::string& cache_dir) {
  if (limit < 1) throw std::invalid_argument("an_table: limit >= 1");
  std::vector<long long> primes;
  std::vector<std::int32_t> aps;
  bool cached = false;
  if (!cache_dir.empty())
    cached = load_ap_cache(ap_cache_path(cache_dir, e), limit, primes, aps);
  if (!cached) {
    primes = primes_upto(limit);
    aps = ap_sweep(e, primes, threads);
    if (!cache_dir.empty())
      store_ap_cache(ap_cache_path(cache_dir, e), limit, aps);
  }

  CoefficientTable table;
  table.curve_label = e.label;
  table.limit = limit;
  table.an.assign(std::size_t(limit) + 1, 0);
  table.an[1] = 1;
  if (limit == 1) return table;

  // smallest prime factor sieve, then one multiplicative pass
  std::vector<std::int32_t> spf(std::size_t(limit) + 1, 0);
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const long long p = primes[i];
    if (p > limit) break;
    for (long long m = p; m <= limit; m += p)
      if (!spf[std::size_t(m)]) spf[std::size_t(m)] = std::int32_t(p);
  }
  std::vector<std::int32_t> ap_of(std::size_t(limit) + 1, 0);
  for (std::size_t i = 0; i < primes.size(); ++i)
    if (primes[i] <= limit) ap_of[std::size_t(primes[i])] = aps[i];

  // ppart[n] = p^e part of n for p = spf(n)
  std::vector<std::int64_t> ppart(std::size_t(limit) + 1, 0);
  ppart[1] = 1;
  for (long long n = 2; n <= limit; ++n) {
    const long long p = spf[std::size_t(n)];
    const long long m = n / p;
    const long long q = (m % p == 0) ? ppart[std::size_t(m)] * p : p;
    ppart[std::size_t(n)] = q;
    if (q == n) {
      // prime power p^e
      if (n == p) {
        table.an[std::size_t(n)] = ap_of[std::size_t(p)];
      } else if (e.conductor % p == 0) {
        table.an[std::size_t(n)] =
            std::int32_t(std::int64_t(ap_of[std::size_t(p)]) *
                         table.an[std::size_t(n / p)]);
      } else {
        const std::int64_t prev = table.an[std::size_t(n / p)];
        const std::int64_t prev2 =
            (n / p == p) ? 1 : table.an[std::size_t(n / (p * p))];
        table.an[std::size_t(n)] =
            std::int32_t(ap_of[std::size_t(p)] * prev - p * prev2);
      }
    } else {
      table.an[std::size_t(n)] =
          std::int32_t(std::int64_t(table.an[std::size_t(q)]) *
                       table.an[std::size_t(n / q)]);
    }
  }
  return table;
}

int kronecker(long long d, long long n) {
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  int t = 1;
  if (n < 0) {
    n = -n;
    if (d < 0) t = -t;
  }
  while (n % 2 == 0) {
    n /= 2;
    if (d % 2 == 0) return 0;
    const long long dm8 = mod_ll(d, 8);
    if (dm8 == 3 || dm8 == 5) t = -t;
  }
  long long a = mod_ll(d, n);
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      const long long nm8 = n % 8;
      if (nm8 == 3 || nm8 == 5) t = -t;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) t = -t;
    a %= n;
  }
  return n == 1 ? t : 0;
}

namespace {

bool is_squarefree(long long m) {
  if (m < 0) m = -m;
  for (long long q = 2; q * q <= m; ++q)
    if (m % (q * q) == 0) return false;
  return true;
}

}  // namespace

bool is_fundamental_discriminant(long long d) {
  if (d == 0 || d == 1) return false;
  const long long r = mod_ll(d, 4);
  if (r == 1) return is_squarefree(d);
  if (r == 0) {
    const long long m = d / 4;
    const long long rm = mod_ll(m, 4);
    return (rm == 2 || rm == 3) && is_squarefree(m);
  }
  return false;
}

long long divisor_count(long long n) {
  if (n < 0) n = -n;
  if (n == 0) throw std::domain_error("divisor_count: n != 0");
  long long count = 1;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    long long e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    count *= (e + 1);
  }
  if (n > 1) count *= 2;
  return count;
}

std::vector<long long> fundamental_discriminants(long long lo_abs,
                                                 long long hi_abs,
                                                 const DiscriminantFilter& f) {
  if (lo_abs < 1) lo_abs = 1;
  if (hi_abs < lo_abs) return {};
  // sieve squarefree and (optionally) prime flags up to hi_abs
  std::vector<std::uint8_t> sqfree(std::size_t(hi_abs) + 1, 1);
  for (long long q = 2; q * q <= hi_abs; ++q)
    for (long long m = q * q; m <= hi_abs; m += q * q)
      sqfree[std::size_t(m)] = 0;
  std::vector<std::uint8_t> prime;
  if (f.prime_only) {
    prime.assign(std::size_t(hi_abs) + 1, 1);
    if (hi_abs >= 0) prime[0] = 0;
    if (hi_abs >= 1) prime[1] = 0;
    for (long long q = 2; q * q <= hi_abs; ++q)
      if (prime[std::size_t(q)])
        for (long long m = q * q; m <= hi_abs; m += q)
          prime[std::size_t(m)] = 0;
  }

  auto fundamental = [&](long long d) {
    const long long r = mod_ll(d, 4);
    if (r == 1) return bool(sqfree[std::size_t(std::llabs(d))]);
    if (r == 0) {
      const long long m = d / 4;
      const long long rm = mod_ll(m, 4);
      return (rm == 2 || rm == 3) && bool(sqfree[std::size_t(std::llabs(m))]);
    }
    return false;
  };

  std::vector<long long> out;
  for (long long ad = std::max<long long>(3, lo_abs); ad <= hi_abs; ++ad) {
    for (int sgn : {-1, +1}) {
      const long long d = sgn * ad;
      if (f.d_sign != 0 && sgn != f.d_sign) continue;
      if (f.odd_only && ad % 2 == 0) continue;
      if (f.prime_only && !prime[std::size_t(ad)]) continue;
      if (f.coprime_to > 1 && std::gcd(ad, f.coprime_to) != 1) continue;
      if (!fundamental(d)) continue;
      if (f.even_sign_for) {
        const auto& e = *f.even_sign_for;
        if (e.root_number * kronecker(d, -e.conductor) != 1) continue;
      }
      out.push_back(d);
    }
  }
  return out;
}

EulerProductValue arithmetic_factor_ak(const EllipticCurveData& e, double k,
                                       long long prime_cutoff, int threads,
                                       const std::string& cache_dir) {
  if (prime_cutoff < 2)
    throw std::invalid_argument("arithmetic_factor_ak: cutoff >= 2");
  std::vector<long long> primes;
  std::vector<std::int32_t> aps;
  if (cache_dir.empty() ||
      !load_ap_cache(ap_cache_path(cache_dir, e), prime_cutoff, primes, aps)) {
    primes = primes_upto(prime_cutoff);
    aps = ap_sweep(e, primes, threads);
    if (!cache_dir.empty())
      store_ap_cache(ap_cache_path(cache_dir, e), prime_cutoff, aps);
  }
  const double half_cut = double(prime_cutoff) / 2.0;
  double log_acc = 0.0;
  double log_at_half = 0.0;
  bool half_set = false;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const double p = double(primes[i]);
    if (primes[i] > prime_cutoff) break;
    if (!half_set && p > half_cut) {
      log_at_half = log_acc;
      half_set = true;
    }
    const double ap = double(aps[i]);
    const bool bad = (e.conductor % primes[i] == 0);
    const double shift = bad ? 0.0 : 1.0 / p;
    const double base_minus = 1.0 - ap / p + shift;
    const double base_plus = 1.0 + ap / p + shift;
    const double bracket =
        0.5 * (std::pow(base_minus, -k) + std::pow(base_plus, -k)) *
            (p / (p + 1.0)) +
        1.0 / (p + 1.0);
    log_acc += 0.5 * k * (k - 1.0) * std::log1p(-1.0 / p) + std::log(bracket);
  }
  if (!half_set) log_at_half = log_acc;
  EulerProductValue out;
  out.value = std::exp(log_acc);
  out.tail_estimate = std::abs(out.value - std::exp(log_at_half));
  return out;
}

}  // namespace twistlab
