#include "twistlab/lvalue_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "twistlab/parallel.hpp"

namespace twistlab {

int twist_sign(const EllipticCurveData& e, long long d) {
  if (d == 0) throw std::invalid_argument("twist_sign: d != 0");
  if (std::gcd(std::llabs(d), e.conductor) != 1)
    throw std::invalid_argument("twist_sign: require gcd(d, N) = 1");
  return e.root_number * kronecker(d, -e.conductor);
}

long long series_cutoff(const EllipticCurveData& e, long long d_abs,
                        double epsilon) {
  // |a_n / n| <= d(n)/sqrt(n) <= 2, so the tail past M is below
  // 4 e^{-cM} / (1 - e^{-c}) with c = 2 pi / (|d| sqrt N).
  const double c = 2.0 * M_PI / (double(d_abs) * std::sqrt(double(e.conductor)));
  const double denom = -std::expm1(-c);
  const double m = std::log(4.0 / (denom * epsilon)) / c;
  return std::max<long long>(8, (long long)std::ceil(m));
}

namespace {

// chi_d as a table over residues mod |d| (chi_d is a character mod |d|
// for fundamental d).  Built multiplicatively: one Kronecker evaluation
// per prime below |d|, O(|d|) total.
std::vector<std::int8_t> chi_table(long long d) {
  const long long m = std::llabs(d);
  std::vector<std::int8_t> chi(std::size_t(m), 0);
  if (m == 1) {
    chi.assign(1, 1);  // chi_1(n) = 1: table of period 1
    return chi;
  }
  std::vector<std::int32_t> spf(std::size_t(m), 0);
  for (long long p = 2; p < m; ++p) {
    if (spf[std::size_t(p)]) continue;
    for (long long q = p; q < m; q += p)
      if (!spf[std::size_t(q)]) spf[std::size_t(q)] = std::int32_t(p);
  }
  if (m > 1) chi[1] = 1;
  for (long long r = 2; r < m; ++r) {
    const long long p = spf[std::size_t(r)];
    if (p == r) {
      chi[std::size_t(r)] = std::int8_t(kronecker(d, r));
    } else {
      chi[std::size_t(r)] =
          std::int8_t(chi[std::size_t(p)] * chi[std::size_t(r / p)]);
    }
  }
  return chi;
}

}  // namespace

double central_value(const EllipticCurveData& e, const CoefficientTable& an,
                     long long d, double epsilon) {
  if (d != 1 && twist_sign(e, d) != +1)
    throw std::invalid_argument(
        "central_value: odd functional equation (sign -1), value is 0");
  const long long d_abs = std::llabs(d);
  const long long M = series_cutoff(e, d_abs, epsilon);
  if (M > an.limit)
    throw std::length_error("central_value: coefficient table too short");
  const double c = 2.0 * M_PI / (double(d_abs) * std::sqrt(double(e.conductor)));
  const std::vector<std::int8_t> chi = chi_table(d);
  const double ratio = std::exp(-c);
  double weight = 1.0;
  double sum = 0.0;
  for (long long n = 1; n <= M; ++n) {
    // refresh the running exponential to stop drift
    weight = (n & 4095) ? weight * ratio : std::exp(-c * double(n));
    const int ch = chi[std::size_t(n % d_abs)];
    if (ch == 0) continue;
    sum += double(an.an[std::size_t(n)]) / double(n) * ch * weight;
  }
  return 2.0 * sum;
}

std::vector<std::int32_t> theta_coefficients_batch(const ThetaConfig& config,
                                                   long long T, int threads) {
  if (T < 1) throw std::invalid_argument("theta_coefficients_batch: T >= 1");
  for (const TernaryForm* f : {&config.form1, &config.form2})
    if (f->a < 1 || f->b < 1 || f->c < 1)
      throw std::invalid_argument("theta form must be positive definite");

  const std::size_t slots = std::size_t((T + 1) / 2);

  // representation counts r(n) for odd n <= T; for the forms in use the
  // x/z parts are even, so n odd forces y odd.
  // the odd-y shortcut below needs even x/z parts and a unit y coefficient
  for (const TernaryForm* f : {&config.form1, &config.form2})
    if (f->a % 2 != 0 || f->c % 2 != 0 || f->b != 1)
      throw std::invalid_argument(
          "theta sweep expects forms a x^2 + y^2 + c z^2 with even a, c");

  auto sweep = [&](const TernaryForm& f, int sign_mult,
                   std::vector<std::int32_t>& counts, long long x_lo,
                   long long x_hi) {
    for (long long x = x_lo; x < x_hi; ++x) {
      const long long vx = f.a * x * x;
      if (vx > T) break;
      const int wx = x == 0 ? 1 : 2;
      for (long long z = 0;; ++z) {
        const long long vxz = vx + f.c * z * z;
        if (vxz > T) break;
        const int wxz = wx * (z == 0 ? 1 : 2);
        const int w = wxz * 2 * sign_mult;  // y odd: never zero
        // y = 1, 3, 5, ...: v jumps by 8, 16, 24, ...
        long long v = vxz + 1;
        long long step = 8;
        while (v <= T) {
          if (v & 1) counts[std::size_t((v - 1) >> 1)] += w;
          v += step;
          step += 8;
        }
      }
    }
  };

  const long long xmax1 =
      (long long)std::floor(std::sqrt(double(T) / double(config.form1.a))) + 2;
  const long long xmax2 =
      (long long)std::floor(std::sqrt(double(T) / double(config.form2.a))) + 2;

  const int k = std::max(1, threads);
  if (k == 1) {
    std::vector<std::int32_t> counts(slots, 0);
    sweep(config.form1, 1, counts, 0, xmax1);
    // fold the second form in with weight -multiplier
    std::vector<std::int32_t> counts2(slots, 0);
    sweep(config.form2, 1, counts2, 0, xmax2);
    for (std::size_t i = 0; i < slots; ++i)
      counts[i] -= std::int32_t(config.multiplier) * counts2[i];
    return counts;
  }
  // sharded: each thread owns private counters over an x-stripe, exact
  // integer merge afterwards (order-independent)
  const std::size_t nk = std::size_t(k);
  std::vector<std::vector<std::int32_t>> shard1(nk), shard2(nk);
  std::vector<std::thread> pool;
  for (int t = 0; t < k; ++t) {
    pool.emplace_back([&, t]() {
      shard1[std::size_t(t)].assign(slots, 0);
      shard2[std::size_t(t)].assign(slots, 0);
      for (long long x = t; x < xmax1; x += k)
        sweep(config.form1, 1, shard1[std::size_t(t)], x, x + 1);
      for (long long x = t; x < xmax2; x += k)
        sweep(config.form2, 1, shard2[std::size_t(t)], x, x + 1);
    });
  }
  for (auto& th : pool) th.join();
  std::vector<std::int32_t> counts(slots, 0);
  for (int t = 0; t < k; ++t)
    for (std::size_t i = 0; i < slots; ++i)
      counts[i] += shard1[std::size_t(t)][i] -
                   std::int32_t(config.multiplier) * shard2[std::size_t(t)][i];
  return counts;
}

int CurveCalibration::class_key(long long d) {
  return int(std::llabs(d) % 8) + (d < 0 ? 8 : 0);
}

double CurveCalibration::kappa_for(long long d) const {
  if (single_class) return kappa.begin()->second;
  const auto it = kappa.find(class_key(d));
  if (it == kappa.end())
    throw CalibrationError("no kappa calibrated for this discriminant class");
  return it->second;
}

namespace {

// largest kappa with every sqrt(q_i/kappa) within snap_tol of a positive
// integer; candidates are q_min / j^2 (the smallest reference must carry
// some integer j >= 1).
std::optional<double> fit_kappa(const std::vector<double>& q, double snap_tol) {
  if (q.empty()) return std::nullopt;
  const double q_min = *std::min_element(q.begin(), q.end());
  if (!(q_min > 0.0)) return std::nullopt;
  for (int j = 1; j <= 64; ++j) {
    const double kappa = q_min / double(j * j);
    bool ok = true;
    for (double qi : q) {
      const double r = std::sqrt(qi / kappa);
      const double nearest = std::round(r);
      if (nearest < 1.0 || std::abs(r - nearest) > snap_tol) {
        ok = false;
        break;
      }
    }
    if (ok) return kappa;
  }
  return std::nullopt;
}

}  // namespace

CurveCalibration calibrate_kappa(const EllipticCurveData& e,
                                 std::span<const TwistRecord> references,
                                 double snap_tol) {
  std::vector<double> q_all;
  std::map<int, std::vector<double>> q_by_class;
  for (const TwistRecord& r : references) {
    if (r.sign != +1 || !(r.lvalue > 0.0))
      throw std::invalid_argument(
          "calibrate_kappa: references must have sign +1 and lvalue > 0");
    const double q = r.lvalue * std::sqrt(double(std::llabs(r.d)));
    q_all.push_back(q);
    q_by_class[CurveCalibration::class_key(r.d)].push_back(q);
  }
  if (q_all.empty())
    throw std::invalid_argument("calibrate_kappa: no references");

  CurveCalibration calib;
  calib.curve_label = e.label;
  // first hypothesis: one kappa for the whole curve
  if (auto kappa = fit_kappa(q_all, snap_tol)) {
    calib.single_class = true;
    calib.kappa[-1] = *kappa;
    return calib;
  }
  calib.single_class = false;
  for (const auto& [key, qs] : q_by_class) {
    const auto kappa = fit_kappa(qs, snap_tol);
    if (!kappa)
      throw CalibrationError(
          "calibrate_kappa: no kappa discretizes class " + std::to_string(key));
    calib.kappa[key] = *kappa;
  }
  return calib;
}

Discretized discretize(const EllipticCurveData& e,
                       const CurveCalibration& calib, long long d, double L,
                       bool tau_refined, double ambiguity_tol) {
  (void)e;
  const double kappa = calib.kappa_for(d);
  if (L < 0.0) L = 0.0;  // tiny negative series noise
  const double r = std::sqrt(L * std::sqrt(double(std::llabs(d))) / kappa);
  const double frac = r - std::floor(r);
  if (std::abs(frac - 0.5) < ambiguity_tol)
    throw DiscretizationAmbiguity(
        "discretize: value sits on a half-integer boundary");
  Discretized out;
  out.c = (long long)std::llround(r);
  if (tau_refined) {
    const double tau = double(divisor_count(d));
    out.is_zero = std::llround(r / tau) == 0;
  } else {
    out.is_zero = (out.c == 0);
  }
  return out;
}

std::map<long long, long long> load_coefficient_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient file: " + path);
  std::map<long long, long long> out;
  std::string line;
  long long prev = 0;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long d_abs, c;
    if (!(ss >> d_abs)) continue;
    if (!(ss >> c))
      throw std::runtime_error("coefficient file: malformed line: " + line);
    if (d_abs <= prev)
      throw std::runtime_error("coefficient file: |d| must be ascending");
    prev = d_abs;
    out[d_abs] = c;
  }
  return out;
}

namespace {

std::vector<long long> scan_discriminants(const ScanConfig& config,
                                          const EllipticCurveData& curve) {
  DiscriminantFilter f;
  f.odd_only = (config.parity == ParityFilter::Odd);
  f.prime_only = config.prime_only;
  f.coprime_to = curve.conductor;
  f.even_sign_for =
      (config.sign_filter == SignFilter::Even) ? &curve : nullptr;
  f.d_sign = config.d_sign == DSignFilter::Negative  ? -1
             : config.d_sign == DSignFilter::Positive ? +1
                                                      : 0;
  return fundamental_discriminants(config.dmin_abs, config.dmax_abs, f);
}

// kappa references: the smallest nonzero L sqrt|d| values (these pin the
// smallest coefficients).  The floor 30 eps sqrt|d| keeps true zeros out:
// the series tail bound caps their computed value at eps.
std::vector<TwistRecord> pick_references(const std::vector<TwistRecord>& recs,
                                         double epsilon, std::size_t want) {
  std::vector<TwistRecord> nonzero;
  for (const TwistRecord& r : recs) {
    if (r.sign != +1) continue;
    const double floor_q = 30.0 * epsilon * std::sqrt(double(std::llabs(r.d)));
    if (r.lvalue * std::sqrt(double(std::llabs(r.d))) > floor_q)
      nonzero.push_back(r);
  }
  std::sort(nonzero.begin(), nonzero.end(),
            [](const TwistRecord& a, const TwistRecord& b) {
              return a.lvalue * std::sqrt(double(std::llabs(a.d))) <
                     b.lvalue * std::sqrt(double(std::llabs(b.d)));
            });
  if (nonzero.size() > want) nonzero.resize(want);
  return nonzero;
}

ScanResult run_series_scan(const ScanConfig& config,
                           const EllipticCurveData& curve) {
  ScanResult result;
  result.curve = curve;
  const std::vector<long long> ds = scan_discriminants(config, curve);
  const long long cutoff = series_cutoff(curve, config.dmax_abs, config.epsilon);
  const CoefficientTable an =
      an_table(curve, cutoff, config.threads, config.cache_dir);

  result.records.resize(ds.size());
  indexed_parallel(ds.size(), config.threads, [&](std::size_t i) {
    TwistRecord rec;
    rec.d = ds[i];
    rec.sign = twist_sign(curve, ds[i]);
    if (rec.sign == +1) {
      rec.lvalue = central_value(curve, an, ds[i], config.epsilon);
    } else {
      rec.lvalue = 0.0;  // odd functional equation
      rec.is_zero = true;
    }
    result.records[i] = rec;
  });

  const std::vector<TwistRecord> refs =
      pick_references(result.records, config.epsilon, 64);
  if (refs.size() < 3)
    throw InsufficientData(
        "scan: too few nonzero twists to calibrate the discretization");
  result.calibration = calibrate_kappa(curve, refs);
  result.calibrated = true;
  for (TwistRecord& rec : result.records) {
    if (rec.sign != +1) continue;
    const Discretized disc = discretize(curve, result.calibration, rec.d,
                                        rec.lvalue, config.tau_refined);
    rec.c = disc.c;
    rec.is_zero = disc.is_zero;
  }
  return result;
}

ScanResult run_theta_scan(const ScanConfig& config,
                          const EllipticCurveData& curve) {
  if (curve.conductor != 32)
    throw std::invalid_argument(
        "theta engine: ternary-form route is wired for the conductor-32 "
        "curve only");
  if (config.parity != ParityFilter::Odd)
    throw std::invalid_argument("theta engine: odd discriminants only");

  ScanResult result;
  result.curve = curve;
  const std::vector<long long> ds = scan_discriminants(config, curve);
  const ThetaConfig theta;
  const std::vector<std::int32_t> c =
      theta_coefficients_batch(theta, config.dmax_abs, config.threads);

  // kappa fitted directly against the theta integers: L sqrt|d| = kappa c^2
  // on a short series reference run.  (The series engine's own
  // discretization picks the coarsest consistent lattice, which can differ
  // from the theta normalization by a constant integer factor, so kappa
  // must be tied to these coefficients, not re-derived.)
  ScanConfig ref_config = config;
  ref_config.engine = ScanEngine::Series;
  ref_config.dmin_abs = 3;
  ref_config.dmax_abs = std::min<long long>(config.dmax_abs, 1500);
  ref_config.prime_only = false;
  ref_config.epsilon = std::min(config.epsilon, 1e-8);
  const ScanResult ref = run_series_scan(ref_config, curve);
  std::vector<double> kappa_fits;
  for (const TwistRecord& r : ref.records) {
    if (r.sign != +1 || r.is_zero) continue;
    const long long d_abs = std::llabs(r.d);
    const long long ct = std::llabs(c[std::size_t((d_abs - 1) / 2)]);
    if (ct == 0) continue;
    kappa_fits.push_back(r.lvalue * std::sqrt(double(d_abs)) /
                         double(ct * ct));
  }
  if (kappa_fits.size() < 3)
    throw InsufficientData("theta engine: too few reference twists");
  std::sort(kappa_fits.begin(), kappa_fits.end());
  const double kappa_theta = kappa_fits[kappa_fits.size() / 2];
  // every reference must sit on the same lattice
  for (double k2 : kappa_fits)
    if (std::abs(k2 / kappa_theta - 1.0) > 1e-3)
      throw CalibrationError(
          "theta engine: reference twists disagree on kappa");
  result.calibration.curve_label = curve.label;
  result.calibration.single_class = true;
  result.calibration.kappa.clear();
  result.calibration.kappa[-1] = kappa_theta;
  result.calibrated = true;

  result.records.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    TwistRecord rec;
    rec.d = ds[i];
    rec.sign = twist_sign(curve, ds[i]);
    const long long d_abs = std::llabs(ds[i]);
    if (rec.sign == +1) {
      rec.c = std::llabs(c[std::size_t((d_abs - 1) / 2)]);
      rec.is_zero = (rec.c == 0);
      rec.lvalue = result.calibration.kappa_for(ds[i]) * double(rec.c) *
                   double(rec.c) / std::sqrt(double(d_abs));
    } else {
      rec.lvalue = 0.0;
      rec.is_zero = true;
    }
    result.records[i] = rec;
  }
  return result;
}

ScanResult run_import_scan(const ScanConfig& config,
                           const EllipticCurveData& curve) {
  if (config.import_path.empty())
    throw std::invalid_argument("import engine: no coefficient file given");
  const std::map<long long, long long> table =
      load_coefficient_file(config.import_path);
  ScanResult result;
  result.curve = curve;
  const std::vector<long long> ds = scan_discriminants(config, curve);
  for (long long d : ds) {
    const auto it = table.find(std::llabs(d));
    if (it == table.end())
      throw InsufficientData(
          "import engine: coefficient file does not cover |d| = " +
          std::to_string(std::llabs(d)));
    TwistRecord rec;
    rec.d = d;
    rec.sign = twist_sign(curve, d);
    if (rec.sign == +1) {
      rec.c = std::llabs(it->second);
      rec.is_zero = (rec.c == 0);
      rec.lvalue = std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.lvalue = 0.0;
      rec.is_zero = true;
    }
    result.records.push_back(rec);
  }
  return result;
}

}  // namespace

ScanResult run_scan(const ScanConfig& config) {
  if (config.dmax_abs < 3)
    throw std::invalid_argument("scan: discriminant cutoff must be >= 3");
  const EllipticCurveData curve =
      find_curve(config.curve_label, config.registry_path);
  switch (config.engine) {
    case ScanEngine::Series:
      return run_series_scan(config, curve);
    case ScanEngine::Theta:
      return run_theta_scan(config, curve);
    case ScanEngine::Import:
      return run_import_scan(config, curve);
  }
  throw std::logic_error("scan: unknown engine");
}

}  // namespace twistlab
