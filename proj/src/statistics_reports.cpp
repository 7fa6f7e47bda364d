#include "twistlab/statistics_reports.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twistlab {

long long vanishing_count(std::span<const TwistRecord> records, long long T) {
  long long count = 0;
  for (const TwistRecord& r : records)
    if (r.sign == +1 && r.is_zero && std::llabs(r.d) <= T) ++count;
  return count;
}

long long family_count(std::span<const TwistRecord> records, long long T) {
  long long count = 0;
  for (const TwistRecord& r : records)
    if (r.sign == +1 && std::llabs(r.d) <= T) ++count;
  return count;
}

int n_from_T(double T) {
  if (T < 3.0) throw std::invalid_argument("n_from_T: T >= 3");
  return int(std::llround(std::log(T)));
}

namespace {

// mean ratio value/scaling over the top decade of the grid
double fit_top_decade(const std::vector<ReportRow>& rows,
                      const std::vector<double>& scaling) {
  if (rows.empty()) return 0.0;
  const double t_max = rows.back().T;
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].T < t_max / 10.0) continue;
    if (scaling[i] <= 0.0) continue;
    sum += rows[i].value / scaling[i];
    ++n;
  }
  return n ? sum / n : 0.0;
}

}  // namespace

ReportRecord conjecture1_ratio(const EllipticCurveData& e,
                               std::span<const TwistRecord> records,
                               std::span<const double> t_grid) {
  ReportRecord rec;
  rec.observable = "conj1_" + e.label;
  std::vector<double> scaling;
  long long total_zeros = 0;
  for (double T : t_grid) {
    ReportRow row;
    row.T = T;
    row.value = double(vanishing_count(records, (long long)T));
    scaling.push_back(std::pow(T, 0.75) * std::pow(std::log(T), -0.625));
    rec.rows.push_back(row);
    total_zeros = std::max<long long>(total_zeros, (long long)row.value);
  }
  const double c_fit = fit_top_decade(rec.rows, scaling);
  rec.fitted["c_E"] = c_fit;
  for (std::size_t i = 0; i < rec.rows.size(); ++i)
    rec.rows[i].predicted = c_fit * scaling[i];
  if (total_zeros < 10) rec.flags.push_back("insufficient-data");
  return rec;
}

ReportRecord eq23_scaling(const EllipticCurveData& e,
                          std::span<const TwistRecord> records,
                          std::span<const double> t_grid, bool tau_refined,
                          double kappa, double a_minus_half) {
  ReportRecord rec;
  rec.observable = std::string("eq23_") + (tau_refined ? "tau_" : "plain_") +
                   e.label;
  std::vector<double> scaling;
  long long total_zeros = 0;
  for (double T : t_grid) {
    ReportRow row;
    row.T = T;
    row.value = double(vanishing_count(records, (long long)T));
    double denom;
    if (tau_refined) {
      denom = std::pow(T, 0.75) * std::pow(std::log(T), 11.0 / 8.0);
    } else {
      const double t_star = double(family_count(records, (long long)T));
      denom = (8.0 / 3.0) * std::sqrt(kappa) * a_minus_half * t_star /
              std::pow(T, 0.25) * h_small_x(n_from_T(T));
    }
    scaling.push_back(denom);
    rec.rows.push_back(row);
    total_zeros = std::max<long long>(total_zeros, (long long)row.value);
  }
  const double c_fit = fit_top_decade(rec.rows, scaling);
  rec.fitted["constant"] = c_fit;
  for (std::size_t i = 0; i < rec.rows.size(); ++i)
    rec.rows[i].predicted = c_fit * scaling[i];
  if (total_zeros < 10) rec.flags.push_back("insufficient-data");
  return rec;
}

ClassRatio rp_ratio(std::span<const TwistRecord> records, long long p,
                    long long T) {
  ClassRatio out;
  long long plus = 0, minus = 0;
  for (const TwistRecord& r : records) {
    if (r.sign != +1 || !r.is_zero || std::llabs(r.d) > T) continue;
    const int chi = kronecker(r.d, p);
    if (chi == +1) ++plus;
    else if (chi == -1) ++minus;
  }
  out.n_plus = plus;
  out.n_minus = minus;
  if (minus == 0) {
    out.undefined = true;
    out.value = 0.0;
  } else {
    out.value = double(plus) / double(minus);
  }
  return out;
}

double rp_conjectured(const EllipticCurveData& e, long long p) {
  if (e.conductor % p == 0)
    throw std::domain_error("rp_conjectured: bad reduction at p");
  const int ap = ap_point_count(e, p);
  return std::sqrt(double(p + 1 - ap) / double(p + 1 + ap));
}

ClassRatio qp_ratio(std::span<const TwistRecord> records, long long p,
                    double k, long long T) {
  ClassRatio out;
  double plus = 0.0, minus = 0.0;
  for (const TwistRecord& r : records) {
    if (r.sign != +1 || std::llabs(r.d) > T) continue;
    if (k < 0.0 && r.is_zero) continue;  // zeros are rp_ratio's business
    const int chi = kronecker(r.d, p);
    if (chi == 0) continue;
    const double term = k == 0.0 ? 1.0 : std::pow(r.lvalue, k);
    if (chi == +1) {
      plus += term;
      ++out.n_plus;
    } else {
      minus += term;
      ++out.n_minus;
    }
  }
  if (out.n_minus == 0 || minus == 0.0) {
    out.undefined = true;
    out.value = 0.0;
  } else {
    out.value = plus / minus;
  }
  return out;
}

double qp_conjectured(const EllipticCurveData& e, long long p, double k) {
  if (e.conductor % p == 0)
    throw std::domain_error("qp_conjectured: bad reduction at p");
  const int ap = ap_point_count(e, p);
  return std::pow(double(p + 1 + ap) / double(p + 1 - ap), k);
}

FamilyMoment family_moment(const EllipticCurveData& e,
                           std::span<const TwistRecord> records, double k,
                           long long T, long long ak_prime_cutoff,
                           const std::string& cache_dir) {
  FamilyMoment out;
  double sum = 0.0;
  for (const TwistRecord& r : records) {
    if (r.sign != +1 || std::llabs(r.d) > T) continue;
    if (k < 0.0 && r.is_zero) continue;
    sum += k == 0.0 ? 1.0 : std::pow(r.lvalue, k);
    ++out.count;
  }
  if (out.count == 0)
    throw InsufficientData("family_moment: empty family");
  out.empirical = sum / double(out.count);
  const double gk = g_k_barnes(k);
  const double ak =
      arithmetic_factor_ak(e, k, ak_prime_cutoff, 1, cache_dir).value;
  out.predicted =
      gk * ak * std::pow(std::log(double(T)), 0.5 * k * (k - 1.0));
  return out;
}

HistogramPair value_histogram(const EllipticCurveData& e,
                              std::span<const TwistRecord> records,
                              long long T, int bins, double xmax,
                              int N_override, int threads) {
  (void)e;
  if (bins < 1) throw std::invalid_argument("value_histogram: bins >= 1");
  std::vector<double> values;
  for (const TwistRecord& r : records)
    if (r.sign == +1 && std::llabs(r.d) <= T) values.push_back(r.lvalue);
  if (values.empty())
    throw InsufficientData("value_histogram: empty family");

  HistogramPair out;
  out.N = N_override > 0 ? N_override : n_from_T(double(T));
  const double model_mean = moment_so_even(out.N, 1.0);  // = 2
  double sample_mean = 0.0;
  for (double v : values) sample_mean += v;
  sample_mean /= double(values.size());
  if (!(sample_mean > 0.0))
    throw InsufficientData("value_histogram: family mean is not positive");
  out.rescale = model_mean / sample_mean;

  if (xmax <= 0.0) {
    // cover the model bulk: mean + 4 sigma of P_O(N, .)
    const double m2 = moment_so_even(out.N, 2.0);
    xmax = model_mean + 4.0 * std::sqrt(std::max(0.0, m2 - model_mean * model_mean));
  }
  const double width = xmax / bins;
  out.empirical.N = out.N;
  out.empirical.xs.resize(bins);
  out.empirical.ps.resize(bins);
  std::vector<long long> counts(std::size_t(bins), 0);
  for (double v : values) {
    const double f = v * out.rescale / width;
    if (f < 0.0 || f >= bins) continue;
    ++counts[std::size_t(f)];
  }
  for (int b = 0; b < bins; ++b) {
    out.empirical.xs[b] = (b + 0.5) * width;
    out.empirical.ps[b] =
        double(counts[std::size_t(b)]) / (double(values.size()) * width);
  }
  DensityParams params;
  out.model = density_grid(out.N, 0.5 * width, xmax - 0.5 * width, bins,
                           params, threads);
  return out;
}

}  // namespace twistlab
