// Acceptance suite: one pass/fail line per criterion, every tolerance
// pinned in code.  Returns the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "twistlab/curve_arithmetic.hpp"
#include "twistlab/io.hpp"
#include "twistlab/lvalue_engine.hpp"
#include "twistlab/rmt_moments.hpp"
#include "twistlab/rmt_sampler.hpp"
#include "twistlab/special_functions.hpp"
#include "twistlab/statistics_reports.hpp"

using namespace twistlab;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("%s  criterion-%02d  %-46s (%.1f s)%s%s\n",
              ok ? "PASS" : "FAIL", id, name.c_str(), secs,
              detail.empty() ? "" : "  -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// ----------------------------------------------------------------------
// criterion 3 helper: int x^k P(N,x) dx with endpoint substitutions
double moment_by_quadrature(int N, int k, double x_hi) {
  DensityParams params;
  params.eps_abs = 1e-10;
  auto p = [&](double x) { return density_po(N, x, params); };
  auto g0 = [&](double v) { return 2.0 * std::pow(v, 2 * k + 1) * p(v * v); };
  double total = oracles::GL20::panels(g0, oracles::linspace_edges(0, 1, 8));
  if (N == 1) {
    auto g1 = [&](double w) {
      const double x = 4.0 - w * w;
      return 2.0 * w * std::pow(x, k) * p(x);
    };
    total += oracles::GL20::panels(
        g1, oracles::linspace_edges(0, std::sqrt(3.0), 10));
  } else {
    auto g1 = [&](double x) { return std::pow(x, k) * p(x); };
    const int panels = int(3.0 * std::log(x_hi)) + 2;
    total +=
        oracles::GL20::panels(g1, oracles::logspace_edges(1.0, x_hi, panels));
  }
  return total;
}

// ----------------------------------------------------------------------
// Table-1 conjectured R_p columns (E11, E19, E32); 0 marks the blank
// entries at the bad primes.
struct TableRow {
  long long p;
  double r11, r19, r32;
};
const std::vector<TableRow> kTable1 = {
    {3, 1.2909944, 1.7320508, 1},
    {5, 0.84515425, 0.57735027, 1.4142136},
    {7, 1.2909944, 1.1338934, 1},
    {11, 0, 0.77459667, 1},
    {13, 0.74535599, 1.3416408, 0.63245553},
    {17, 1.118034, 1.183216, 0.89442719},
    {19, 1, 0, 1},
    {23, 1.0425721, 1, 1},
    {29, 1, 0.81649658, 1.4142136},
    {31, 0.80064077, 1.1338934, 1},
    {37, 0.92393644, 0.9486833, 1.0540926},
    {41, 1.2126781, 1.1547005, 0.78446454},
    {43, 1.1470787, 1.0229915, 1},
    {47, 0.84515425, 1.0645813, 1},
    {53, 1.118034, 0.79772404, 0.76696499},
    {59, 0.91986621, 1.1055416, 1},
    {61, 0.82199494, 1.0162612, 1.1766968},
    {67, 1.1088319, 1.0606602, 1},
    {71, 1.0425721, 0.91986621, 1},
    {73, 0.94733093, 1.099525, 1.0846523},
    {79, 1.1338934, 0.90453403, 1},
    {83, 1.0741723, 0.8660254, 1},
    {89, 0.84515425, 0.87447463, 0.89442719},
    {97, 1.0741723, 0.92144268, 0.8304548},
    {101, 0.98058068, 0.94280904, 1.0198039},
    {103, 1.1677484, 0.87333376, 1},
    {107, 0.84515425, 1.183216, 1},
    {109, 0.91287093, 1.1577675, 0.94686415},
    {113, 0.92393644, 0.9486833, 1.1313708},
    {127, 0.93933644, 0.98449518, 1},
    {131, 1.1470787, 1.1208971, 1},
    {137, 1.052079, 1.0219806, 1.1744404},
    {139, 0.93094934, 1.0975994, 1},
    {149, 1.069045, 0.86855395, 0.91064169},
};

// invert R = sqrt((p+1-a)/(p+1+a)): a = (p+1)(1-R^2)/(1+R^2)
bool implied_ap(long long p, double R, long long& a_out) {
  const double a = double(p + 1) * (1.0 - R * R) / (1.0 + R * R);
  a_out = std::llround(a);
  return std::abs(a - double(a_out)) < 1e-4;
}

std::string run_cli(const std::string& args, const std::string& out_file,
                    int* exit_code = nullptr) {
  const char* bin = std::getenv("TWISTLAB_BIN");
  if (!bin) throw std::runtime_error("TWISTLAB_BIN not set");
  const std::string cmd =
      std::string(bin) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (exit_code) *exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const std::string cache = cache_dir_from_env();

  criterion(1, "g_k product vs Barnes form, k = 1..8", [](std::string&) {
    for (int k = 1; k <= 8; ++k) {
      const double p = g_k_product(k), b = g_k_barnes(double(k));
      if (std::abs(p - b) / p > 1e-10) return false;
    }
    return true;
  });

  criterion(2, "moment normalization M_O(N, 0) = 1", [](std::string&) {
    for (int N : {1, 5, 20, 50, 200})
      if (std::abs(moment_so_even(N, 0.0) - 1.0) > 1e-12) return false;
    return true;
  });

  criterion(3, "Mellin round trip of the moments", [](std::string& detail) {
    struct Range { int N; double x_hi; };
    double worst = 0.0;
    for (const Range r : {Range{1, 4.0}, Range{5, 1024.0}, Range{20, 5e5}}) {
      for (int k = 0; k <= 2; ++k) {
        const double got = moment_by_quadrature(r.N, k, r.x_hi);
        const double want = moment_so_even(r.N, double(k));
        worst = std::max(worst, std::abs(got / want - 1.0));
      }
    }
    detail = "worst rel err " + format_double(worst);
    return worst <= 1e-6;
  });

  criterion(4, "closed-form density at N = 1", [](std::string& detail) {
    DensityParams params;
    params.eps_abs = 1e-10;
    double worst = 0.0;
    for (double x = 0.01; x <= 3.9901; x += 0.02) {
      const double closed = 1.0 / (M_PI * std::sqrt(x * (4.0 - x)));
      worst = std::max(worst, std::abs(density_po(1, x, params) - closed));
    }
    // include the stated endpoints exactly
    for (double x : {0.01, 3.99}) {
      const double closed = 1.0 / (M_PI * std::sqrt(x * (4.0 - x)));
      worst = std::max(worst, std::abs(density_po(1, x, params) - closed));
    }
    detail = "worst abs err " + format_double(worst);
    if (worst > 1e-8) return false;
    return std::abs(h_small_x(1) - 1.0 / (2.0 * M_PI)) <= 1e-10;
  });

  criterion(5, "h(N) N^{-3/8} asymptotic constant at N = 400",
            [](std::string& detail) {
    const double c =
        std::pow(2.0, -0.875) * barnes_g(0.5) * std::pow(M_PI, -0.25);
    const double ratio = h_small_x(400) / (c * std::pow(400.0, 0.375));
    detail = "ratio " + format_double(ratio);
    return std::abs(ratio - 1.0) <= 0.01;
  });

  criterion(6, "Monte-Carlo moment and N = 20 histogram",
            [](std::string& detail) {
    const MomentEstimate m = empirical_moment(5, 1.0, 100000, 20260808);
    const double want = moment_so_even(5, 1.0);
    if (std::abs(m.mean - want) > 3.0 * m.std_error) {
      detail = "SO(10) mean off: " + format_double(m.mean);
      return false;
    }
    const int n = 100000, bins = 30;
    const double width = 1.0;
    const HistSpec spec{0.0, bins * width, bins};
    const DensityGrid hist = empirical_density(20, n, spec, 424242);
    DensityParams params;
    params.eps_abs = 1e-9;
    // expected mass per bin with the x = v^2 substitution (the model has
    // an integrable x^{-1/2} singularity at the left edge)
    auto bin_mass = [&](double lo, double hi) {
      auto g = [&](double v) { return 2.0 * v * density_po(20, v * v, params); };
      return oracles::GL20::panels(
          g, oracles::linspace_edges(std::sqrt(lo), std::sqrt(hi), 2));
    };
    int bulk = 0;
    for (int b = 0; b < bins; ++b) {
      const double mass = bin_mass(b * width, (b + 1) * width);
      if (mass * n < 100.0) continue;
      const double sigma = std::sqrt(mass * (1.0 - mass) / n);
      if (std::abs(hist.ps[b] * width - mass) > 5.0 * sigma) {
        detail = "bin at x = " + format_double(hist.xs[b]) + " off";
        return false;
      }
      ++bulk;
    }
    detail = std::to_string(bulk) + " bulk bins";
    return bulk >= 10;
  });

  criterion(7, "Table-1 a_p ground truth (integer equality)",
            [](std::string& detail) {
    const auto& e11 = builtin_curve("E11");
    const auto& e19 = builtin_curve("E19");
    const auto& e32 = builtin_curve("E32");
    int rows = 0;
    for (const TableRow& row : kTable1) {
      struct Entry { const EllipticCurveData* e; double R; };
      for (const Entry en :
           {Entry{&e11, row.r11}, Entry{&e19, row.r19}, Entry{&e32, row.r32}}) {
        if (en.R == 0.0) continue;  // blank: bad prime for that curve
        long long implied;
        if (!implied_ap(row.p, en.R, implied)) {
          detail = "non-integer inversion at p=" + std::to_string(row.p);
          return false;
        }
        if (ap_point_count(*en.e, row.p) != implied) {
          detail = en.e->label + " p=" + std::to_string(row.p);
          return false;
        }
        ++rows;
      }
    }
    detail = std::to_string(rows) + " (curve, p) pairs";
    return rows == 100;
  });

  ScanConfig theta_cfg;
  theta_cfg.curve_label = "E32";
  theta_cfg.engine = ScanEngine::Theta;
  theta_cfg.parity = ParityFilter::Odd;
  theta_cfg.sign_filter = SignFilter::Even;
  theta_cfg.dmax_abs = 1000000;
  theta_cfg.cache_dir = cache;
  ScanResult theta_scan;  // shared by criteria 8 and 11

  criterion(8, "R_p for the conductor-32 curve at T = 1e6",
            [&](std::string& detail) {
    theta_scan = run_scan(theta_cfg);
    const auto& e32 = builtin_curve("E32");
    double worst = 0.0;
    for (long long p : {3LL, 5LL, 7LL, 13LL}) {
      const ClassRatio r = rp_ratio(theta_scan.records, p, 1000000);
      if (r.undefined) return false;
      const double want = rp_conjectured(e32, p);
      worst = std::max(worst, std::abs(r.value / want - 1.0));
    }
    detail = "worst |R_p(T)/R_p - 1| = " + format_double(worst);
    return worst <= 0.05;
  });

  criterion(9, "cross-engine zero verdicts, |d| <= 2000",
            [](std::string& detail) {
    ScanConfig series;
    series.curve_label = "E32";
    series.engine = ScanEngine::Series;
    series.parity = ParityFilter::Odd;
    series.sign_filter = SignFilter::Even;
    series.dmax_abs = 2000;
    series.epsilon = 1e-8;
    series.cache_dir = cache_dir_from_env();
    const ScanResult s = run_scan(series);
    ScanConfig theta = series;
    theta.engine = ScanEngine::Theta;
    const ScanResult t = run_scan(theta);
    if (s.records.size() != t.records.size() || s.records.empty())
      return false;
    long long zeros = 0;
    for (std::size_t i = 0; i < s.records.size(); ++i) {
      if (s.records[i].d != t.records[i].d) return false;
      if (s.records[i].is_zero != t.records[i].is_zero) {
        detail = "mismatch at d = " + std::to_string(s.records[i].d);
        return false;
      }
      zeros += s.records[i].is_zero;
    }
    detail = std::to_string(s.records.size()) + " twists, " +
             std::to_string(zeros) + " zeros, 100% match";
    return true;
  });

  criterion(10, "discretization residuals, conductor 11, |d| <= 5000",
            [](std::string& detail) {
    ScanConfig cfg;
    cfg.curve_label = "E11";
    cfg.engine = ScanEngine::Series;
    cfg.parity = ParityFilter::All;
    cfg.sign_filter = SignFilter::Even;
    cfg.d_sign = DSignFilter::Negative;
    cfg.dmax_abs = 5000;
    cfg.epsilon = 1e-7;
    cfg.cache_dir = cache_dir_from_env();
    const ScanResult res = run_scan(cfg);
    if (!res.calibrated) return false;
    double worst = 0.0;
    long long n = 0;
    for (const TwistRecord& r : res.records) {
      if (r.sign != +1) continue;
      const double kappa = res.calibration.kappa_for(r.d);
      const double root =
          std::sqrt(std::max(0.0, r.lvalue) * std::sqrt(double(-r.d)) / kappa);
      worst = std::max(worst, std::abs(root - std::llround(root)));
      ++n;
    }
    detail = std::to_string(n) + " twists, worst residual " +
             format_double(worst);
    // ~14% of |d| <= 5000 are negative fundamental with chi_d(11) = -1
    return n > 500 && worst <= 1e-3;
  });

  criterion(11, "Q_p at k = 1 for the conductor-32 curve, T = 1e5",
            [&](std::string& detail) {
    if (theta_scan.records.empty()) return false;
    const auto& e32 = builtin_curve("E32");
    // p = 3: a_3 = 0, target (p+1+a)/(p+1-a) = 1
    const ClassRatio q3 = qp_ratio(theta_scan.records, 3, 1.0, 100000);
    const double want3 = qp_conjectured(e32, 3, 1.0);
    // p = 5: a_5 = -2, target 4/8 = 0.5
    const ClassRatio q5 = qp_ratio(theta_scan.records, 5, 1.0, 100000);
    const double want5 = qp_conjectured(e32, 5, 1.0);
    detail = "Q_3 = " + format_double(q3.value) +
             ", Q_5 = " + format_double(q5.value);
    if (q3.undefined || q5.undefined) return false;
    if (std::abs(want3 - 1.0) > 1e-14) return false;
    if (std::abs(want5 - 0.5) > 1e-14) return false;
    return std::abs(q3.value / want3 - 1.0) <= 0.10 &&
           std::abs(q5.value / want5 - 1.0) <= 0.10;
  });

  criterion(12, "prime-twist vanishing scaling, conductor 11, T = 2e5",
            [](std::string& detail) {
    ScanConfig cfg;
    cfg.curve_label = "E11";
    cfg.engine = ScanEngine::Series;
    cfg.parity = ParityFilter::Odd;
    cfg.sign_filter = SignFilter::Even;
    cfg.d_sign = DSignFilter::Negative;
    cfg.prime_only = true;
    cfg.dmax_abs = 200000;
    // zero detection only needs the series below the discretization
    // threshold kappa/(4 sqrt dmax) ~ 1.6e-3 for this curve and range;
    // 5e-5 leaves a factor ~32 of margin, asserted below against the
    // calibrated kappa
    cfg.epsilon = 5e-5;
    cfg.cache_dir = cache_dir_from_env();
    const ScanResult res = run_scan(cfg);
    if (!res.calibrated) {
      detail = "calibration failed";
      return false;
    }
    const double kappa = res.calibration.kappa_for(-3);
    if (20.0 * cfg.epsilon >= kappa / (4.0 * std::sqrt(double(cfg.dmax_abs)))) {
      detail = "epsilon too loose for trustworthy zero detection";
      return false;
    }

    const auto& e11 = builtin_curve("E11");
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i)
      grid.push_back(std::floor(1e4 * std::pow(20.0, i / 9.0)));
    const ReportRecord rec = conjecture1_ratio(e11, res.records, grid);

    long long prev = -1;
    for (const ReportRow& row : rec.rows) {
      const long long v = (long long)row.value;
      if (v <= prev) {
        detail = "counts not strictly increasing at T = " +
                 format_double(row.T);
        return false;
      }
      prev = v;
    }
    // relative spread of the ratio over the top half of the grid
    double lo = 1e300, hi = 0.0, mean = 0.0;
    int n = 0;
    for (const ReportRow& row : rec.rows) {
      if (row.T < grid.front() * std::sqrt(20.0)) continue;
      const double scaling =
          std::pow(row.T, 0.75) * std::pow(std::log(row.T), -0.625);
      const double ratio = row.value / scaling;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      mean += ratio;
      ++n;
    }
    mean /= n;
    const double spread = (hi - lo) / mean;
    detail = "spread " + format_double(spread) + " over " +
             std::to_string(n) + " grid points, c_E ~ " +
             format_double(rec.fitted.at("c_E"));
    return spread <= 0.25;
  });

  criterion(13, "byte-identical reruns across thread counts",
            [](std::string& detail) {
    int code = 0;
    const std::string a =
        run_cli("scan --curve E32 --engine theta --dmax 3000 --threads 1"
                " --out acc_scan_a.csv",
                "acc_scan_a.csv", &code);
    if (code != 0) return false;
    const std::string b =
        run_cli("scan --curve E32 --engine theta --dmax 3000 --threads 4"
                " --out acc_scan_b.csv",
                "acc_scan_b.csv", &code);
    if (code != 0) return false;
    const std::string c =
        run_cli("scan --curve E32 --engine theta --dmax 3000 --threads 1"
                " --out acc_scan_c.csv",
                "acc_scan_c.csv", &code);
    if (a.empty() || a != b || a != c) return false;
    const std::string r1 =
        run_cli("report rp --curve E32 --p 3 --dmax 20000 --T 20000"
                " --threads 1 --out acc_rp_a.csv",
                "acc_rp_a.csv", &code);
    if (code != 0) return false;
    const std::string r2 =
        run_cli("report rp --curve E32 --p 3 --dmax 20000 --T 20000"
                " --threads 3 --out acc_rp_b.csv",
                "acc_rp_b.csv", &code);
    if (code != 0) return false;
    detail = "scan and report CSVs identical";
    return !r1.empty() && r1 == r2;
  });

  std::printf("%s: %d of 13 criteria failed\n",
              g_failures ? "RESULT" : "RESULT", g_failures);
  return g_failures;
}
