// Command-line front end: closed-form moments and densities, Haar-sampled
// checks, twist scans and the statistics reports, all emitted as CSV with
// a JSON manifest alongside.

#include <CLI11.hpp>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "twistlab/curve_arithmetic.hpp"
#include "twistlab/io.hpp"
#include "twistlab/lvalue_engine.hpp"
#include "twistlab/rmt_moments.hpp"
#include "twistlab/rmt_sampler.hpp"
#include "twistlab/special_functions.hpp"
#include "twistlab/statistics_reports.hpp"

using namespace twistlab;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInsufficientData = 4;

struct OutputSink {
  std::string path;  // empty = stdout
  std::ostringstream buffer;

  template <typename T>
  OutputSink& operator<<(const T& v) {
    buffer << v;
    return *this;
  }

  // returns the list of files written (empty when streaming to stdout)
  std::vector<std::string> flush() {
    if (path.empty()) {
      std::cout << buffer.str();
      return {};
    }
    write_text_file(path, buffer.str());
    return {path};
  }
};

std::string csv(double v) { return format_double(v); }

void emit_manifest(const CLI::App& app, const std::string& sub,
                   const std::map<std::string, std::string>& config,
                   const std::vector<std::string>& files,
                   const std::string& manifest_path) {
  if (manifest_path.empty()) return;
  RunManifest m;
  m.subcommand = sub;
  std::ostringstream cmd;
  cmd << app.get_name();
  m.command_line = app.get_name() + " " + sub;
  m.config = config;
  m.output_files = files;
  write_manifest(m, manifest_path);
}

struct CommonScanOptions {
  std::string curve = "E32";
  std::string engine;  // default picked per curve
  long long dmin = 3, dmax = 1000;
  std::string parity = "odd";
  std::string sign = "even";
  std::string dsign = "both";
  bool prime_only = false;
  bool tau_refined = false;
  double epsilon = 1e-8;
  std::string import_file;
  std::string registry;
  int threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--curve", curve, "curve label (built-in or registry)");
    cmd->add_option("--engine", engine, "series|theta|import")
        ->check(CLI::IsMember({"series", "theta", "import", ""}));
    cmd->add_option("--dmin", dmin, "smallest |d|");
    cmd->add_option("--dmax", dmax, "largest |d|");
    cmd->add_option("--parity", parity, "odd|all")
        ->check(CLI::IsMember({"odd", "all"}));
    cmd->add_option("--sign", sign, "even|all (functional equation)")
        ->check(CLI::IsMember({"even", "all"}));
    cmd->add_option("--dsign", dsign, "neg|pos|both  (sign of d)")
        ->check(CLI::IsMember({"neg", "pos", "both"}));
    cmd->add_flag("--prime-only", prime_only, "restrict to prime |d|");
    cmd->add_flag("--tau-refined", tau_refined,
                  "divisor-refined zero threshold (conductor 32)");
    cmd->add_option("--epsilon", epsilon, "series tail tolerance");
    cmd->add_option("--import-file", import_file, "coefficient file");
    cmd->add_option("--registry", registry, "curve registry file");
    cmd->add_option("--threads", threads, "worker threads");
  }

  ScanConfig to_config() const {
    ScanConfig cfg;
    cfg.curve_label = curve;
    cfg.dmin_abs = dmin;
    cfg.dmax_abs = dmax;
    cfg.parity = parity == "odd" ? ParityFilter::Odd : ParityFilter::All;
    cfg.sign_filter = sign == "even" ? SignFilter::Even : SignFilter::All;
    cfg.d_sign = dsign == "neg"   ? DSignFilter::Negative
                 : dsign == "pos" ? DSignFilter::Positive
                                  : DSignFilter::Both;
    cfg.prime_only = prime_only;
    std::string eng = engine;
    if (eng.empty()) eng = (curve == "E32") ? "theta" : "series";
    cfg.engine = eng == "theta"    ? ScanEngine::Theta
                 : eng == "import" ? ScanEngine::Import
                                   : ScanEngine::Series;
    cfg.epsilon = epsilon;
    cfg.tau_refined = tau_refined;
    cfg.import_path = import_file;
    cfg.registry_path = registry;
    cfg.threads = threads;
    cfg.cache_dir = cache_dir_from_env();
    return cfg;
  }

  std::map<std::string, std::string> snapshot() const {
    return {{"curve", curve},
            {"engine", engine.empty() ? (curve == "E32" ? "theta" : "series")
                                      : engine},
            {"dmin", std::to_string(dmin)},
            {"dmax", std::to_string(dmax)},
            {"parity", parity},
            {"sign", sign},
            {"dsign", dsign},
            {"prime_only", prime_only ? "1" : "0"},
            {"tau_refined", tau_refined ? "1" : "0"},
            {"epsilon", format_double(epsilon)},
            {"import_file", import_file},
            {"registry", registry},
            {"threads", std::to_string(threads)}};
  }
};

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 1.0 : double(i) / (points - 1);
    g.push_back(std::floor(lo * std::pow(hi / lo, f)));
  }
  g.back() = hi;
  return g;
}

void write_report_csv(OutputSink& out, const ReportRecord& rec) {
  out << "T,value,predicted,ratio_to_scaling\n";
  const double c_fit =
      rec.fitted.count("c_E") ? rec.fitted.at("c_E")
                              : rec.fitted.count("constant")
                                    ? rec.fitted.at("constant")
                                    : 0.0;
  for (const ReportRow& row : rec.rows) {
    const double scaling = c_fit != 0.0 ? row.predicted / c_fit : 0.0;
    const double ratio = scaling != 0.0 ? row.value / scaling : 0.0;
    out << csv(row.T) << "," << csv(row.value) << "," << csv(row.predicted)
        << "," << csv(ratio) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadratic-twist value statistics against SO(2N) predictions"};
  app.set_config("--config", "", "configuration file (flags override)");
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path, manifest_path;
  app.add_option("--out", out_path, "output CSV (default stdout)");
  app.add_option("--manifest", manifest_path,
                 "manifest path (default <out>.manifest.json)");

  // ---- moments ----------------------------------------------------------
  auto* cmd_moments = app.add_subcommand("moments", "SO(2N) moments M_O(N,s)");
  int m_N = 5;
  double m_k = 1.0, m_s_im = 0.0;
  int m_gk = 0;
  bool m_check = false;
  cmd_moments->add_option("--N", m_N, "half-dimension of SO(2N)");
  cmd_moments->add_option("--k", m_k, "moment order (real part)");
  cmd_moments->add_option("--s-im", m_s_im, "imaginary part of s");
  cmd_moments->add_option("--gk", m_gk, "print g_k(O+) for integer k");
  cmd_moments->add_flag("--check", m_check,
                        "cross-validate g_k product vs Barnes form, k=1..8");

  // ---- density ----------------------------------------------------------
  auto* cmd_density = app.add_subcommand("density", "value density P_O(N,x)");
  int d_N = 1, d_points = 100;
  double d_xmin = 0.01, d_xmax = 0.0, d_c = 0.25, d_eps = 1e-8;
  bool d_area = false, d_log = false;
  int d_threads = 1;
  cmd_density->add_option("--N", d_N);
  cmd_density->add_option("--xmin", d_xmin);
  cmd_density->add_option("--xmax", d_xmax, "default 4^N - margin");
  cmd_density->add_option("--points", d_points);
  cmd_density->add_option("--contour", d_c, "vertical contour position");
  cmd_density->add_option("--eps", d_eps, "absolute tolerance");
  cmd_density->add_flag("--with-area", d_area, "append trapezoid cell mass");
  cmd_density->add_flag("--log-spacing", d_log);
  cmd_density->add_option("--threads", d_threads);

  // ---- sample -----------------------------------------------------------
  auto* cmd_sample = app.add_subcommand("sample", "Haar SO(2N) det(U-I) draws");
  int s_N = 5, s_bins = 0, s_threads = 1;
  long long s_count = 1000;
  std::uint64_t s_seed = 1;
  double s_lo = 0.0, s_hi = 0.0;
  cmd_sample->add_option("--N", s_N);
  cmd_sample->add_option("--count", s_count);
  cmd_sample->add_option("--seed", s_seed);
  cmd_sample->add_option("--bins", s_bins, "emit a histogram instead");
  cmd_sample->add_option("--lo", s_lo);
  cmd_sample->add_option("--hi", s_hi, "default 4N + 10");
  cmd_sample->add_option("--threads", s_threads);

  // ---- afactor ----------------------------------------------------------
  auto* cmd_afactor =
      app.add_subcommand("afactor", "arithmetic Euler factor a_k(E)");
  std::string a_curve = "E11", a_registry;
  double a_k = 1.0;
  long long a_cutoff = 100000;
  int a_threads = 1;
  cmd_afactor->add_option("--curve", a_curve);
  cmd_afactor->add_option("--k", a_k);
  cmd_afactor->add_option("--cutoff", a_cutoff, "prime cutoff");
  cmd_afactor->add_option("--registry", a_registry);
  cmd_afactor->add_option("--threads", a_threads);

  // ---- scan -------------------------------------------------------------
  auto* cmd_scan = app.add_subcommand("scan", "family scan of twist records");
  CommonScanOptions scan_opts;
  scan_opts.attach(cmd_scan);

  // ---- report -----------------------------------------------------------
  auto* cmd_report = app.add_subcommand("report", "family observables");
  cmd_report->require_subcommand(1);
  CommonScanOptions rep;
  long long r_p = 3;
  double r_k = 1.0;
  long long r_T = 0;
  int r_grid = 12, r_bins = 40, r_N = 0;
  double r_xmax = 0.0;
  auto* rep_rp = cmd_report->add_subcommand("rp", "zero-count class ratio");
  auto* rep_qp = cmd_report->add_subcommand("qp", "L^k class ratio");
  auto* rep_conj1 =
      cmd_report->add_subcommand("conj1", "prime-twist vanishing scaling");
  auto* rep_eq23 =
      cmd_report->add_subcommand("eq23", "all-d vanishing scaling");
  auto* rep_hist = cmd_report->add_subcommand("hist", "value distribution");
  auto* rep_moment = cmd_report->add_subcommand("moment", "family moment");
  for (CLI::App* sc : {rep_rp, rep_qp, rep_conj1, rep_eq23, rep_hist,
                       rep_moment}) {
    rep.attach(sc);
    sc->add_option("--T", r_T, "discriminant cutoff (default dmax)");
  }
  rep_rp->add_option("--p", r_p, "prime");
  rep_qp->add_option("--p", r_p, "prime");
  rep_qp->add_option("--k", r_k, "moment order");
  rep_conj1->add_option("--grid-points", r_grid);
  rep_eq23->add_option("--grid-points", r_grid);
  rep_hist->add_option("--bins", r_bins);
  rep_hist->add_option("--xmax", r_xmax);
  rep_hist->add_option("--N", r_N, "override N (default round(log T))");
  rep_moment->add_option("--k", r_k, "moment order");

  for (CLI::App* sc : app.get_subcommands({})) sc->fallthrough();
  for (CLI::App* sc : cmd_report->get_subcommands({})) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    OutputSink out;
    out.path = out_path;
    std::map<std::string, std::string> config;
    std::string sub;

    if (*cmd_moments) {
      sub = "moments";
      if (m_check) {
        out << "k,g_product,g_barnes,rel_diff\n";
        for (int k = 1; k <= 8; ++k) {
          const double p = g_k_product(k);
          const double b = g_k_barnes(double(k));
          out << k << "," << csv(p) << "," << csv(b) << ","
              << csv(std::abs(p - b) / p) << "\n";
          if (std::abs(p - b) / p > 1e-10)
            throw std::runtime_error("g_k cross-validation failed");
        }
      } else if (m_gk > 0) {
        out << "k,g_product,g_barnes\n";
        out << m_gk << "," << csv(g_k_product(m_gk)) << ","
            << csv(g_k_barnes(double(m_gk))) << "\n";
      } else {
        const std::complex<double> s(m_k, m_s_im);
        const std::complex<double> v = moment_so_even(m_N, s);
        out << "N,s_re,s_im,value_re,value_im\n";
        out << m_N << "," << csv(s.real()) << "," << csv(s.imag()) << ","
            << csv(v.real()) << "," << csv(v.imag()) << "\n";
      }
      config = {{"N", std::to_string(m_N)}, {"k", format_double(m_k)}};
    } else if (*cmd_density) {
      sub = "density";
      if (d_xmax <= 0.0)
        d_xmax = std::pow(4.0, std::min(d_N, 20)) * (1.0 - 1e-3);
      DensityParams params;
      params.contour_c = d_c;
      params.eps_abs = d_eps;
      const DensityGrid grid =
          density_grid(d_N, d_xmin, d_xmax, d_points, params, d_threads, d_log);
      out << (d_area ? "x,p,area\n" : "x,p\n");
      for (int i = 0; i < grid.xs.size(); ++i) {
        out << csv(grid.xs[i]) << "," << csv(grid.ps[i]);
        if (d_area) {
          double cell = 0.0;
          if (i + 1 < grid.xs.size())
            cell = 0.5 * (grid.ps[i] + grid.ps[i + 1]) *
                   (grid.xs[i + 1] - grid.xs[i]);
          out << "," << csv(cell);
        }
        out << "\n";
      }
      config = {{"N", std::to_string(d_N)},
                {"xmin", format_double(d_xmin)},
                {"xmax", format_double(d_xmax)},
                {"points", std::to_string(d_points)}};
    } else if (*cmd_sample) {
      sub = "sample";
      if (s_bins > 0) {
        if (s_hi <= s_lo) s_hi = 4.0 * s_N + 10.0;
        const DensityGrid hist = empirical_density(
            s_N, s_count, HistSpec{s_lo, s_hi, s_bins}, s_seed, s_threads);
        const double w = (s_hi - s_lo) / s_bins;
        out << "bin_lo,bin_hi,density\n";
        for (int b = 0; b < s_bins; ++b)
          out << csv(hist.xs[b] - 0.5 * w) << "," << csv(hist.xs[b] + 0.5 * w)
              << "," << csv(hist.ps[b]) << "\n";
      } else {
        const std::vector<double> values =
            sample_values(s_N, s_count, s_seed, s_threads);
        out << "value\n";
        for (double v : values) out << csv(v) << "\n";
      }
      config = {{"N", std::to_string(s_N)},
                {"count", std::to_string(s_count)},
                {"seed", std::to_string(s_seed)}};
    } else if (*cmd_afactor) {
      sub = "afactor";
      const EllipticCurveData curve = find_curve(a_curve, a_registry);
      const EulerProductValue v = arithmetic_factor_ak(
          curve, a_k, a_cutoff, a_threads, cache_dir_from_env());
      out << "curve,k,cutoff,value,tail_estimate\n";
      out << curve.label << "," << csv(a_k) << "," << a_cutoff << ","
          << csv(v.value) << "," << csv(v.tail_estimate) << "\n";
      config = {{"curve", a_curve},
                {"k", format_double(a_k)},
                {"cutoff", std::to_string(a_cutoff)}};
    } else if (*cmd_scan) {
      sub = "scan";
      const ScanResult res = run_scan(scan_opts.to_config());
      out << "d,sign,lvalue,c,is_zero\n";
      for (const TwistRecord& r : res.records)
        out << r.d << "," << r.sign << "," << csv(r.lvalue) << "," << r.c
            << "," << (r.is_zero ? 1 : 0) << "\n";
      config = scan_opts.snapshot();
      if (res.calibrated) {
        config["calibration_single_class"] =
            res.calibration.single_class ? "1" : "0";
        for (const auto& [key, kappa] : res.calibration.kappa)
          config["kappa_class_" + std::to_string(key)] = format_double(kappa);
      }
    } else if (*cmd_report) {
      sub = "report";
      if (r_T <= 0) r_T = rep.dmax;
      rep.dmax = std::max(rep.dmax, r_T);
      CLI::App* which = cmd_report->get_subcommands().front();
      const std::string name = which->get_name();
      config = rep.snapshot();
      config["T"] = std::to_string(r_T);

      if (name == "conj1") {
        rep.prime_only = true;  // the scaling is a prime-twist statement
        config = rep.snapshot();
        config["T"] = std::to_string(r_T);
      }
      const ScanConfig scan_cfg = rep.to_config();
      const EllipticCurveData curve =
          find_curve(scan_cfg.curve_label, scan_cfg.registry_path);

      if (name == "rp") {
        const ScanResult res = run_scan(scan_cfg);
        const ClassRatio ratio = rp_ratio(res.records, r_p, r_T);
        out << "curve,p,T,conjectured,data,n_plus,n_minus,flag\n";
        std::string conj = "";
        std::string flag = ratio.undefined ? "zero-denominator" : "";
        double conj_v = 0.0;
        if (curve.conductor % r_p == 0) {
          flag = flag.empty() ? "bad-reduction" : flag;
        } else {
          conj_v = rp_conjectured(curve, r_p);
          conj = csv(conj_v);
        }
        out << curve.label << "," << r_p << "," << r_T << "," << conj << ","
            << csv(ratio.value) << "," << ratio.n_plus << "," << ratio.n_minus
            << "," << flag << "\n";
        config["p"] = std::to_string(r_p);
      } else if (name == "qp") {
        const ScanResult res = run_scan(scan_cfg);
        const ClassRatio ratio = qp_ratio(res.records, r_p, r_k, r_T);
        out << "curve,p,k,T,conjectured,data,n_plus,n_minus,flag\n";
        const double conj = curve.conductor % r_p
                                ? qp_conjectured(curve, r_p, r_k)
                                : 0.0;
        out << curve.label << "," << r_p << "," << csv(r_k) << "," << r_T
            << "," << csv(conj) << "," << csv(ratio.value) << ","
            << ratio.n_plus << "," << ratio.n_minus << ","
            << (ratio.undefined ? "empty-class" : "") << "\n";
        config["p"] = std::to_string(r_p);
        config["k"] = format_double(r_k);
      } else if (name == "conj1") {
        const ScanResult res = run_scan(scan_cfg);
        const std::vector<double> grid =
            log_grid(std::max(20.0, double(r_T) / 100.0), double(r_T), r_grid);
        const ReportRecord rec = conjecture1_ratio(curve, res.records, grid);
        write_report_csv(out, rec);
        config["c_E_fitted"] = format_double(rec.fitted.at("c_E"));
        for (const std::string& f : rec.flags) config["flag_" + f] = "1";
      } else if (name == "eq23") {
        const ScanResult res = run_scan(scan_cfg);
        const std::vector<double> grid =
            log_grid(std::max(20.0, double(r_T) / 100.0), double(r_T), r_grid);
        double kappa = 0.0, am = 0.0;
        if (!rep.tau_refined) {
          kappa = res.calibrated ? res.calibration.kappa_for(-3) : 1.0;
          am = arithmetic_factor_ak(curve, -0.5, 100000, rep.threads,
                                    cache_dir_from_env())
                   .value;
        }
        const ReportRecord rec = eq23_scaling(curve, res.records, grid,
                                              rep.tau_refined, kappa, am);
        write_report_csv(out, rec);
        config["constant_fitted"] = format_double(rec.fitted.at("constant"));
      } else if (name == "hist") {
        const ScanResult res = run_scan(scan_cfg);
        const HistogramPair h = value_histogram(curve, res.records, r_T,
                                                r_bins, r_xmax, r_N,
                                                rep.threads);
        out << "x,empirical,model\n";
        for (int b = 0; b < h.empirical.xs.size(); ++b)
          out << csv(h.empirical.xs[b]) << "," << csv(h.empirical.ps[b])
              << "," << csv(h.model.ps[b]) << "\n";
        config["N"] = std::to_string(h.N);
        config["rescale"] = format_double(h.rescale);
      } else if (name == "moment") {
        const ScanResult res = run_scan(scan_cfg);
        const FamilyMoment m =
            family_moment(curve, res.records, r_k, r_T, 100000,
                          cache_dir_from_env());
        out << "curve,k,T,empirical,predicted,count\n";
        out << curve.label << "," << csv(r_k) << "," << r_T << ","
            << csv(m.empirical) << "," << csv(m.predicted) << "," << m.count
            << "\n";
        config["k"] = format_double(r_k);
      }
      sub = "report-" + name;
    }

    const std::vector<std::string> files = out.flush();
    if (manifest_path.empty() && !out_path.empty())
      manifest_path = out_path + ".manifest.json";
    if (!files.empty() || !manifest_path.empty())
      emit_manifest(app, sub, config, files, manifest_path);
    return 0;
  } catch (const InsufficientData& e) {
    std::cerr << "error (insufficient data): " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return kExitNumerical;
  }
}
