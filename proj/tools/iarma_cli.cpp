// iarma: command-line driver for simulation, fitting, prediction, residual
// diagnostics and Monte Carlo studies of the iARMA model.
//
// Exit codes: 0 success, 2 invalid input or options, 3 I/O failure,
// 4 numerical failure (degenerate data, optimizer failure).
//
// Every subcommand accepts --config FILE, a key=value file whose keys are
// long option names without the leading dashes. Options given on the
// command line override the file.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iarma/iarma.hpp"

namespace {

using namespace iarma;

enum Exit : int { kOk = 0, kValidation = 2, kIo = 3, kNumerical = 4 };

std::string na_or(const std::optional<double>& v) { return v ? io::fmt_double(*v) : "NA"; }

/// Reads a series and reports any rescaling of the time axis on stderr.
IrregularSeries load_series(const std::string& path, bool no_rescale) {
  auto s = io::read_series(path, no_rescale ? Rescale::forbid : Rescale::automatic);
  if (s.rescaled()) {
    std::cerr << "iarma: note: times divided by " << io::fmt_double(s.time_scale())
              << " so that the minimum gap is 1\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Parameters shared by forecast and diagnose: supplied, or fitted on the fly.

struct ParamArgs {
  std::optional<double> phi, theta, sigma2, mu;
  std::optional<double> fix_phi, fix_theta;
  bool fixed_mean = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--phi", phi, "Autoregressive parameter in [0,1); fitted when omitted");
    cmd->add_option("--theta", theta, "Moving-average parameter in [0,1); fitted when omitted");
    cmd->add_option("--sigma2", sigma2,
                    "Innovation variance; profile estimate when omitted");
    cmd->add_option("--mu", mu, "Process mean; sample mean when omitted");
    cmd->add_option("--fix-phi", fix_phi, "Hold phi at this value when fitting");
    cmd->add_option("--fix-theta", fix_theta, "Hold theta at this value when fitting");
    cmd->add_flag("--fixed-mean", fixed_mean, "Fit with --mu (default 0) as a known mean");
  }
};

struct Resolved {
  ModelParams params{0.0, 0.0, 1.0};
  SigmaSource source = SigmaSource::supplied;
  std::optional<FitResult> fit;
  int fitted_count = 0;
};

double sample_mean(const IrregularSeries& s) {
  const auto v = s.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Resolved resolve_params(const ParamArgs& a, const IrregularSeries& s) {
  Resolved r;
  if (a.phi.has_value() != a.theta.has_value()) {
    throw ValidationError("supply both --phi and --theta, or neither to fit them");
  }
  if (a.phi) {
    const double mu = a.mu ? *a.mu : sample_mean(s);
    if (a.sigma2) {
      r.params = ModelParams(*a.phi, *a.theta, *a.sigma2, mu);
    } else {
      const auto pv = reduced_likelihood(*a.phi, *a.theta, s, mu);
      r.params = ModelParams(*a.phi, *a.theta, pv.sigma2, mu);
      r.source = SigmaSource::profile;
    }
    return r;
  }
  FitOptions opt;
  opt.mean = a.fixed_mean ? MeanHandling::fixed : MeanHandling::sample_mean;
  opt.mu = a.mu.value_or(0.0);
  if (!a.fixed_mean && a.mu) throw ValidationError("--mu without --phi/--theta needs --fixed-mean");
  opt.fix_phi = a.fix_phi;
  opt.fix_theta = a.fix_theta;
  r.fit = fit_ml(s, opt);
  if (!r.fit->converged) throw NumericalError("optimizer did not converge");
  r.params = r.fit->params_hat;
  if (a.sigma2) {
    r.params = r.params.with_sigma2(*a.sigma2);
  } else {
    r.source = SigmaSource::profile;
  }
  r.fitted_count = (a.fix_phi ? 0 : 1) + (a.fix_theta ? 0 : 1);
  return r;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  double phi = 0.0, theta = 0.0, sigma2 = 1.0, mu = 0.0;
  std::size_t n = 100;
  std::string gaps = "regular";
  std::uint64_t seed = 1;
  std::string times_file, out, meta;
};

int run_simulate(const SimulateArgs& a) {
  const ModelParams p(a.phi, a.theta, a.sigma2, a.mu);
  const auto law = GapLaw::parse(a.gaps);
  std::vector<double> times;
  std::uint64_t gap_seed = 0;
  if (!a.times_file.empty()) {
    times = io::parse_series_csv(io::read_lines(a.times_file), a.times_file).t;
  } else {
    if (a.n < 1) throw ValidationError("--n must be at least 1");
    gap_seed = rng::stream_seed({a.seed, rng::kGapStream});
    times = times_from_gaps(sample_gaps(law, a.n, gap_seed));
  }
  const std::uint64_t innov_seed = rng::stream_seed({a.seed, rng::kInnovationStream});
  const auto s = simulate(p, times, innov_seed);
  io::write_text(a.out, io::series_csv(s));

  io::KeyValues kv{{"command", "simulate"},
                   {"phi", io::fmt_double(a.phi)},
                   {"theta", io::fmt_double(a.theta)},
                   {"sigma2", io::fmt_double(a.sigma2)},
                   {"mu", io::fmt_double(a.mu)},
                   {"n", std::to_string(s.size())},
                   {"seed", std::to_string(a.seed)},
                   {"innovation_seed", std::to_string(innov_seed)}};
  if (a.times_file.empty()) {
    kv.emplace_back("gaps", law.to_string());
    kv.emplace_back("gap_seed", std::to_string(gap_seed));
  } else {
    kv.emplace_back("times_file", a.times_file);
  }
  io::write_text(a.meta.empty() ? a.out + ".meta" : a.meta, io::key_values_text(kv));
  return kOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string in, out, mean = "sample";
  double mu = 0.0;
  std::optional<double> fix_phi, fix_theta;
  double level = 0.05;
  bool no_rescale = false;
  bool kv = false;
};

io::KeyValues fit_report(const FitResult& f, const IrregularSeries& s, const FitArgs& a) {
  const auto& p = f.params_hat;
  io::KeyValues kv{{"n", std::to_string(s.size())},
                   {"time_scale", io::fmt_double(s.time_scale())},
                   {"mean_handling", a.mean},
                   {"mu", io::fmt_double(p.mu())},
                   {"phi", io::fmt_double(p.phi())},
                   {"theta", io::fmt_double(p.theta())},
                   {"sigma2", io::fmt_double(p.sigma2())},
                   {"se_phi", na_or(f.se.phi)},
                   {"se_theta", na_or(f.se.theta)},
                   {"se_sigma2", na_or(f.se.sigma2)}};
  auto wald = [&](const char* name, double est, const std::optional<double>& se) {
    if (se && *se > 0.0) {
      const auto w = wald_test(est, se, a.level);
      kv.emplace_back(std::string("z_") + name, io::fmt_double(w.z));
      kv.emplace_back(std::string("p_") + name, io::fmt_double(w.p_value));
    } else {
      kv.emplace_back(std::string("z_") + name, "NA");
      kv.emplace_back(std::string("p_") + name, "NA");
    }
  };
  wald("phi", p.phi(), f.se.phi);
  wald("theta", p.theta(), f.se.theta);
  kv.emplace_back("loglik", io::fmt_double(f.loglik));
  kv.emplace_back("q", io::fmt_double(f.q_value));
  kv.emplace_back("converged", f.converged ? "true" : "false");
  kv.emplace_back("iterations", std::to_string(f.iterations));
  kv.emplace_back("phi_fixed", f.phi_fixed ? "true" : "false");
  kv.emplace_back("theta_fixed", f.theta_fixed ? "true" : "false");
  kv.emplace_back("phi_at_bound", f.at_bound.phi ? "true" : "false");
  kv.emplace_back("theta_at_bound", f.at_bound.theta ? "true" : "false");
  kv.emplace_back("se_note", f.se.note);
  std::string warn;
  for (const auto& w : f.warnings) warn += (warn.empty() ? "" : "; ") + w;
  kv.emplace_back("warnings", warn);
  return kv;
}

std::string fit_text(const io::KeyValues& kv) {
  auto get = [&](const std::string& k) {
    for (const auto& [key, v] : kv) {
      if (key == k) return v;
    }
    return std::string();
  };
  // Human-readable view with 6 significant digits; --kv keeps full precision.
  auto num = [&](const std::string& k) {
    const std::string v = get(k);
    if (v == "NA" || v.empty()) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::stod(v));
    return std::string(buf);
  };
  auto cell = [](const std::string& v, int width) {
    return v.size() >= static_cast<std::size_t>(width) ? v + " "
                                                         : v + std::string(width - v.size(), ' ');
  };
  std::ostringstream os;
  os << "iARMA maximum-likelihood fit (N = " << get("n") << ", mean " << get("mean_handling")
     << ", mu = " << num("mu") << ")\n";
  os << "  " << cell("param", 9) << cell("estimate", 14) << cell("std.err", 14) << cell("z", 12)
     << "p\n";
  for (const std::string name : {"phi", "theta"}) {
    os << "  " << cell(name, 9) << cell(num(name), 14) << cell(num("se_" + name), 14)
       << cell(num("z_" + name), 12) << num("p_" + name)
       << (get(name + "_fixed") == "true" ? "  fixed" : "")
       << (get(name + "_at_bound") == "true" ? "  at bound" : "") << "\n";
  }
  os << "  " << cell("sigma2", 9) << cell(num("sigma2"), 14) << num("se_sigma2") << "\n";
  os << "  log-likelihood " << num("loglik") << ", q " << num("q") << ", "
     << (get("converged") == "true" ? "converged" : "NOT converged") << " after "
     << get("iterations") << " iterations\n";
  if (get("time_scale") != "1") os << "  times divided by " << num("time_scale") << "\n";
  if (!get("se_note").empty()) os << "  note: " << get("se_note") << "\n";
  if (!get("warnings").empty()) os << "  warning: " << get("warnings") << "\n";
  return os.str();
}

int run_fit(const FitArgs& a) {
  if (a.mean != "sample" && a.mean != "fixed") {
    throw ValidationError("--mean must be 'sample' or 'fixed'");
  }
  if (!(a.level > 0.0 && a.level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
  const auto s = load_series(a.in, a.no_rescale);
  FitOptions opt;
  opt.mean = a.mean == "fixed" ? MeanHandling::fixed : MeanHandling::sample_mean;
  opt.mu = a.mu;
  opt.fix_phi = a.fix_phi;
  opt.fix_theta = a.fix_theta;
  const auto f = fit_ml(s, opt);
  const auto kv = fit_report(f, s, a);
  const std::string text = a.kv ? io::key_values_text(kv) : fit_text(kv);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    io::write_text(a.out, io::key_values_text(kv));
    if (!a.kv) std::cout << text;
  }
  if (!f.converged) {
    std::cerr << "iarma: error: optimizer did not converge\n";
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// forecast

struct ForecastArgs {
  std::string in, out;
  ParamArgs params;
  double coverage = 0.95;
  bool no_rescale = false;
};

int run_forecast(const ForecastArgs& a) {
  const double mult = band_multiplier(a.coverage);
  const auto s = load_series(a.in, a.no_rescale);
  const auto r = resolve_params(a.params, s);
  const auto tr = predict_innovations(r.params, s, r.source);
  const double s2 = r.source == SigmaSource::profile ? tr.sigma2_used : r.params.sigma2();
  std::string csv = "t,x,xhat,mse,lo,hi\n";
  const auto t = s.original_times();
  const auto x = s.values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double mse = s2 * tr.c[i];
    const double half = mult * std::sqrt(mse);
    csv += io::fmt_double(t[i]) + "," + io::fmt_double(x[i]) + "," + io::fmt_double(tr.xhat[i]) +
           "," + io::fmt_double(mse) + "," + io::fmt_double(tr.xhat[i] - half) + "," +
           io::fmt_double(tr.xhat[i] + half) + "\n";
  }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::write_text(a.out, csv);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string in, prefix;
  ParamArgs params;
  std::size_t lags = 10;
  double level = 0.05;
  bool adjust_df = false;
  bool no_rescale = false;
};

int run_diagnose(const DiagnoseArgs& a) {
  if (!(a.level > 0.0 && a.level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
  const auto s = load_series(a.in, a.no_rescale);
  if (a.lags < 1 || a.lags >= s.size()) {
    throw ValidationError("max lag must be < N (max lag " + std::to_string(a.lags) + ", N " +
                          std::to_string(s.size()) + ")");
  }
  const auto r = resolve_params(a.params, s);
  const auto tr = predict_innovations(r.params, s, r.source);
  const auto est = acf(tr.std_resid, a.lags);
  const auto lb = ljung_box(est, a.adjust_df ? r.fitted_count : 0);
  const auto qq = qq_data(tr.std_resid);

  std::string res = "t,x,xhat,resid,std_resid\n";
  const auto t = s.original_times();
  for (std::size_t i = 0; i < s.size(); ++i) {
    res += io::fmt_double(t[i]) + "," + io::fmt_double(s.values()[i]) + "," +
           io::fmt_double(tr.xhat[i]) + "," + io::fmt_double(tr.resid[i]) + "," +
           io::fmt_double(tr.std_resid[i]) + "\n";
  }
  std::string acf_csv = "lag,acf,lower,upper\n";
  std::size_t outside = 0;
  for (std::size_t k = 1; k <= est.max_lag(); ++k) {
    if (std::abs(est.at(k)) > est.band) ++outside;
    acf_csv += std::to_string(k) + "," + io::fmt_double(est.at(k)) + "," +
               io::fmt_double(-est.band) + "," + io::fmt_double(est.band) + "\n";
  }
  std::string lb_csv = "lag,q,df,p_value\n";
  for (const auto& row : lb) {
    lb_csv += std::to_string(row.lag) + "," + io::fmt_double(row.q) + "," +
              std::to_string(row.df) + "," +
              (std::isnan(row.p_value) ? std::string("NA") : io::fmt_double(row.p_value)) + "\n";
  }
  std::string qq_csv = "theoretical,sample\n";
  for (const auto& pt : qq) {
    qq_csv += io::fmt_double(pt.theoretical) + "," + io::fmt_double(pt.sample) + "\n";
  }

  const auto& last = lb.back();
  const bool lb_pass = !(last.p_value < a.level);
  io::KeyValues summary{{"n", std::to_string(s.size())},
                        {"phi", io::fmt_double(r.params.phi())},
                        {"theta", io::fmt_double(r.params.theta())},
                        {"sigma2", io::fmt_double(r.params.sigma2())},
                        {"mu", io::fmt_double(r.params.mu())},
                        {"params_source", r.fit ? "fitted" : "supplied"},
                        {"level", io::fmt_double(a.level)},
                        {"max_lag", std::to_string(a.lags)},
                        {"acf_band", io::fmt_double(est.band)},
                        {"acf_outside_band", std::to_string(outside)},
                        {"ljung_box_q", io::fmt_double(last.q)},
                        {"ljung_box_df", std::to_string(last.df)},
                        {"ljung_box_p", io::fmt_double(last.p_value)},
                        {"ljung_box_pass", lb_pass ? "true" : "false"}};

  io::write_text(a.prefix + "_residuals.csv", res);
  io::write_text(a.prefix + "_acf.csv", acf_csv);
  io::write_text(a.prefix + "_ljungbox.csv", lb_csv);
  io::write_text(a.prefix + "_qq.csv", qq_csv);
  io::write_text(a.prefix + "_summary.txt", io::key_values_text(summary));
  std::cout << "Ljung-Box Q(" << last.lag << ") = " << io::fmt_double(last.q)
            << ", p = " << io::fmt_double(last.p_value) << ": "
            << (lb_pass ? "PASS" : "FAIL") << " at level " << a.level << "; " << outside
            << " of " << a.lags << " residual autocorrelations outside the band\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// mc

struct McArgs {
  std::string grid, out;
  std::size_t m = 1000;
  bool m_small = false;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool fixed_grid = false;
  bool known_mean = false;
};

int run_mc(const McArgs& a) {
  const std::size_t m = a.m_small ? 10 : a.m;
  std::vector<io::GridRow> rows;
  if (a.grid.empty()) {
    for (const auto& d : mc::reference_grid(m, a.seed)) rows.push_back({d, {}});
  } else {
    rows = io::parse_grid(io::read_lines(a.grid), m, a.seed, a.grid);
  }
  std::string csv = io::mc_csv_header();
  for (auto& row : rows) {
    row.design.fixed_grid = a.fixed_grid;
    row.design.mean = a.known_mean ? MeanHandling::fixed : MeanHandling::sample_mean;
    mc::Cell cell;
    if (row.error.empty()) {
      cell = mc::run_grid({row.design}, a.threads).front();
    } else {
      cell.design = row.design;
      cell.error = row.error;
    }
    if (!cell.error.empty()) std::cerr << "iarma: skipped grid row: " << cell.error << "\n";
    if (cell.flagged) {
      std::cerr << "iarma: warning: cell n=" << cell.design.n << " theta="
                << cell.design.theta << " had " << cell.failures << " failed fits\n";
    }
    csv += io::mc_csv_row(cell);
  }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::write_text(a.out, csv);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Config file injection

/// Inserts `--key=value` tokens from the --config file right after the
/// subcommand name, so that later command-line occurrences win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> path;
  std::size_t at = 0, width = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      at = i;
      width = 2;
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      at = i;
      width = 1;
      break;
    }
  }
  if (!path) return args;
  args.erase(args.begin() + static_cast<std::ptrdiff_t>(at),
             args.begin() + static_cast<std::ptrdiff_t>(at + width));
  std::vector<std::string> injected;
  for (const auto& [k, v] : io::read_key_values(*path)) {
    if (k == "config") throw ValidationError(*path + ": config files cannot be nested");
    injected.push_back("--" + k + "=" + v);
  }
  // The subcommand is the first token that does not start with '-'.
  std::size_t sub = 1;
  while (sub < args.size() && args[sub].rfind("-", 0) == 0) ++sub;
  const std::size_t pos = sub < args.size() ? sub + 1 : args.size();
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iarma: irregularly observed ARMA(1,1) models"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "iarma 0.1.0");
  const char* config_help = "key=value file supplying any option; command-line options win";

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate an iARMA series to CSV (t,x)");
  c_sim->add_option("--config")->description(config_help)->type_name("FILE");
  c_sim->add_option("--phi", sim.phi, "Autoregressive parameter in [0,1)")->required();
  c_sim->add_option("--theta", sim.theta, "Moving-average parameter in [0,1)")->required();
  c_sim->add_option("--sigma2", sim.sigma2, "Innovation variance (> 0)")->capture_default_str();
  c_sim->add_option("--mu", sim.mu, "Process mean")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Number of observations")->capture_default_str();
  c_sim->add_option("--gaps", sim.gaps, "Gap law: 'regular' or 'exp:<rate>' (gaps 1 + Exp(rate))")
      ->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Base random seed")->capture_default_str();
  c_sim->add_option("--times", sim.times_file,
                    "CSV whose 't' column gives the time grid (overrides --n/--gaps)");
  c_sim->add_option("--out", sim.out, "Output CSV path")->required();
  c_sim->add_option("--meta", sim.meta, "Metadata sidecar path (default <out>.meta)");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum-likelihood fit of a CSV series");
  c_fit->add_option("--config")->description(config_help)->type_name("FILE");
  c_fit->add_option("--in", fit.in, "Input CSV with header t,x")->required();
  c_fit->add_option("--mean", fit.mean, "'sample' (demean) or 'fixed' (use --mu)")
      ->capture_default_str();
  c_fit->add_option("--mu", fit.mu, "Known mean with --mean fixed")->capture_default_str();
  c_fit->add_option("--fix-phi", fit.fix_phi, "Hold phi at this value (0 gives the iMA fit)");
  c_fit->add_option("--fix-theta", fit.fix_theta, "Hold theta at this value (0 gives the iAR fit)");
  c_fit->add_option("--level", fit.level, "Level of the Wald tests")->capture_default_str();
  c_fit->add_flag("--no-rescale", fit.no_rescale, "Fail instead of rescaling gaps below 1");
  c_fit->add_flag("--kv", fit.kv, "Print the key=value report instead of the table");
  c_fit->add_option("--out", fit.out, "Also write the key=value report to this file");

  ForecastArgs fc;
  auto* c_fc = app.add_subcommand("forecast", "One-step predictions with bands to CSV");
  c_fc->add_option("--config")->description(config_help)->type_name("FILE");
  c_fc->add_option("--in", fc.in, "Input CSV with header t,x")->required();
  fc.params.add(c_fc);
  c_fc->add_option("--coverage", fc.coverage, "Band coverage in [0,1)")->capture_default_str();
  c_fc->add_flag("--no-rescale", fc.no_rescale, "Fail instead of rescaling gaps below 1");
  c_fc->add_option("--out", fc.out, "Output CSV (t,x,xhat,mse,lo,hi); stdout if omitted");

  DiagnoseArgs dg;
  auto* c_dg = app.add_subcommand("diagnose", "Residual ACF, Ljung-Box and QQ data");
  c_dg->add_option("--config")->description(config_help)->type_name("FILE");
  c_dg->add_option("--in", dg.in, "Input CSV with header t,x")->required();
  dg.params.add(c_dg);
  c_dg->add_option("--lags", dg.lags, "Maximum lag L (< N)")->capture_default_str();
  c_dg->add_option("--level", dg.level, "Ljung-Box test level")->capture_default_str();
  c_dg->add_flag("--adjust-df", dg.adjust_df,
                 "Subtract the number of fitted ARMA parameters from the Ljung-Box df");
  c_dg->add_flag("--no-rescale", dg.no_rescale, "Fail instead of rescaling gaps below 1");
  c_dg->add_option("--prefix", dg.prefix,
                   "Output prefix for _residuals.csv, _acf.csv, _ljungbox.csv, _qq.csv, "
                   "_summary.txt")
      ->required();

  McArgs mcargs;
  auto* c_mc = app.add_subcommand("mc", "Monte Carlo parameter-recovery study");
  c_mc->add_option("--config")->description(config_help)->type_name("FILE");
  c_mc->add_option("--grid", mcargs.grid,
                   "Grid CSV with header n,phi,theta,sigma2,gaps (default: reference grid)");
  c_mc->add_option("--m", mcargs.m, "Replicates per cell")->capture_default_str();
  c_mc->add_flag("--m-small", mcargs.m_small, "Quick run with 10 replicates per cell");
  c_mc->add_option("--seed", mcargs.seed, "Base random seed")->capture_default_str();
  c_mc->add_option("--threads", mcargs.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  c_mc->add_flag("--fixed-grid", mcargs.fixed_grid, "Draw one time grid per cell");
  c_mc->add_flag("--known-mean", mcargs.known_mean, "Fit with the true mean 0 instead of demeaning");
  c_mc->add_option("--out", mcargs.out, "Output CSV; stdout if omitted");

  try {
    auto args = expand_config(argc, argv);
    std::vector<char*> ptrs;
    for (auto& s : args) ptrs.push_back(s.data());
    try {
      app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kOk : kValidation;
    }
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_fit->parsed()) return run_fit(fit);
    if (c_fc->parsed()) return run_forecast(fc);
    if (c_dg->parsed()) return run_diagnose(dg);
    if (c_mc->parsed()) return run_mc(mcargs);
  } catch (const ValidationError& e) {
    std::cerr << "iarma: error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "iarma: error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "iarma: error: " << e.what() << "\n";
    return kNumerical;
  }
  return kValidation;
}
