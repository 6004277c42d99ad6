// Acceptance checks for the iARMA library: one PASS/FAIL line per criterion,
// exit status 1 if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "iarma/iarma.hpp"
#include "support/oracles.hpp"

namespace {

using namespace iarma;

struct Outcome {
  bool pass;
  std::string detail;
};

IrregularSeries simulated(const ModelParams& p, std::size_t n, std::uint64_t seed,
                          GapLaw law = GapLaw::shifted_exponential(1.0)) {
  return simulate(p, times_from_gaps(sample_gaps(law, n, rng::stream_seed({seed, rng::kGapStream}))),
                  rng::stream_seed({seed, rng::kInnovationStream}));
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Innovations log-likelihood equals the dense Gaussian log-density.
Outcome likelihood_oracle() {
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 50);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const ModelParams p(0.98 * u(eng), 0.98 * u(eng), 0.1 + 5.0 * u(eng), 4.0 * u(eng) - 2.0);
    const auto law = rep % 4 == 0 ? GapLaw::regular() : GapLaw::shifted_exponential(0.2 + 2.0 * u(eng));
    const auto s = simulated(p, static_cast<std::size_t>(len(eng)), 5000 + rep, law);
    std::vector<double> z(s.values().begin(), s.values().end());
    for (auto& v : z) v -= p.mu();
    const double dense = oracle::gaussian_logdensity(oracle::iarma_covariance(p, s.times()), z);
    worst = std::max(worst, std::abs(loglik(p, s) - dense));
  }
  return {worst < 1e-8, "500 instances, max |diff| = " + fmt("%.3g", worst)};
}

// 2. Unit gaps reduce to the classical ARMA(1,1).
Outcome regular_grid_reduction() {
  std::mt19937_64 eng(202);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  std::uniform_int_distribution<int> len(2, 200);
  double worst_pred = 0.0;
  for (int rep = 0; rep < 60; ++rep) {
    const double sigma2 = 0.5 + u(eng);
    const ModelParams p(u(eng), u(eng), sigma2);
    const auto n = static_cast<std::size_t>(len(eng));
    const auto s = simulated(p, n, 7000 + rep, GapLaw::regular());
    const auto tr = predict_innovations(p, s);
    const auto ref = oracle::innovations(oracle::arma11_toeplitz(p.phi(), p.theta(), sigma2, n),
                                         s.values());
    for (std::size_t i = 0; i < n; ++i) {
      worst_pred = std::max({worst_pred, std::abs(tr.xhat[i] - ref.xhat[i]),
                             std::abs(sigma2 * tr.c[i] - ref.v[i])});
    }
  }

  double worst_fit = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const std::array<std::array<double, 2>, 4> truth{{{0.5, 0.5}, {0.8, 0.2}, {0.3, 0.7}, {0.6, 0.3}}};
    const std::size_t n = 200;
    const auto s = simulated(ModelParams(truth[rep][0], truth[rep][1], 1.0), n, 7500 + rep,
                             GapLaw::regular());
    FitOptions opt;
    opt.mean = MeanHandling::fixed;
    opt.compute_se = false;
    const auto fit = fit_ml(s, opt);
    const std::vector<double> x(s.values().begin(), s.values().end());
    const optim::Objective dense = [&](std::span<const double> v) {
      return oracle::dense_profile(oracle::arma11_toeplitz(v[0], v[1], 1.0, n), x);
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    for (const auto& st : opt.starts) {
      const auto r = optim::minimize_box(dense, {st[0], st[1]},
                                         {{0.0, 0.0}, {1.0 - kDefaultBoundEps, 1.0 - kDefaultBoundEps}});
      if (r.f < best) {
        best = r.f;
        arg = r.x;
      }
    }
    worst_fit = std::max({worst_fit, std::abs(fit.params_hat.phi() - arg[0]),
                          std::abs(fit.params_hat.theta() - arg[1])});
  }
  // Optimizer tolerance: both optimizers stop at a projected gradient below
  // 1e-8 of the same objective; estimates agree to a few 1e-6.
  const bool ok = worst_pred < 1e-10 && worst_fit < 1e-5;
  return {ok, "c_n/predictions max |diff| = " + fmt("%.3g", worst_pred) +
                  ", fits max |diff| = " + fmt("%.3g", worst_fit)};
}

// 3. Innovations predictor and state-space filter agree.
Outcome representation_equivalence() {
  std::mt19937_64 eng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 300);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const ModelParams p(0.99 * u(eng), 0.99 * u(eng), 0.1 + 4.0 * u(eng), 2.0 * u(eng) - 1.0);
    const auto s = simulated(p, static_cast<std::size_t>(len(eng)), 9000 + rep,
                             GapLaw::shifted_exponential(0.1 + 3.0 * u(eng)));
    const auto inn = predict_innovations(p, s);
    const auto [st, ss] = predict_statespace(p, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst = std::max({worst, std::abs(inn.xhat[i] - ss.xhat[i]), std::abs(inn.c[i] - ss.c[i])});
    }
  }
  return {worst < 1e-10, "1000 instances, max |diff| = " + fmt("%.3g", worst)};
}

// 4. c_n > 0 and c_n(phi, theta) >= c_n(theta) >= 1 - theta^2.
Outcome positivity() {
  std::mt19937_64 eng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 1000);
  int violations = 0;
  double min_c = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 10000; ++rep) {
    const double phi = std::min(u(eng), 1.0 - 1e-9);
    const double theta = std::min(u(eng), 1.0 - 1e-9);
    std::vector<double> gaps(static_cast<std::size_t>(len(eng)) - 1);
    const int style = rep % 4;
    std::exponential_distribution<double> e(0.05 + 3.0 * u(eng));
    for (auto& g : gaps) {
      g = style == 0 ? 1.0 : style == 1 ? 1.0 + e(eng) : style == 2 ? 1.0 + 1e-3 * e(eng)
                                                                   : 1.0 + 50.0 * e(eng);
    }
    const auto c = cn_values(phi, theta, gaps);
    const auto ct = cn_values(0.0, theta, gaps);
    for (std::size_t i = 0; i < c.size(); ++i) {
      min_c = std::min(min_c, c[i]);
      if (!(c[i] > 0.0) || c[i] < ct[i] * (1.0 - 1e-12) ||
          ct[i] < (1.0 - theta * theta) * (1.0 - 1e-12)) {
        ++violations;
      }
    }
  }
  return {violations == 0, "10000 draws, violations = " + std::to_string(violations) +
                               ", min c_n = " + fmt("%.3g", min_c)};
}

// Published Monte Carlo table: theta rows per (N, theta), then phi rows per N.
struct TableRow {
  std::size_t n;
  double truth;
  std::array<double, 6> v;  // mean, se_hat, se_emp, bias, rmse, cv
};

const std::vector<TableRow> kThetaRows{
    {100, 0.1, {0.294, 0.245, 0.245, 0.194, 0.312, 0.835}},
    {100, 0.5, {0.500, 0.252, 0.263, 0.000, 0.252, 0.505}},
    {100, 0.9, {0.796, 0.232, 0.228, -0.104, 0.255, 0.292}},
    {500, 0.1, {0.192, 0.158, 0.179, 0.092, 0.183, 0.827}},
    {500, 0.5, {0.501, 0.149, 0.160, 0.001, 0.149, 0.298}},
    {500, 0.9, {0.885, 0.090, 0.094, -0.015, 0.091, 0.102}},
    {1500, 0.1, {0.131, 0.102, 0.116, 0.031, 0.106, 0.780}},
    {1500, 0.5, {0.499, 0.094, 0.098, -0.001, 0.094, 0.188}},
    {1500, 0.9, {0.895, 0.050, 0.049, -0.005, 0.050, 0.056}},
};
const std::vector<TableRow> kPhiRows{
    {100, 0.5, {0.448, 0.155, 0.167, -0.052, 0.163, 0.346}},
    {500, 0.5, {0.488, 0.076, 0.079, -0.012, 0.077, 0.156}},
    {1500, 0.5, {0.497, 0.046, 0.048, -0.003, 0.046, 0.092}},
};

std::array<double, 6> values(const mc::ParamSummary& s) {
  return {s.mean, s.se_hat, s.se_emp, s.bias, s.rmse, s.cv};
}

// 5. Reproduce every table entry within 0.025.
Outcome table_reproduction(const std::vector<mc::Cell>& cells) {
  static const char* kCols[] = {"mean", "se_hat", "se_emp", "bias", "rmse", "cv"};
  constexpr double kTol = 0.025;
  int misses = 0, entries = 0;
  double worst = 0.0;
  std::string miss_list;
  std::printf("  %-14s %-6s %8s %8s %8s %8s %8s %8s\n", "row", "", "mean", "se_hat", "se_emp",
              "bias", "rmse", "cv");
  auto compare = [&](const std::string& label, const std::array<double, 6>& ours,
                     const std::array<double, 6>& paper) {
    std::printf("  %-14s %-6s", label.c_str(), "ours");
    for (double v : ours) std::printf(" %8.3f", v);
    std::printf("\n  %-14s %-6s", "", "paper");
    for (double v : paper) std::printf(" %8.3f", v);
    std::printf("\n");
    for (std::size_t k = 0; k < 6; ++k) {
      ++entries;
      const double d = std::abs(ours[k] - paper[k]);
      worst = std::max(worst, d);
      if (!(d <= kTol)) {
        ++misses;
        miss_list += " " + label + "/" + kCols[k] + "(" + fmt("%+.3f", ours[k] - paper[k]) + ")";
      }
    }
  };
  for (std::size_t i = 0; i < kThetaRows.size(); ++i) {
    const auto& r = kThetaRows[i];
    compare("N=" + std::to_string(r.n) + " th=" + fmt("%.1f", r.truth), values(cells[i].theta), r.v);
  }
  // The single phi row per N is compared with the theta = 0.5 cell.
  for (std::size_t j = 0; j < kPhiRows.size(); ++j) {
    compare("N=" + std::to_string(kPhiRows[j].n) + " phi", values(cells[3 * j + 1].phi),
            kPhiRows[j].v);
  }
  std::string detail = std::to_string(entries - misses) + "/" + std::to_string(entries) +
                       " entries within 0.025, max |diff| = " + fmt("%.3f", worst);
  if (misses) detail += "; misses:" + miss_list;
  return {misses == 0, detail};
}

// 6. |bias|, RMSE and CV strictly decrease with N within every cell.
Outcome monotone_consistency(const std::vector<mc::Cell>& cells) {
  int broken = 0;
  std::string list;
  auto check = [&](const std::string& label, const std::array<const mc::ParamSummary*, 3>& s) {
    const std::array<std::pair<const char*, std::function<double(const mc::ParamSummary&)>>, 3> m{{
        {"|bias|", [](const mc::ParamSummary& p) { return std::abs(p.bias); }},
        {"rmse", [](const mc::ParamSummary& p) { return p.rmse; }},
        {"cv", [](const mc::ParamSummary& p) { return p.cv; }},
    }};
    for (const auto& [name, f] : m) {
      const double a = f(*s[0]), b = f(*s[1]), c = f(*s[2]);
      if (!(a > b && b > c)) {
        ++broken;
        list += " " + label + " " + name + " (" + fmt("%.4f", a) + ", " + fmt("%.4f", b) + ", " +
                fmt("%.4f", c) + ")";
      }
    }
  };
  for (std::size_t k = 0; k < 3; ++k) {
    check("theta=" + fmt("%.1f", cells[k].design.theta),
          {&cells[k].theta, &cells[k + 3].theta, &cells[k + 6].theta});
    check("phi|theta=" + fmt("%.1f", cells[k].design.theta),
          {&cells[k].phi, &cells[k + 3].phi, &cells[k + 6].phi});
  }
  std::string detail = std::to_string(18 - broken) + "/18 sequences strictly decreasing";
  if (broken) detail += "; not decreasing:" + list;
  return {broken == 0, detail};
}

// 7. Irregular gaps inflate the empirical SE relative to unit gaps.
Outcome irregularity_penalty(const mc::Cell& irregular, std::uint64_t seed) {
  mc::Design d = irregular.design;
  d.gaps = GapLaw::regular();
  d.cell_index = 100;
  d.base_seed = seed;
  const auto regular = mc::run_cell(d);
  const bool ok = irregular.phi.se_emp > regular.phi.se_emp &&
                  irregular.theta.se_emp > regular.theta.se_emp;
  return {ok, "se_emp(phi) regular " + fmt("%.4f", regular.phi.se_emp) + " vs exp " +
                  fmt("%.4f", irregular.phi.se_emp) + "; se_emp(theta) regular " +
                  fmt("%.4f", regular.theta.se_emp) + " vs exp " +
                  fmt("%.4f", irregular.theta.se_emp)};
}

// 8. Ljung-Box size under white noise.
Outcome ljung_box_size() {
  int rejections = 0;
  constexpr int kSamples = 2000;
  for (int r = 0; r < kSamples; ++r) {
    std::mt19937_64 eng(rng::stream_seed({808, static_cast<std::uint64_t>(r)}));
    std::normal_distribution<double> z;
    std::vector<double> x(500);
    for (auto& v : x) v = z(eng);
    if (ljung_box(x, 10)[9].p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kSamples;
  return {rate >= 0.035 && rate <= 0.065, "rejection rate " + fmt("%.4f", rate)};
}

// 9. iMA submodel recovery and the diagnostics bundle.
Outcome ima_application() {
  const ModelParams truth(0.0, 0.85, 258.0, 0.0);
  constexpr std::size_t kN = 100;
  FitOptions opt;
  opt.fix_phi = 0.0;

  // Empirical SEs of the constrained estimator from 300 replicates.
  std::vector<double> th, s2;
  for (std::uint64_t m = 0; m < 300; ++m) {
    const auto f = fit_ml(simulated(truth, kN, rng::stream_seed({909, m})), opt);
    if (!f.converged) continue;
    th.push_back(f.params_hat.theta());
    s2.push_back(f.params_hat.sigma2());
  }
  auto sd = [](const std::vector<double>& v) {
    double mean = 0.0, ss = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  const double se_th = sd(th), se_s2 = sd(s2);

  const auto s = simulated(truth, kN, 909909);
  const auto fit = fit_ml(s, opt);
  const double dth = std::abs(fit.params_hat.theta() - 0.85) / se_th;
  const double ds2 = std::abs(fit.params_hat.sigma2() - 258.0) / se_s2;
  const bool recovered = fit.converged && dth < 3.0 && ds2 < 3.0;

  const auto tr = predict_innovations(fit.params_hat, s, SigmaSource::profile);
  const auto a = acf(tr.std_resid, 10);
  std::size_t outside = 0;
  for (double r : a.rho) outside += std::abs(r) > a.band ? 1 : 0;
  const auto lb = ljung_box(a);
  const auto qq = qq_data(tr.std_resid);
  const bool bundle = outside == 0 && lb.back().p_value >= 0.05 && qq.size() == kN &&
                      lb.size() == 10;
  return {recovered && bundle,
          "theta_hat " + fmt("%.3f", fit.params_hat.theta()) + " (" + fmt("%.2f", dth) +
              " emp. SE from truth), sigma2_hat " + fmt("%.1f", fit.params_hat.sigma2()) + " (" +
              fmt("%.2f", ds2) + " emp. SE), se(theta) " +
              (fit.se.theta ? fmt("%.3f", *fit.se.theta) : std::string("NA")) +
              "; residual ACF outside band " + std::to_string(outside) + "/10, Ljung-Box Q(10) p = " +
              fmt("%.3f", lb.back().p_value)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  report(1, "likelihood oracle", likelihood_oracle());
  report(2, "regular-grid reduction", regular_grid_reduction());
  report(3, "representation equivalence", representation_equivalence());
  report(4, "positivity", positivity());

  constexpr std::uint64_t kSeed = 20240601;
  const auto cells = mc::run_grid(mc::reference_grid(1000, kSeed));
  for (const auto& c : cells) {
    if (!c.error.empty() || c.flagged) {
      std::printf("  note: cell N=%zu theta=%.1f: %zu failed fits %s\n", c.design.n,
                  c.design.theta, c.failures, c.error.c_str());
    }
  }
  report(5, "Monte Carlo table reproduction", table_reproduction(cells));
  report(6, "monotone consistency", monotone_consistency(cells));
  report(7, "irregularity penalty", irregularity_penalty(cells[4], kSeed));
  report(8, "Ljung-Box size", ljung_box_size());
  report(9, "iMA application substitute", ima_application());

  const double secs = std::chrono::duration<double>(clock::now() - t0).count();
  std::printf("%d of 9 criteria failed (%.0f s)\n", failed, secs);
  return failed == 0 ? 0 : 1;
}
