#pragma once

/** @file
 * Gaussian maximum likelihood for the iARMA model.
 *
 * The exact log-likelihood factorizes over the one-step prediction errors:
 *
 *   l = -N/2 ln(2 pi) - N/2 ln sigma2 - 1/2 sum ln c_n
 *       - 1/2 sum (x_n - xhat_n)^2 / (sigma2 c_n).
 *
 * Maximizing over sigma2 gives sigma2_hat = (1/N) sum (x_n - xhat_n)^2 / c_n and
 * the reduced objective q = ln sigma2_hat + (1/N) sum ln c_n, which is minimized
 * over [0, 1 - eps]^2. Standard errors come from a central-difference Hessian
 * of -l in (phi, theta, sigma2).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "iarma/error.hpp"
#include "iarma/filter.hpp"
#include "iarma/model.hpp"
#include "iarma/optim.hpp"

namespace iarma {

inline constexpr double kDefaultBoundEps = 1e-6;
/// Distance from a bound below which an estimate counts as on the bound.
inline constexpr double kAtBoundTol = 1e-10;

namespace detail {

struct ProfileSums {
  double ss = 0.0;     ///< sum resid^2 / c
  double logc = 0.0;   ///< sum ln c
};

inline ProfileSums profile_sums(double phi, double theta, std::span<const double> gaps,
                                std::span<const double> z) {
  ProfileSums acc;
  innovations_kernel(phi, theta, gaps, z, [&](std::size_t i, double xhat, double c) {
    const double r = z[i] - xhat;
    acc.ss += r * r / c;
    acc.logc += std::log(c);
  });
  return acc;
}

/// Full log-likelihood on centred data, no parameter validation.
inline double loglik_centred(double phi, double theta, double sigma2,
                             std::span<const double> gaps, std::span<const double> z) {
  const auto s = profile_sums(phi, theta, gaps, z);
  const double n = static_cast<double>(z.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * n * std::log(sigma2) -
         0.5 * s.logc - 0.5 * s.ss / sigma2;
}

}  // namespace detail

/// Exact Gaussian log-likelihood at params (including mu).
inline double loglik(const ModelParams& p, const IrregularSeries& s) {
  detail::check_gaps(s.gaps());
  const auto z = detail::centred(s, p.mu());
  const double l = detail::loglik_centred(p.phi(), p.theta(), p.sigma2(), s.gaps(), z);
  if (!std::isfinite(l)) {
    throw NumericalError("log-likelihood is not finite at phi=" + std::to_string(p.phi()) +
                         ", theta=" + std::to_string(p.theta()));
  }
  return l;
}

struct ProfileValue {
  double q;
  double sigma2;
};

/// Reduced likelihood q(phi, theta) and the profile sigma2 on data centred at mu.
inline ProfileValue reduced_likelihood(double phi, double theta, const IrregularSeries& s,
                                       double mu = 0.0) {
  if (!(phi >= 0.0 && phi < 1.0) || !(theta >= 0.0 && theta < 1.0)) {
    throw ValidationError("phi and theta must lie in [0, 1)");
  }
  detail::check_gaps(s.gaps());
  const auto z = detail::centred(s, mu);
  const auto sums = detail::profile_sums(phi, theta, s.gaps(), z);
  const double n = static_cast<double>(s.size());
  const double s2 = sums.ss / n;
  if (!(s2 > 0.0)) throw DegenerateDataError("all prediction errors are zero; q is undefined");
  const double q = std::log(s2) + sums.logc / n;
  if (!std::isfinite(q)) throw NumericalError("reduced likelihood is not finite");
  return {q, s2};
}

// ---------------------------------------------------------------------------
// Fitting

enum class MeanHandling {
  sample_mean,  ///< subtract the sample mean before fitting
  fixed,        ///< use FitOptions::mu as a known mean
};

struct FitOptions {
  MeanHandling mean = MeanHandling::sample_mean;
  double mu = 0.0;
  std::optional<double> fix_phi;
  std::optional<double> fix_theta;
  double bound_eps = kDefaultBoundEps;
  std::vector<std::array<double, 2>> starts = {{0.2, 0.2}, {0.2, 0.7}, {0.7, 0.2}, {0.7, 0.7}};
  optim::Options optimizer{};
  bool compute_se = true;
};

struct StdErrors {
  std::optional<double> phi;
  std::optional<double> theta;
  std::optional<double> sigma2;
  std::string note;  ///< why entries are missing, if any

  bool available() const { return phi || theta || sigma2; }
};

struct StartRecord {
  std::array<double, 2> start{};
  std::array<double, 2> end{};
  double q = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  std::string message;
};

struct BoundaryFlags {
  bool phi = false;
  bool theta = false;
};

struct FitResult {
  ModelParams params_hat{0.0, 0.0, 1.0};
  StdErrors se;
  double loglik = 0.0;
  double q_value = 0.0;
  bool converged = false;
  int iterations = 0;
  BoundaryFlags at_bound;
  bool phi_fixed = false;
  bool theta_fixed = false;
  std::vector<StartRecord> starts;
  std::vector<std::string> warnings;
};

struct HessianOptions {
  double bound_eps = kDefaultBoundEps;
  bool free_phi = true;
  bool free_theta = true;
};

/// Standard errors from the central-difference Hessian of -loglik in
/// (phi, theta, sigma2) at the estimate.
///
/// Fixed coordinates and coordinates sitting on a bound of the box are left
/// out of the Hessian and get no standard error; the remaining entries are
/// then conditional on those values. An interior estimate closer to a bound
/// than one step has its stencil shifted inward so every evaluation stays
/// admissible. The note records either case.
inline StdErrors standard_errors(const ModelParams& est, const IrregularSeries& s,
                                 const HessianOptions& opt = {}) {
  detail::check_gaps(s.gaps());
  const auto z = detail::centred(s, est.mu());
  const auto gaps = s.gaps();

  struct Coord {
    int which;  // 0 phi, 1 theta, 2 sigma2
    double centre;
    double step;
  };
  std::vector<Coord> coords;
  bool shifted = false;
  std::string at_bound;
  auto add_unit = [&](int which, double x) {
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    const double lo = 0.0;
    const double hi = 1.0 - opt.bound_eps;
    if (x <= lo + kAtBoundTol || x >= hi - kAtBoundTol) {
      at_bound += at_bound.empty() ? "" : " and ";
      at_bound += which == 0 ? "phi" : "theta";
      return;
    }
    double centre = x;
    if (centre - h < lo) centre = lo + h;
    if (centre + h > hi) centre = hi - h;
    if (centre != x) shifted = true;
    coords.push_back({which, centre, h});
  };
  if (opt.free_phi) add_unit(0, est.phi());
  if (opt.free_theta) add_unit(1, est.theta());
  {
    double h = 1e-4 * std::max(1.0, est.sigma2());
    if (h >= 0.5 * est.sigma2()) h = 1e-4 * est.sigma2();
    coords.push_back({2, est.sigma2(), h});
  }

  const std::size_t k = coords.size();
  std::array<double, 3> base{est.phi(), est.theta(), est.sigma2()};
  for (const auto& c : coords) base[static_cast<std::size_t>(c.which)] = c.centre;

  auto negll = [&](std::array<double, 3> v) {
    return -detail::loglik_centred(v[0], v[1], v[2], gaps, z);
  };
  auto shifted_point = [&](std::size_t a, double da, std::size_t b, double db) {
    auto v = base;
    v[static_cast<std::size_t>(coords[a].which)] += da * coords[a].step;
    v[static_cast<std::size_t>(coords[b].which)] += db * coords[b].step;
    return v;
  };

  StdErrors out;
  Eigen::MatrixXd hess(k, k);
  try {
    const double f0 = negll(base);
    for (std::size_t a = 0; a < k; ++a) {
      const double ha = coords[a].step;
      hess(a, a) = (negll(shifted_point(a, 1, a, 0)) - 2.0 * f0 + negll(shifted_point(a, -1, a, 0))) /
                   (ha * ha);
      for (std::size_t b = 0; b < a; ++b) {
        const double hb = coords[b].step;
        const double v = (negll(shifted_point(a, 1, b, 1)) - negll(shifted_point(a, 1, b, -1)) -
                          negll(shifted_point(a, -1, b, 1)) + negll(shifted_point(a, -1, b, -1))) /
                         (4.0 * ha * hb);
        hess(a, b) = v;
        hess(b, a) = v;
      }
    }
  } catch (const NumericalError& e) {
    out.note = std::string("Hessian evaluation failed: ") + e.what();
    return out;
  }
  if (!hess.allFinite()) {
    out.note = "Hessian has non-finite entries";
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success) {
    out.note = "Hessian is not positive definite";
    return out;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  for (std::size_t a = 0; a < k; ++a) {
    const double var = cov(a, a);
    if (!(var > 0.0)) continue;
    const double se = std::sqrt(var);
    switch (coords[a].which) {
      case 0: out.phi = se; break;
      case 1: out.theta = se; break;
      default: out.sigma2 = se; break;
    }
  }
  if (!at_bound.empty()) {
    out.note = at_bound + " at a bound: no standard error, others conditional on it";
  } else if (shifted) {
    out.note = "estimate near a bound; Hessian stencil shifted inside the box";
  }
  return out;
}

/// Box-constrained ML fit minimizing the reduced likelihood from several
/// deterministic starts. The best final q wins; ties go to the smaller
/// phi + theta.
inline FitResult fit_ml(const IrregularSeries& s, const FitOptions& opt = {}) {
  detail::check_gaps(s.gaps());
  if (!(opt.bound_eps > 0.0 && opt.bound_eps < 1.0)) {
    throw ValidationError("bound_eps must lie in (0, 1)");
  }
  const double upper = 1.0 - opt.bound_eps;
  for (const auto& fixed : {opt.fix_phi, opt.fix_theta}) {
    if (fixed && !(*fixed >= 0.0 && *fixed <= upper)) {
      throw ValidationError("fixed parameter must lie in [0, 1 - eps]");
    }
  }

  FitResult res;
  if (s.size() < 3) res.warnings.push_back("fewer than 3 observations; estimates are unreliable");

  const auto vals = s.values();
  const double mu = opt.mean == MeanHandling::sample_mean
                        ? std::accumulate(vals.begin(), vals.end(), 0.0) /
                              static_cast<double>(vals.size())
                        : opt.mu;
  if (!std::isfinite(mu)) throw ValidationError("mean must be finite");
  const auto z = detail::centred(s, mu);
  if (std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; })) {
    throw DegenerateDataError("centred series is identically zero; nothing to fit");
  }
  const auto gaps = s.gaps();

  res.phi_fixed = opt.fix_phi.has_value();
  res.theta_fixed = opt.fix_theta.has_value();
  auto unpack = [&](std::span<const double> x) {
    std::array<double, 2> pt{opt.fix_phi.value_or(0.0), opt.fix_theta.value_or(0.0)};
    std::size_t k = 0;
    if (!res.phi_fixed) pt[0] = x[k++];
    if (!res.theta_fixed) pt[1] = x[k++];
    return pt;
  };
  const double n = static_cast<double>(s.size());
  const optim::Objective q = [&](std::span<const double> x) {
    const auto pt = unpack(x);
    try {
      const auto sums = detail::profile_sums(pt[0], pt[1], gaps, z);
      if (!(sums.ss > 0.0)) return std::numeric_limits<double>::infinity();
      return std::log(sums.ss / n) + sums.logc / n;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::size_t dim = (res.phi_fixed ? 0 : 1) + (res.theta_fixed ? 0 : 1);
  optim::Box box{std::vector<double>(dim, 0.0), std::vector<double>(dim, upper)};

  std::vector<std::vector<double>> starts;
  for (const auto& st : opt.starts) {
    std::vector<double> x;
    if (!res.phi_fixed) x.push_back(std::clamp(st[0], 0.0, upper));
    if (!res.theta_fixed) x.push_back(std::clamp(st[1], 0.0, upper));
    if (std::find(starts.begin(), starts.end(), x) == starts.end()) starts.push_back(std::move(x));
  }
  if (starts.empty()) starts.emplace_back(dim, 0.0);

  int best = -1;
  std::array<double, 2> best_pt{};
  optim::Result best_run;
  for (const auto& x0 : starts) {
    const auto run = optim::minimize_box(q, x0, box, opt.optimizer);
    StartRecord rec;
    rec.start = unpack(x0);
    rec.end = unpack(run.x);
    rec.q = run.f;
    rec.converged = run.converged;
    rec.iterations = run.iterations;
    rec.message = run.message;
    res.iterations += run.iterations;
    res.starts.push_back(rec);
    if (!std::isfinite(run.f)) continue;
    bool better = best < 0;
    if (!better) {
      const double tie = 1e-12 * std::max(1.0, std::abs(best_run.f));
      if (run.f < best_run.f - tie) {
        better = true;
      } else if (std::abs(run.f - best_run.f) <= tie &&
                 rec.end[0] + rec.end[1] < best_pt[0] + best_pt[1]) {
        better = true;
      }
    }
    if (better) {
      best = static_cast<int>(res.starts.size()) - 1;
      best_pt = rec.end;
      best_run = run;
    }
  }
  if (best < 0) {
    std::string diag = "optimizer failed from every start:";
    for (const auto& r : res.starts) {
      diag += " (" + std::to_string(r.start[0]) + "," + std::to_string(r.start[1]) + "): " +
              r.message + ";";
    }
    throw NumericalError(diag);
  }

  const auto sums = detail::profile_sums(best_pt[0], best_pt[1], gaps, z);
  const double s2 = sums.ss / n;
  res.params_hat = ModelParams(best_pt[0], best_pt[1], s2, mu);
  res.q_value = best_run.f;
  res.converged = best_run.converged;
  res.loglik = detail::loglik_centred(best_pt[0], best_pt[1], s2, gaps, z);
  res.at_bound.phi =
      !res.phi_fixed && (best_pt[0] <= kAtBoundTol || best_pt[0] >= upper - kAtBoundTol);
  res.at_bound.theta =
      !res.theta_fixed && (best_pt[1] <= kAtBoundTol || best_pt[1] >= upper - kAtBoundTol);
  if (opt.compute_se) {
    res.se = standard_errors(res.params_hat, s,
                             {opt.bound_eps, !res.phi_fixed, !res.theta_fixed});
  }
  return res;
}

// ---------------------------------------------------------------------------

struct WaldResult {
  double z;
  double p_value;
  bool significant;
};

/// Two-sided Wald z-test of H0: parameter = 0.
inline WaldResult wald_test(double estimate, std::optional<double> se, double level) {
  if (!se || !(*se > 0.0) || !std::isfinite(*se)) {
    throw ValidationError("standard error unavailable for the Wald test");
  }
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  const double z = estimate / *se;
  const double p = 2.0 * boost::math::cdf(boost::math::complement(
                             boost::math::normal_distribution<double>(), std::abs(z)));
  return {z, p, p < level};
}

}  // namespace iarma
