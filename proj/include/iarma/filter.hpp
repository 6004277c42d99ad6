#pragma once

/** @file
 * One-step prediction for the iARMA model at the observation times.
 *
 * Two equivalent routes are provided: the innovations recursion
 *
 *     xhat_1 = 0,  xhat_{n+1} = phi^D x_n + (theta^D / c_n)(x_n - xhat_n)
 *
 * and the minimal state-space filter with uncorrelated disturbances
 *
 *     alpha_1 = 0,  alpha_{n+1} = (phi^D + theta^D / c_n) x_n - (theta^D / c_n) alpha_n.
 *
 * Both work on data centred at mu; mu is added back to the predictions.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "iarma/error.hpp"
#include "iarma/model.hpp"

namespace iarma {

/// Which variance scale was used to standardize residuals.
enum class SigmaSource { supplied, profile };

struct InnovationTrace {
  std::vector<double> xhat;       ///< one-step predictions (data units)
  std::vector<double> c;          ///< MSE factors; MSE_n = sigma2 * c_n
  std::vector<double> resid;      ///< x_n - xhat_n
  std::vector<double> std_resid;  ///< resid_n / sqrt(sigma2_used * c_n)
  double sigma2_used = 0.0;
  SigmaSource sigma_source = SigmaSource::supplied;
};

struct StateTrace {
  std::vector<double> alpha;  ///< centred state; alpha_1 = 0
};

namespace detail {

/// Runs the innovations recursion on centred data z and calls
/// visit(n, xhat_n, c_n) for every index. No allocation; the likelihood
/// routines use it directly.
template <class Visit>
inline void innovations_kernel(double phi, double theta, std::span<const double> gaps,
                               std::span<const double> z, Visit&& visit) {
  const double first = c1(phi, theta);
  double c = first;
  double xhat = 0.0;
  visit(std::size_t{0}, xhat, c);
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double phi_d = gap_power(phi, gaps[i]);
    const double theta_d = gap_power(theta, gaps[i]);
    const double next_xhat = phi_d * z[i] + theta_d / c * (z[i] - xhat);
    const double next_c = cf_step(first, phi_d, theta_d, c);
    if (!(next_c >= kCnFloor)) cn_breakdown(i + 1, next_c);
    xhat = next_xhat;
    c = next_c;
    visit(i + 1, xhat, c);
  }
}

inline std::vector<double> centred(const IrregularSeries& s, double mu) {
  std::vector<double> z(s.values().begin(), s.values().end());
  for (auto& v : z) v -= mu;
  return z;
}

inline void standardize(InnovationTrace& tr, double supplied_sigma2, SigmaSource source) {
  const std::size_t n = tr.resid.size();
  double s2 = supplied_sigma2;
  if (source == SigmaSource::profile) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += tr.resid[i] * tr.resid[i] / tr.c[i];
    s2 = acc / static_cast<double>(n);
    if (!(s2 > 0.0)) throw DegenerateDataError("all prediction errors are zero");
  }
  tr.sigma2_used = s2;
  tr.sigma_source = source;
  tr.std_resid.resize(n);
  for (std::size_t i = 0; i < n; ++i) tr.std_resid[i] = tr.resid[i] / std::sqrt(s2 * tr.c[i]);
}

}  // namespace detail

/// Innovations-algorithm predictions, MSE factors and residuals.
///
/// With SigmaSource::profile the residuals are standardized by the profile
/// estimate (1/N) sum resid_n^2 / c_n, which is the ML sigma2 when (phi,
/// theta) are ML estimates; otherwise params.sigma2() is used.
inline InnovationTrace predict_innovations(const ModelParams& p, const IrregularSeries& s,
                                           SigmaSource source = SigmaSource::supplied) {
  detail::check_gaps(s.gaps());
  const auto z = detail::centred(s, p.mu());
  InnovationTrace tr;
  const std::size_t n = s.size();
  tr.xhat.resize(n);
  tr.c.resize(n);
  tr.resid.resize(n);
  detail::innovations_kernel(p.phi(), p.theta(), s.gaps(), z,
                             [&](std::size_t i, double xhat, double c) {
                               tr.xhat[i] = xhat + p.mu();
                               tr.c[i] = c;
                               tr.resid[i] = z[i] - xhat;
                             });
  detail::standardize(tr, p.sigma2(), source);
  return tr;
}

/// State-space filter; predictions are alpha_n + mu.
inline std::pair<StateTrace, InnovationTrace> predict_statespace(
    const ModelParams& p, const IrregularSeries& s, SigmaSource source = SigmaSource::supplied) {
  const auto c = cn_values(p.phi(), p.theta(), s.gaps());
  const auto z = detail::centred(s, p.mu());
  const auto gaps = s.gaps();
  const std::size_t n = s.size();

  StateTrace st;
  st.alpha.resize(n);
  st.alpha[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double k = gap_power(p.theta(), gaps[i]) / c[i];
    st.alpha[i + 1] = (gap_power(p.phi(), gaps[i]) + k) * z[i] - k * st.alpha[i];
  }

  InnovationTrace tr;
  tr.c = c;
  tr.xhat.resize(n);
  tr.resid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tr.xhat[i] = st.alpha[i] + p.mu();
    tr.resid[i] = z[i] - st.alpha[i];
  }
  detail::standardize(tr, p.sigma2(), source);
  return {std::move(st), std::move(tr)};
}

struct Interval {
  double lo;
  double hi;
};

/// Two-sided Gaussian quantile z_{(1+coverage)/2}; coverage in [0, 1).
inline double band_multiplier(double coverage) {
  if (!(coverage >= 0.0 && coverage < 1.0)) {
    throw ValidationError("coverage must lie in [0, 1)");
  }
  if (coverage == 0.0) return 0.0;
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               0.5 * (1.0 + coverage));
}

/// xhat_n +/- z * sqrt(sigma2 * c_n) with sigma2 taken from params.
inline std::vector<Interval> forecast_bands(const InnovationTrace& tr, const ModelParams& p,
                                            double coverage) {
  const double z = band_multiplier(coverage);
  std::vector<Interval> out(tr.xhat.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double half = z * std::sqrt(p.sigma2() * tr.c[i]);
    out[i] = {tr.xhat[i] - half, tr.xhat[i] + half};
  }
  return out;
}

}  // namespace iarma
