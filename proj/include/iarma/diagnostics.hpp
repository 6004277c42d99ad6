#pragma once

/** @file
 * Residual diagnostics: sample ACF, Ljung-Box portmanteau test and
 * normal QQ data. Residuals are treated as an equally indexed sample.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "iarma/error.hpp"

namespace iarma {

struct AcfEstimate {
  std::vector<double> rho;  ///< rho[k-1] is the lag-k autocorrelation
  double band = 0.0;        ///< white-noise band half-width z_{0.975} / sqrt(N)
  std::size_t n = 0;

  std::size_t max_lag() const noexcept { return rho.size(); }
  double at(std::size_t lag) const { return lag == 0 ? 1.0 : rho.at(lag - 1); }
};

struct LjungBoxRow {
  std::size_t lag;
  double q;
  int df;
  double p_value;
};

namespace detail {

inline void check_lags(std::size_t n, std::size_t max_lag) {
  if (max_lag < 1) throw ValidationError("max lag must be at least 1");
  if (max_lag >= n) {
    throw ValidationError("max lag must be < N (max lag " + std::to_string(max_lag) + ", N " +
                          std::to_string(n) + ")");
  }
}

}  // namespace detail

/// Mean-corrected sample autocorrelations normalized by the lag-0 sum.
inline AcfEstimate acf(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  detail::check_lags(n, max_lag);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (const double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw DegenerateDataError("residuals have zero variance");

  AcfEstimate out;
  out.n = n;
  out.rho.resize(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = k; t < n; ++t) ck += (x[t] - mean) * (x[t - k] - mean);
    out.rho[k - 1] = ck / c0;
  }
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.975);
  out.band = z / std::sqrt(static_cast<double>(n));
  return out;
}

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double q, int df) {
  if (df < 1) throw ValidationError("chi-square degrees of freedom must be positive");
  if (q <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * q);
}

/// Q_h = N (N + 2) sum_{k<=h} rho_k^2 / (N - k) for h = 1..max_lag, referred to
/// chi-square with h - fitted_params degrees of freedom. Lags with df < 1
/// report p = NaN.
inline std::vector<LjungBoxRow> ljung_box(const AcfEstimate& est, int fitted_params = 0) {
  if (fitted_params < 0) throw ValidationError("fitted parameter count must be >= 0");
  const double n = static_cast<double>(est.n);
  std::vector<LjungBoxRow> rows;
  rows.reserve(est.rho.size());
  double acc = 0.0;
  for (std::size_t k = 1; k <= est.rho.size(); ++k) {
    acc += est.rho[k - 1] * est.rho[k - 1] / (n - static_cast<double>(k));
    const double q = n * (n + 2.0) * acc;
    const int df = static_cast<int>(k) - fitted_params;
    const double p = df >= 1 ? chi_square_sf(q, df) : std::nan("");
    rows.push_back({k, q, df, p});
  }
  return rows;
}

inline std::vector<LjungBoxRow> ljung_box(std::span<const double> x, std::size_t max_lag,
                                          int fitted_params = 0) {
  return ljung_box(acf(x, max_lag), fitted_params);
}

struct QqPoint {
  double theoretical;
  double sample;
};

/// Sorted sample against standard-normal quantiles at (i - 0.5) / N.
inline std::vector<QqPoint> qq_data(std::span<const double> x) {
  if (x.size() < 2) throw ValidationError("QQ data needs at least two points");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal_distribution<double> normal;
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double pos = (static_cast<double>(i) + 0.5) / n;
    out[i] = {boost::math::quantile(normal, pos), sorted[i]};
  }
  return out;
}

}  // namespace iarma
