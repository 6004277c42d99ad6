#pragma once

/** @file
 * Irregularly observed first-order ARMA (iARMA) process: parameters, time
 * grids, the innovation-variance recursion, second moments and exact
 * Gaussian simulation.
 *
 * For observation times t_1 < ... < t_N with gaps Delta_{n+1} = t_{n+1} - t_n
 * (all >= 1), the process is
 *
 *     X_1     = e_1
 *     X_{n+1} = phi^Delta X_n + e_{n+1} + (theta^Delta / c_n) e_n
 *
 * with independent e_n ~ N(0, sigma2 * c_n), where
 *
 *     c_1     = (1 + 2 phi theta + theta^2) / (1 - phi^2)
 *     c_{n+1} = c_1 (1 - phi^{2 Delta}) - 2 phi^Delta theta^Delta
 *               - theta^{2 Delta} / c_n.
 *
 * On a unit grid it is the classical ARMA(1,1) and c_n is the innovations
 * mean squared error factor.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iarma/error.hpp"
#include "iarma/rng.hpp"

namespace iarma {

/// Lower floor for c_n; anything below signals numerical breakdown.
inline constexpr double kCnFloor = 1e-12;

class ModelParams {
 public:
  ModelParams(double phi, double theta, double sigma2, double mu = 0.0)
      : phi_(phi), theta_(theta), sigma2_(sigma2), mu_(mu) {
    if (!(phi >= 0.0 && phi < 1.0)) {
      throw ValidationError("phi must lie in [0, 1), got " + std::to_string(phi));
    }
    if (!(theta >= 0.0 && theta < 1.0)) {
      throw ValidationError("theta must lie in [0, 1), got " + std::to_string(theta));
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw ValidationError("sigma2 must be positive and finite, got " + std::to_string(sigma2));
    }
    if (!std::isfinite(mu)) {
      throw ValidationError("mu must be finite");
    }
  }

  double phi() const noexcept { return phi_; }
  double theta() const noexcept { return theta_; }
  double sigma2() const noexcept { return sigma2_; }
  double mu() const noexcept { return mu_; }

  ModelParams with_mu(double mu) const { return {phi_, theta_, sigma2_, mu}; }
  ModelParams with_sigma2(double sigma2) const { return {phi_, theta_, sigma2, mu_}; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double phi_;
  double theta_;
  double sigma2_;
  double mu_;
};

/// What to do when the smallest observed gap is below one time unit.
enum class Rescale { automatic, forbid };

/// Strictly increasing observation times with their values.
///
/// If the smallest gap is below 1 and rescaling is allowed, every time is
/// divided by that gap, so the normalized grid has minimum gap exactly 1.
/// gaps()[i] is the normalized distance between observations i and i+1.
class IrregularSeries {
 public:
  IrregularSeries(std::vector<double> times, std::vector<double> values,
                  Rescale rescale = Rescale::automatic)
      : original_times_(std::move(times)), values_(std::move(values)) {
    if (original_times_.empty()) {
      throw ValidationError("series must contain at least one observation");
    }
    if (original_times_.size() != values_.size()) {
      throw ValidationError("times and values differ in length");
    }
    for (std::size_t i = 0; i < original_times_.size(); ++i) {
      if (!std::isfinite(original_times_[i]) || !std::isfinite(values_[i])) {
        throw ValidationError("non-finite time or value at index " + std::to_string(i));
      }
    }
    check_strictly_increasing(original_times_);

    std::vector<double> raw(original_times_.size() - 1);
    for (std::size_t i = 0; i + 1 < original_times_.size(); ++i) {
      raw[i] = original_times_[i + 1] - original_times_[i];
    }
    const double min_gap = raw.empty() ? 1.0 : *std::min_element(raw.begin(), raw.end());
    if (min_gap < 1.0) {
      if (rescale == Rescale::forbid) {
        throw ValidationError("minimum gap " + std::to_string(min_gap) +
                              " is below 1 and rescaling is disabled");
      }
      scale_ = min_gap;
    }
    gaps_.resize(raw.size());
    std::transform(raw.begin(), raw.end(), gaps_.begin(), [&](double g) { return g / scale_; });
    times_.resize(original_times_.size());
    std::transform(original_times_.begin(), original_times_.end(), times_.begin(),
                   [&](double t) { return t / scale_; });
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> original_times() const noexcept { return original_times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> gaps() const noexcept { return gaps_; }
  /// Divisor applied to the original times (1 when no rescaling happened).
  double time_scale() const noexcept { return scale_; }
  bool rescaled() const noexcept { return scale_ != 1.0; }

  /// Same grid, new values.
  IrregularSeries with_values(std::vector<double> values) const {
    IrregularSeries out = *this;
    if (values.size() != size()) throw ValidationError("value count does not match the grid");
    out.values_ = std::move(values);
    return out;
  }

  /// Rejects duplicates and out-of-order times, naming the offending indices.
  static void check_strictly_increasing(std::span<const double> times) {
    std::vector<std::size_t> dup;
    std::vector<std::size_t> unordered;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (times[i + 1] == times[i]) {
        dup.push_back(i + 1);
      } else if (times[i + 1] < times[i]) {
        unordered.push_back(i + 1);
      }
    }
    auto list = [](const std::vector<std::size_t>& idx) {
      std::ostringstream os;
      for (std::size_t k = 0; k < idx.size() && k < 20; ++k) os << (k ? "," : "") << idx[k];
      if (idx.size() > 20) os << ",...";
      return os.str();
    };
    if (!dup.empty()) {
      throw ValidationError("duplicate timestamps at indices " + list(dup));
    }
    if (!unordered.empty()) {
      throw ValidationError("times not increasing at indices " + list(unordered));
    }
  }

 private:
  std::vector<double> original_times_;
  std::vector<double> values_;
  std::vector<double> times_;
  std::vector<double> gaps_;
  double scale_ = 1.0;
};

/// base^gap with 0^gap = 0 for gap > 0.
inline double gap_power(double base, double gap) noexcept {
  if (gap == 0.0) return 1.0;
  if (base == 0.0) return 0.0;
  return std::pow(base, gap);
}

inline double c1(double phi, double theta) noexcept {
  return (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
}

inline double c1(const ModelParams& p) noexcept { return c1(p.phi(), p.theta()); }

namespace detail {

/// One step of the backward continued fraction: c_{n+1} from c_n.
inline double cf_step(double c_first, double phi_d, double theta_d, double c_prev) noexcept {
  return c_first * (1.0 - phi_d * phi_d) - 2.0 * phi_d * theta_d - theta_d * theta_d / c_prev;
}

inline void check_gaps(std::span<const double> gaps) {
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] >= 1.0)) {
      throw ValidationError("gap " + std::to_string(gaps[i]) + " at position " +
                            std::to_string(i) + " is below 1; time grid is not normalized");
    }
  }
}

[[noreturn]] inline void cn_breakdown(std::size_t n, double value) {
  throw NumericalError("c_n recursion fell to " + std::to_string(value) + " at n=" +
                       std::to_string(n + 1));
}

}  // namespace detail

/// c_n, upsilon_n = sigma2 c_n and varpi_n = sigma2 theta^Delta_{n+1} / upsilon_n.
struct CfSequence {
  std::vector<double> c;
  std::vector<double> upsilon;
  std::vector<double> varpi;  ///< length N - 1
};

/// c_1..c_N for a grid with gaps.size() == N - 1 gaps. Unvalidated (phi, theta).
inline std::vector<double> cn_values(double phi, double theta, std::span<const double> gaps) {
  detail::check_gaps(gaps);
  std::vector<double> c(gaps.size() + 1);
  const double first = c1(phi, theta);
  c[0] = first;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double next =
        detail::cf_step(first, gap_power(phi, gaps[i]), gap_power(theta, gaps[i]), c[i]);
    if (!(next >= kCnFloor)) detail::cn_breakdown(i + 1, next);
    c[i + 1] = next;
  }
  return c;
}

inline CfSequence cf_sequence(const ModelParams& p, std::span<const double> gaps) {
  CfSequence out;
  out.c = cn_values(p.phi(), p.theta(), gaps);
  out.upsilon.resize(out.c.size());
  std::transform(out.c.begin(), out.c.end(), out.upsilon.begin(),
                 [&](double c) { return p.sigma2() * c; });
  out.varpi.resize(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    out.varpi[i] = p.sigma2() * gap_power(p.theta(), gaps[i]) / out.upsilon[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Second moments

inline double gamma0(const ModelParams& p) noexcept { return p.sigma2() * c1(p); }

/// Covariance of two consecutive observations separated by gap.
inline double gamma1(const ModelParams& p, double gap) {
  if (!(gap > 0.0)) throw ValidationError("gap must be positive");
  return p.sigma2() * (gap_power(p.phi(), gap) * c1(p) + gap_power(p.theta(), gap));
}

/// Cov(X_{t_n}, X_{t_{n+k}}) given t_n, its successor t_{n+1} and t_{n+k}.
/// Pass t_other == t_n for k = 0 and t_other == t_next for k = 1.
inline double autocov(const ModelParams& p, double t_n, double t_next, double t_other) {
  if (t_other == t_n) return gamma0(p);
  if (!(t_next > t_n) || !(t_other >= t_next)) {
    throw ValidationError("autocov requires t_n < t_next <= t_other");
  }
  return gap_power(p.phi(), t_other - t_next) * gamma1(p, t_next - t_n);
}

/// Lag-one autocorrelation across a gap.
inline double rho1(const ModelParams& p, double gap) {
  return gap_power(p.phi(), gap) + gap_power(p.theta(), gap) / c1(p);
}

inline double autocorr(const ModelParams& p, double t_n, double t_next, double t_other) {
  return autocov(p, t_n, t_next, t_other) / gamma0(p);
}

// ---------------------------------------------------------------------------
// Time grids and simulation

/// Sampling law for gaps: all ones, or 1 + Exp(rate).
struct GapLaw {
  enum class Kind { regular, shifted_exponential };
  Kind kind = Kind::regular;
  double rate = 1.0;

  static GapLaw regular() { return {}; }
  static GapLaw shifted_exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw ValidationError("exponential rate must be positive");
    }
    return {Kind::shifted_exponential, rate};
  }

  /// Parses "regular" or "exp:<rate>".
  static GapLaw parse(std::string_view spec) {
    if (spec == "regular") return regular();
    if (spec.starts_with("exp:")) {
      const std::string num(spec.substr(4));
      std::size_t used = 0;
      double rate = 0.0;
      try {
        rate = std::stod(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != num.size()) {
        throw ValidationError("bad gap law '" + std::string(spec) + "'");
      }
      return shifted_exponential(rate);
    }
    throw ValidationError("unknown gap law '" + std::string(spec) + "' (use regular or exp:<rate>)");
  }

  std::string to_string() const {
    if (kind == Kind::regular) return "regular";
    std::ostringstream os;
    os.precision(17);
    os << "exp:" << rate;
    return os.str();
  }

  friend bool operator==(const GapLaw&, const GapLaw&) = default;
};

inline std::vector<double> sample_gaps(const GapLaw& law, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("need at least one gap");
  std::vector<double> gaps(n, 1.0);
  if (law.kind == GapLaw::Kind::shifted_exponential) {
    if (!(law.rate > 0.0)) throw ValidationError("exponential rate must be positive");
    auto engine = rng::make_engine(seed);
    std::exponential_distribution<double> exp(law.rate);
    for (auto& g : gaps) g = 1.0 + exp(engine);
  }
  return gaps;
}

/// Cumulative sums: t_1 = gaps[0], t_{k+1} = t_k + gaps[k].
inline std::vector<double> times_from_gaps(std::span<const double> gaps) {
  std::vector<double> t(gaps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    acc += gaps[i];
    t[i] = acc;
  }
  return t;
}

/// Exact Gaussian draw of the process on a normalized time grid.
inline IrregularSeries simulate(const ModelParams& p, std::vector<double> times,
                                std::uint64_t seed) {
  if (times.empty()) throw ValidationError("time grid is empty");
  IrregularSeries::check_strictly_increasing(times);
  std::vector<double> gaps(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) gaps[i] = times[i + 1] - times[i];
  const auto c = cn_values(p.phi(), p.theta(), gaps);

  auto engine = rng::make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(times.size());
  double eps_prev = std::sqrt(p.sigma2() * c[0]) * normal(engine);
  double x_prev = eps_prev;
  x[0] = x_prev + p.mu();
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double eps = std::sqrt(p.sigma2() * c[i + 1]) * normal(engine);
    const double next = gap_power(p.phi(), gaps[i]) * x_prev + eps +
                        gap_power(p.theta(), gaps[i]) / c[i] * eps_prev;
    x[i + 1] = next + p.mu();
    x_prev = next;
    eps_prev = eps;
  }
  return IrregularSeries(std::move(times), std::move(x), Rescale::forbid);
}

}  // namespace iarma
