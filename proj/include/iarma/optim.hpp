#pragma once

/** @file
 * Small-dimensional box-constrained quasi-Newton minimizer.
 *
 * Projected BFGS with an active set: variables sitting on a bound whose
 * gradient points outward are frozen for the step, the inverse-Hessian
 * approximation acts on the rest, and an Armijo backtracking search runs
 * along the projected path P(x + a d). Gradients are central finite
 * differences with step cbrt(eps) * max(1, |x|), switching to second-order
 * one-sided stencils at the bounds so the objective is never evaluated
 * outside the box.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iarma/error.hpp"

namespace iarma::optim {

using Objective = std::function<double(std::span<const double>)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct Options {
  double pg_tol = 1e-8;      ///< infinity norm of the projected gradient
  double rel_f_tol = 1e-10;  ///< relative objective change between iterates
  int max_iter = 500;
};

struct Result {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  double pg_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
};

namespace detail {

inline double fd_step(double x) {
  static const double root = std::cbrt(std::numeric_limits<double>::epsilon());
  return root * std::max(1.0, std::abs(x));
}

inline double project(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

}  // namespace detail

/// Finite-difference gradient that stays inside the box.
inline std::vector<double> fd_gradient(const Objective& f, std::span<const double> x, double fx,
                                       const Box& box, int* evals = nullptr) {
  const std::size_t n = x.size();
  std::vector<double> g(n);
  std::vector<double> probe(x.begin(), x.end());
  auto eval = [&](std::size_t i, double v) {
    probe[i] = v;
    const double r = f(probe);
    probe[i] = x[i];
    if (evals) ++*evals;
    return r;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double h = detail::fd_step(x[i]);
    const bool room_below = x[i] - h >= box.lower[i];
    const bool room_above = x[i] + h <= box.upper[i];
    if (room_below && room_above) {
      g[i] = (eval(i, x[i] + h) - eval(i, x[i] - h)) / (2.0 * h);
    } else if (room_above) {
      g[i] = (-3.0 * fx + 4.0 * eval(i, x[i] + h) - eval(i, x[i] + 2.0 * h)) / (2.0 * h);
    } else if (room_below) {
      g[i] = (3.0 * fx - 4.0 * eval(i, x[i] - h) + eval(i, x[i] - 2.0 * h)) / (2.0 * h);
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

/// Infinity norm of P(x - g) - x.
inline double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                                      const Box& box) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = detail::project(x[i] - g[i], box.lower[i], box.upper[i]) - x[i];
    m = std::max(m, std::abs(step));
  }
  return m;
}

/// Minimizes f over the box starting from x0 (projected into the box first).
/// Non-finite objective values are treated as +infinity.
inline Result minimize_box(const Objective& objective, std::vector<double> x0, const Box& box,
                           const Options& opt = {}) {
  const std::size_t n = x0.size();
  if (box.lower.size() != n || box.upper.size() != n) {
    throw ValidationError("box dimension does not match starting point");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(box.lower[i] <= box.upper[i])) throw ValidationError("empty box");
  }

  Result res;
  auto f = [&](std::span<const double> x) {
    ++res.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const Objective fobj = [&](std::span<const double> x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = detail::project(x0[i], box.lower[i], box.upper[i]);
  res.x = x;
  if (n == 0) {
    res.f = f(x);
    res.pg_norm = 0.0;
    res.converged = std::isfinite(res.f);
    res.message = "no free parameters";
    return res;
  }

  double fx = f(x);
  if (!std::isfinite(fx)) {
    res.f = fx;
    res.message = "objective not finite at the starting point";
    return res;
  }

  // Inverse Hessian approximation, row-major.
  std::vector<double> hinv(n * n, 0.0);
  auto reset_h = [&] {
    std::fill(hinv.begin(), hinv.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
  };
  reset_h();
  bool h_is_identity = true;
  bool first_update = true;

  std::vector<double> g = fd_gradient(fobj, x, fx, box, &res.evaluations);
  int small_changes = 0;

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    res.pg_norm = projected_gradient_norm(x, g, box);
    if (res.pg_norm < opt.pg_tol) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }

    std::vector<bool> active(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      active[i] = (x[i] <= box.lower[i] && g[i] > 0.0) || (x[i] >= box.upper[i] && g[i] < 0.0);
    }

    auto direction = [&] {
      std::vector<double> d(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (!active[j]) d[i] -= hinv[i * n + j] * g[j];
        }
      }
      return d;
    };
    std::vector<double> d = direction();
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[i];
    if (!(slope < 0.0)) {
      reset_h();
      h_is_identity = true;
      d = direction();
    }

    // Projected Armijo backtracking.
    std::vector<double> trial(n);
    double f_trial = fx;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double alpha = 1.0;
      for (int k = 0; k < 60; ++k) {
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          trial[i] = detail::project(x[i] + alpha * d[i], box.lower[i], box.upper[i]);
          decrease += g[i] * (trial[i] - x[i]);
        }
        if (trial == x) break;
        f_trial = f(trial);
        if (f_trial <= fx + 1e-4 * decrease && f_trial < fx) {
          accepted = true;
          break;
        }
        if (f_trial <= fx && decrease == 0.0) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted && !h_is_identity) {
        reset_h();
        h_is_identity = true;
        d = direction();
      } else {
        break;
      }
    }
    if (!accepted) {
      res.converged = res.pg_norm < 1e-5;
      res.message = "line search found no further decrease";
      break;
    }

    const double f_prev = fx;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = trial[i] - x[i];
    x = trial;
    fx = f_trial;
    std::vector<double> g_new = fd_gradient(fobj, x, fx, box, &res.evaluations);

    std::vector<double> y(n);
    double sy = 0.0;
    double yy = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
      yy += y[i] * y[i];
      ss += s[i] * s[i];
    }
    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      if (first_update) {
        const double scale = sy / yy;
        for (auto& v : hinv) v *= scale;
        first_update = false;
      }
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      const double rho = 1.0 / sy;
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) +
                             (rho * rho * yhy + rho) * s[i] * s[j];
        }
      }
      h_is_identity = false;
    }
    g = std::move(g_new);

    if (std::abs(f_prev - fx) <= opt.rel_f_tol * std::max(1.0, std::abs(fx))) {
      if (++small_changes >= 2) {
        res.pg_norm = projected_gradient_norm(x, g, box);
        res.converged = true;
        res.message = "relative objective change below tolerance";
        ++res.iterations;
        break;
      }
    } else {
      small_changes = 0;
    }
  }
  if (res.iterations >= opt.max_iter && !res.converged) {
    res.message = "iteration limit reached";
  }
  res.x = x;
  res.f = fx;
  return res;
}

}  // namespace iarma::optim
