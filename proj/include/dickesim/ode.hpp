#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace dickesim {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;   ///< 0: choose automatically
  long max_steps = 20'000'000;
};

struct OdeStats {
  long n_steps = 0;
  long n_rejected = 0;
  double min_step = 0.0;
  double max_step = 0.0;
};

/// Raised when the controller drives the step below the resolvable floor;
/// callers with a stiff-capable fallback catch this.
struct StepSizeCollapse : std::runtime_error {
  StepSizeCollapse(double t, double h)
      : std::runtime_error("ODE step size collapsed to " + std::to_string(h) +
                           " at t=" + std::to_string(t)),
        t_at(t), h_at(h) {}
  double t_at;
  double h_at;
};

namespace detail {
inline double sqr_abs(double x) { return x * x; }
inline double sqr_abs(const std::complex<double>& x) { return std::norm(x); }
}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = rhs(y, t).
///
/// The observer is invoked at every entry of t_grid (which must be strictly
/// increasing, starting at the initial time); steps are clamped so grid
/// points are hit exactly.
template <typename Vec, typename Rhs, typename Observer>
OdeStats integrate_ode(Rhs&& rhs, Vec y, std::span<const double> t_grid,
                       Observer&& observe, const OdeOptions& opt = {}) {
  if (t_grid.size() < 2)
    throw std::invalid_argument("integrate_ode: need at least two grid times");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("integrate_ode: t_grid not increasing");

  // Dormand-Prince 5(4) tableau (FSAL)
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const auto n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), ynew(n), ytmp(n), yerr(n);

  double t = t_grid.front();
  observe(t, y);
  rhs(y, t, k1);

  const double t_span = t_grid.back() - t_grid.front();
  double h = opt.initial_step;
  if (h <= 0.0) {
    double ynorm = 0.0, fnorm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      ynorm = std::max(ynorm, std::sqrt(detail::sqr_abs(y[i])));
      fnorm = std::max(fnorm, std::sqrt(detail::sqr_abs(k1[i])));
    }
    h = (fnorm > 0.0) ? 0.01 * std::max(ynorm, opt.atol) / fnorm
                      : t_span / 100.0;
    h = std::min(h, t_span / 10.0);
    if (!(h > 0.0)) h = t_span / 100.0;
  }

  OdeStats stats;
  stats.min_step = h;
  std::size_t next = 1;

  while (next < t_grid.size()) {
    if (stats.n_steps + stats.n_rejected > opt.max_steps)
      throw std::runtime_error("integrate_ode: exceeded max step count");
    const double t_target = t_grid[next];
    bool hit_grid = false;
    if (t + h >= t_target) {
      h = t_target - t;
      hit_grid = true;
    }
    const double h_floor = 1e-14 * std::max(1.0, std::abs(t));
    if (h < h_floor && !hit_grid) throw StepSizeCollapse(t, h);

    ytmp = y + h * a21 * k1;
    rhs(ytmp, t + c2 * h, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(ytmp, t + c3 * h, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(ytmp, t + c4 * h, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(ytmp, t + c5 * h, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(ytmp, t + h, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(ynew, t + h, ytmp);  // k7; FSAL reuse below
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * ytmp);

    double err2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale =
          opt.atol + opt.rtol * std::sqrt(std::max(detail::sqr_abs(y[i]),
                                                   detail::sqr_abs(ynew[i])));
      err2 += detail::sqr_abs(yerr[i]) / (scale * scale);
    }
    const double err = std::sqrt(err2 / static_cast<double>(n));

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(ytmp);  // FSAL
      ++stats.n_steps;
      stats.min_step = std::min(stats.min_step, h);
      stats.max_step = std::max(stats.max_step, h);
      while (next < t_grid.size() && t >= t_grid[next] - 1e-14 * std::max(1.0, std::abs(t))) {
        observe(t_grid[next], y);
        ++next;
      }
      const double grow = (err > 0.0)
          ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
      h *= grow;
    } else {
      ++stats.n_rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h < h_floor) throw StepSizeCollapse(t, h);
    }
  }
  return stats;
}

}  // namespace dickesim
