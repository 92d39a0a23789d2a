#include "dickesim/moments.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dickesim::moments {

MomentState dicke_state_moments(int N, HalfInt j, HalfInt m) {
  if (!valid_dicke_index(N, {j, m}))
    throw std::invalid_argument("dicke_state_moments: invalid (j,m)");
  MomentState s;
  s.N = N;
  s.jz = m.value();
  s.j2 = j.value() * (j.value() + 1.0);
  s.jz2 = s.jz * s.jz;
  return s;
}

MomentState totally_excited_moments(int N) {
  return dicke_state_moments(N, HalfInt::from_doubled(N),
                             HalfInt::from_doubled(N));
}

FirstOrderRhs rhs_first_order(double jz, double j2, const RateSet& rates,
                              int N) {
  const double half_n = 0.5 * N;
  FirstOrderRhs d;
  d.djz = -rates.gamma_s * (j2 - jz * jz + jz) -
          rates.gamma_l * (jz + half_n);
  d.dj2 = -rates.gamma_d * (j2 - jz * jz - half_n) -
          rates.gamma_l * (j2 + (N - 1) * jz + jz * jz - N);
  return d;
}

SecondOrderRhs rhs_second_order(double jz, double j2, double jz2,
                                const RateSet& rates, int N) {
  const double half_n = 0.5 * N;
  SecondOrderRhs d;
  d.djz = -rates.gamma_s * (j2 - jz2 + jz) - rates.gamma_l * (jz + half_n);
  d.dj2 = -rates.gamma_d * (j2 - jz2 - half_n) -
          rates.gamma_l * (j2 + (N - 1) * jz + jz2 - N);
  d.djz2 = rates.gamma_s * (j2 + jz - 3.0 * jz2 + 2.0 * jz * jz2 -
                            2.0 * jz * j2) -
           rates.gamma_l * ((N - 1) * jz + 2.0 * jz2 - half_n);
  return d;
}

EvolveResult integrate_closed(ClosureOrder order, const MomentState& y0,
                              const RateSet& rates,
                              std::span<const double> t_grid,
                              const OdeOptions& ode) {
  rates.require_valid_for_evolution();
  const int N = y0.N;
  if (N < 1) throw std::invalid_argument("integrate_closed: N must be >= 1");
  const double jz_bound = 0.5 * N;
  const double j2_bound = 0.5 * N * (0.5 * N + 1.0);

  EvolveResult result;
  auto& jz_col = result.series.add_column("Jz");
  auto& j2_col = result.series.add_column("J2");
  auto& jpjm_col = result.series.add_column("JpJm");
  auto& jz2_col = result.series.add_column("Jz2");

  const bool second = order == ClosureOrder::second;
  Eigen::VectorXd y(second ? 3 : 2);
  y[0] = y0.jz;
  y[1] = y0.j2;
  if (second) y[2] = y0.jz2;

  auto rhs = [&](const Eigen::VectorXd& v, double, Eigen::VectorXd& dv) {
    if (second) {
      const auto d = rhs_second_order(v[0], v[1], v[2], rates, N);
      dv[0] = d.djz;
      dv[1] = d.dj2;
      dv[2] = d.djz2;
    } else {
      const auto d = rhs_first_order(v[0], v[1], rates, N);
      dv[0] = d.djz;
      dv[1] = d.dj2;
    }
  };

  auto observe = [&](double t, const Eigen::VectorXd& v) {
    const double jz = v[0], j2 = v[1];
    const double jz2 = second ? v[2] : jz * jz;
    const double viol = std::max({(std::abs(jz) - jz_bound) / jz_bound,
                                  (j2 - j2_bound) / j2_bound, -j2 / j2_bound});
    result.max_bound_violation = std::max(result.max_bound_violation, viol);
    if (viol > 1e-4)
      throw std::runtime_error(
          "integrate_closed: trajectory left the physical region at t=" +
          std::to_string(t) +
          " (closure breakdown; relative violation " + std::to_string(viol) +
          ")");
    result.series.t.push_back(t);
    jz_col.push_back(jz);
    j2_col.push_back(j2);
    jpjm_col.push_back(j2 - jz2 + jz);
    jz2_col.push_back(jz2);
  };

  result.stats = integrate_ode(rhs, std::move(y), t_grid, observe, ode);
  result.series.meta["solver"] = second ? "cumulant2" : "cumulant1";
  result.series.meta["N"] = N;
  result.series.meta["unit_Jz"] = jz_bound;
  result.series.meta["unit_J2"] = j2_bound;
  result.series.meta["max_bound_violation"] = result.max_bound_violation;
  return result;
}

}  // namespace dickesim::moments
