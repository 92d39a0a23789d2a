#include "dickesim/bosonic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "dickesim/piqs.hpp"

namespace dickesim::bosonic {

std::pair<double, double> map_exact_real(double j, double m, int N) {
  const double nb = (j * (j + 1.0) - m * m + m) / N;
  return {nb, m - nb + 0.5 * N};
}

std::pair<double, double> map_exact(HalfInt j, HalfInt m, int N) {
  if (!valid_dicke_index(N, {j, m}))
    throw std::invalid_argument("map_exact: invalid (j,m)");
  return map_exact_real(j.value(), m.value(), N);
}

std::pair<double, double> map_leading(HalfInt j, HalfInt m, int N) {
  if (!valid_dicke_index(N, {j, m}))
    throw std::invalid_argument("map_leading: invalid (j,m)");
  const DickeIndex idx{j, m};
  return {static_cast<double>(idx.j_plus_m()),
          0.5 * N - j.value()};
}

double bright_decay_rate(const RateSet& rates, int N) {
  return N * rates.gamma_s + rates.gamma_d + rates.gamma_l;
}

double bright_closed_form(double nb0, const RateSet& rates, int N, double t) {
  return nb0 * std::exp(-bright_decay_rate(rates, N) * t);
}

double dark_closed_form(double nb0, double nd0, const RateSet& rates, int N,
                        double t) {
  const double gl = rates.gamma_l;
  const double x = bright_decay_rate(rates, N) - gl;  // = N gS + gD
  // (1 - e^{-xt})/x, stable through x -> 0
  const double pulse = (x == 0.0) ? t : -std::expm1(-x * t) / x;
  return std::exp(-gl * t) * (nd0 + nb0 * rates.gamma_d * pulse);
}

EvolveResult evolve_bright_dark(const BrightDarkState& s0,
                                const RateSet& rates,
                                std::span<const double> t_grid,
                                const OdeOptions& ode) {
  rates.require_valid_for_evolution();
  if (s0.nb < 0.0 || s0.nd < 0.0)
    throw std::invalid_argument("evolve_bright_dark: negative population");
  const int N = s0.N;
  const double gb = bright_decay_rate(rates, N);

  EvolveResult result;
  auto& nb_col = result.series.add_column("nb");
  auto& nd_col = result.series.add_column("nd");

  Eigen::VectorXd y(2);
  y << s0.nb, s0.nd;
  auto rhs = [&](const Eigen::VectorXd& v, double, Eigen::VectorXd& dv) {
    dv[0] = -gb * v[0];
    dv[1] = -rates.gamma_l * v[1] + rates.gamma_d * v[0];
  };
  auto observe = [&](double t, const Eigen::VectorXd& v) {
    result.series.t.push_back(t);
    nb_col.push_back(v[0]);
    nd_col.push_back(v[1]);
    const double dev =
        std::max(std::abs(v[0] - bright_closed_form(s0.nb, rates, N, t)),
                 std::abs(v[1] - dark_closed_form(s0.nb, s0.nd, rates, N, t)));
    result.closed_form_max_dev = std::max(result.closed_form_max_dev, dev);
  };
  result.stats = integrate_ode(rhs, std::move(y), t_grid, observe, ode);

  if (result.closed_form_max_dev > 1e-6 * std::max(1.0, s0.nb + s0.nd))
    throw std::runtime_error(
        "evolve_bright_dark: numeric and closed-form paths disagree");
  result.series.meta["solver"] = "bosonic";
  result.series.meta["N"] = N;
  result.series.meta["bright_decay_rate"] = gb;
  result.series.meta["closed_form_max_dev"] = result.closed_form_max_dev;
  result.series.meta["dilute"] = s0.dilute();
  return result;
}

ValidationReport validate_against_full(int N, int k, const RateSet& rates,
                                       double t_max, int samples,
                                       const OdeOptions& ode) {
  if (k < 1 || k > N || static_cast<double>(k) / N > 0.05)
    throw std::invalid_argument(
        "validate_against_full: need 1 <= k and k/N <= 0.05 (dilute)");

  const auto j0 = HalfInt::from_doubled(N);
  const auto m0 = HalfInt::from_doubled(-N + 2 * k);
  const auto grid = uniform_grid(t_max, samples);

  const auto full_run = piqs::evolve_populations(
      piqs::initial_dicke_state(N, j0, m0), rates, grid, ode);
  const auto& j2 = *full_run.series.column("J2");
  const auto& jz = *full_run.series.column("Jz");

  ValidationReport out;
  out.full.t = full_run.series.t;
  auto& fnb = out.full.add_column("nb");
  auto& fnd = out.full.add_column("nd");
  for (std::size_t i = 0; i < out.full.t.size(); ++i) {
    const double j = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(0.0, j2[i])));
    const auto [nb, nd] = map_exact_real(j, jz[i], N);
    fnb.push_back(nb);
    fnd.push_back(nd);
  }
  out.full.meta = full_run.series.meta;
  out.full.meta["mapped"] = "exact bright/dark mapping of (J2, Jz) trajectory";

  BrightDarkState s0;
  s0.N = N;
  std::tie(s0.nb, s0.nd) = map_exact(j0, m0, N);
  out.reduced = evolve_bright_dark(s0, rates, grid, ode).series;

  double nb_scale = 0.0, nd_scale = 0.0, nb_dev = 0.0, nd_dev = 0.0;
  const auto& rnb = *out.reduced.column("nb");
  const auto& rnd = *out.reduced.column("nd");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    nb_scale = std::max(nb_scale, std::abs(fnb[i]));
    nd_scale = std::max(nd_scale, std::abs(fnd[i]));
    nb_dev = std::max(nb_dev, std::abs(fnb[i] - rnb[i]));
    nd_dev = std::max(nd_dev, std::abs(fnd[i] - rnd[i]));
  }

  out.report["parameters"] = {
      {"N", N},           {"k", k},
      {"gamma_s", rates.gamma_s}, {"gamma_l", rates.gamma_l},
      {"gamma_d", rates.gamma_d}, {"t_max", t_max},
      {"samples", samples}};
  out.report["max_deviation"] = {
      {"nb_abs", nb_dev},
      {"nd_abs", nd_dev},
      {"nb_rel", nb_scale > 0 ? nb_dev / nb_scale : 0.0},
      {"nd_rel", nd_scale > 0 ? nd_dev / nd_scale : 0.0}};
  out.report["series"] = {{"full", "columns nb,nd mapped from piqs"},
                          {"reduced", "columns nb,nd from rate equations"}};
  return out;
}

}  // namespace dickesim::bosonic
