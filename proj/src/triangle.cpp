#include "dickesim/triangle.hpp"

#include <cmath>
#include <stdexcept>

namespace dickesim {

double ladder_coefficient(HalfInt j, HalfInt m, LadderDirection dir) {
  const DickeIndex idx{j, m};
  // (j∓m) and (j±m+1) are exact integers
  const auto a = dir == LadderDirection::raise ? idx.j_minus_m() : idx.j_plus_m();
  const auto b = dir == LadderDirection::raise ? idx.j_plus_m() + 1
                                               : idx.j_minus_m() + 1;
  if (a <= 0) return 0.0;  // edge step leaves the ladder
  return std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

double emission_rate(HalfInt j, HalfInt m, double gamma_s) {
  const DickeIndex idx{j, m};
  // j^2+j-m^2+m = (j+m)(j-m+1)
  const auto w = idx.j_plus_m() * (idx.j_minus_m() + 1);
  return gamma_s * static_cast<double>(w);
}

StateDerivatives state_derivatives(HalfInt j, HalfInt m, const RateSet& rates,
                                   int N) {
  if (!valid_dicke_index(N, {j, m}))
    throw std::invalid_argument("state_derivatives: invalid (j,m) for N");
  const double jv = j.value();
  const double mv = m.value();
  const double half_n = 0.5 * N;
  const double two_j_plus_1 = static_cast<double>(j.doubled() + 1);

  StateDerivatives d;
  d.dm_s = -emission_rate(j, m, rates.gamma_s);
  d.dm_l = -rates.gamma_l * (mv + half_n);
  d.dj_d = -rates.gamma_d * (jv * jv + jv - mv * mv - half_n) / two_j_plus_1;
  d.dj_l = -rates.gamma_l *
           (jv * jv + jv + (N - 1) * mv + mv * mv - N) / two_j_plus_1;
  return d;
}

std::optional<double> boundary_j(HalfInt m, const RateSet& rates, int N) {
  const double gd = rates.gamma_d;
  const double gl = rates.gamma_l;
  if (gd + gl <= 0.0)
    throw std::invalid_argument("boundary_j: gamma_d + gamma_l must be > 0");
  const double mv = m.value();
  const double rhs = (gd * (mv * mv + 0.5 * N) +
                      gl * (N - (N - 1) * mv - mv * mv)) /
                     (gd + gl);
  if (rhs < 0.0) return std::nullopt;
  return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * rhs));
}

double delay_time_pure(int N, double gamma_s) {
  if (N < 2 || gamma_s <= 0.0)
    throw std::invalid_argument("delay_time_pure: need N >= 2, gamma_s > 0");
  return std::log(static_cast<double>(N)) / (N * gamma_s);
}

double dephasing_threshold(int N, double gamma_s) {
  if (N < 2)
    throw std::invalid_argument("dephasing_threshold: need N >= 2");
  return gamma_s * N / std::sqrt(std::log(static_cast<double>(N)));
}

double incoherent_time(const RateSet& rates) {
  const double g = rates.gamma_s + rates.gamma_l;
  if (g <= 0.0)
    throw std::invalid_argument("incoherent_time: gamma_s + gamma_l must be > 0");
  return 1.0 / g;
}

}  // namespace dickesim
