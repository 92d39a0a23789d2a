#pragma once

#include <optional>

#include "dickesim/half_int.hpp"
#include "dickesim/rates.hpp"

namespace dickesim {

enum class LadderDirection { raise, lower };

/// Matrix element of J± on |j,m>: sqrt((j∓m)(j±m+1)); 0 when the step would
/// leave the ladder.
double ladder_coefficient(HalfInt j, HalfInt m, LadderDirection dir);

/// Photon emission rate from |j,m>: gamma_s (j^2+j-m^2+m).
double emission_rate(HalfInt j, HalfInt m, double gamma_s);

/// dm/dt and dj/dt on a pure |j,m> state, split by scattering channel.
struct StateDerivatives {
  double dm_s = 0.0;  ///< spontaneous emission contribution to dm/dt
  double dm_l = 0.0;  ///< nonradiative loss contribution to dm/dt
  double dj_d = 0.0;  ///< pure dephasing contribution to dj/dt
  double dj_l = 0.0;  ///< nonradiative loss contribution to dj/dt

  double dm_dt() const { return dm_s + dm_l; }
  double dj_dt() const { return dj_d + dj_l; }
};

StateDerivatives state_derivatives(HalfInt j, HalfInt m, const RateSet& rates,
                                   int N);

/// The dj/dt = 0 locus at fixed m: the non-negative root of
///   j^2 + j = [gamma_d (m^2 + N/2) + gamma_l (N - (N-1)m - m^2)]
///             / (gamma_d + gamma_l).
/// Returns nullopt when the right-hand side is negative (no boundary at this
/// m: dj/dt < 0 for every j >= 0). The returned j is continuous, not
/// quantized; callers snap to states if they need to.
std::optional<double> boundary_j(HalfInt m, const RateSet& rates, int N);

/// Ideal superfluorescence delay time ln(N)/(N gamma_s).
double delay_time_pure(int N, double gamma_s);

/// Dephasing threshold gamma_d* = gamma_s N / sqrt(ln N).
double dephasing_threshold(int N, double gamma_s);

/// Incoherent single-spin decay time t0 = 1/(gamma_s + gamma_l).
double incoherent_time(const RateSet& rates);

}  // namespace dickesim
