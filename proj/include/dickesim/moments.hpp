#pragma once

#include <span>

#include "dickesim/half_int.hpp"
#include "dickesim/ode.hpp"
#include "dickesim/rates.hpp"
#include "dickesim/time_series.hpp"

namespace dickesim::moments {

/// Tracked expectation values of the truncated hierarchy. `jz2` is carried by
/// the second-order system; the first-order system factorizes it as jz^2.
struct MomentState {
  int N = 0;
  double time = 0.0;
  double jz = 0.0;
  double j2 = 0.0;
  double jz2 = 0.0;
};

/// Exact moments of the Dicke state |j,m>: <Jz> = m, <J^2> = j(j+1),
/// <Jz^2> = m^2.
MomentState dicke_state_moments(int N, HalfInt j, HalfInt m);
MomentState totally_excited_moments(int N);

struct FirstOrderRhs {
  double djz, dj2;
};

/// The two-variable closed system with <Jz^2> ~ <Jz>^2:
///   d<Jz>/dt  = -gS (<J2> - <Jz>^2 + <Jz>) - gL (<Jz> + N/2)
///   d<J2>/dt  = -gD (<J2> - <Jz>^2 - N/2)
///               - gL (<J2> + (N-1)<Jz> + <Jz>^2 - N)
FirstOrderRhs rhs_first_order(double jz, double j2, const RateSet& rates,
                              int N);

struct SecondOrderRhs {
  double djz, dj2, djz2;
};

/// Same two equations with <Jz^2> kept independent, plus
///   d<Jz2>/dt = gS (<J2> + <Jz> - 3<Jz2> + 2<Jz><Jz2> - 2<Jz><J2>)
///               - gL ((N-1)<Jz> + 2<Jz2> - N/2)
/// (products of three operators factorized as <Jz^3> ~ <Jz><Jz2>,
///  <Jz J2> ~ <Jz><J2>; dephasing jumps commute with Jz so gD is absent).
SecondOrderRhs rhs_second_order(double jz, double j2, double jz2,
                                const RateSet& rates, int N);

enum class ClosureOrder { first = 1, second = 2 };

struct EvolveResult {
  TimeSeries series;  ///< columns Jz, J2, JpJm, Jz2 (raw units; meta records
                      ///< the N/2 and (N/2)(N/2+1) normalization constants)
  double max_bound_violation = 0.0;  ///< relative to the physical bounds
  OdeStats stats;
};

/// Integrates the chosen closed system. A trajectory leaving the physical
/// region |<Jz>| <= N/2, 0 <= <J2> <= (N/2)(N/2+1) by more than 1e-4
/// (relative) aborts: that is the closure-breakdown signal, not something to
/// clamp.
EvolveResult integrate_closed(ClosureOrder order, const MomentState& y0,
                              const RateSet& rates,
                              std::span<const double> t_grid,
                              const OdeOptions& ode = {});

}  // namespace dickesim::moments
