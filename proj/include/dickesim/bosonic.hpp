#pragma once

#include <span>
#include <utility>

#include <json.hpp>

#include "dickesim/half_int.hpp"
#include "dickesim/ode.hpp"
#include "dickesim/rates.hpp"
#include "dickesim/time_series.hpp"

namespace dickesim::bosonic {

/// Bright/dark quasiparticle populations in the dilute corner of the
/// triangle.
struct BrightDarkState {
  int N = 0;
  double time = 0.0;
  double nb = 0.0;
  double nd = 0.0;

  double filling() const { return (nb + nd) / N; }
  bool dilute(double threshold = 0.1) const { return filling() <= threshold; }
};

/// Exact mapping: n_b = [j(j+1) - m^2 + m]/N, n_d = m - n_b + N/2.
std::pair<double, double> map_exact(HalfInt j, HalfInt m, int N);
/// Same mapping on continuous trajectory coordinates.
std::pair<double, double> map_exact_real(double j, double m, int N);
/// Dominant order in N: n_b = j + m, n_d = N/2 - j.
std::pair<double, double> map_leading(HalfInt j, HalfInt m, int N);

/// Total bright decay rate N gS + gD + gL.
double bright_decay_rate(const RateSet& rates, int N);

/// Closed-form solutions of the dilute rate equations
///   dn_b/dt = -(N gS + gD + gL) n_b,   dn_d/dt = -gL n_d + gD n_b
/// (the degenerate case Gamma_b = gL uses the t-linear limit).
double bright_closed_form(double nb0, const RateSet& rates, int N, double t);
double dark_closed_form(double nb0, double nd0, const RateSet& rates, int N,
                        double t);

struct EvolveResult {
  TimeSeries series;  ///< columns nb, nd
  double closed_form_max_dev = 0.0;  ///< numeric vs analytic, absolute
  OdeStats stats;
};

/// Numeric integration of the rate equations; the closed form is evaluated
/// alongside and the maximal deviation recorded (it is a solver defect, not a
/// model property, if the two disagree).
EvolveResult evolve_bright_dark(const BrightDarkState& s0,
                                const RateSet& rates,
                                std::span<const double> t_grid,
                                const OdeOptions& ode = {});

struct ValidationReport {
  nlohmann::json report;
  TimeSeries full;     ///< piqs trajectory mapped to (nb, nd)
  TimeSeries reduced;  ///< dilute rate-equation trajectory
};

/// Runs the full permutational-invariant solver from |N/2, -N/2+k>, maps its
/// (J^2, Jz) trajectory through the exact bright/dark mapping and compares
/// with the reduced rate equations. k/N <= 0.05 enforced.
ValidationReport validate_against_full(int N, int k, const RateSet& rates,
                                       double t_max, int samples,
                                       const OdeOptions& ode = {});

}  // namespace dickesim::bosonic
