#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <span>
#include <string>
#include <vector>

#include "dickesim/dicke_space.hpp"
#include "dickesim/half_int.hpp"
#include "dickesim/ode.hpp"
#include "dickesim/rates.hpp"
#include "dickesim/time_series.hpp"

namespace dickesim::piqs {

/// alpha-aggregated probabilities p(j,m) over the Dicke triangle, in
/// DickeSpace enumeration order.
struct PopulationVector {
  int N = 0;
  double time = 0.0;
  Eigen::VectorXd p;
};

/// Unit mass on the (j, m) bin, read as the uniform alpha-mixture when
/// D_j > 1.
PopulationVector initial_dicke_state(int N, HalfInt j, HalfInt m);

/// Closed-form population transfer rate per unit channel rate from (j, m) to
/// (j + dj_change, m') with m' = m - 1 for channels S and L, m' = m for D.
/// Allowed dj_change: S: {0}; L, D: {-1, 0, +1} (D with dj_change = 0 is the
/// no-op self block, reported for completeness). Transitions leaving the
/// triangle have rate 0; requesting a dj_change a channel can never produce
/// throws.
///
/// The rational forms were derived by decoupling one spin from the remaining
/// N-1 (see docs/local_rates.md) and are proven in the test suite against
/// matrix elements measured in the brute-force Dicke basis and against the
/// dm/dt and dj/dt sum rules.
double channel_rate_closed_form(int N, HalfInt j, HalfInt m, Channel ch,
                                int dj_change);

/// Sparse generator of the population dynamics, channel decomposition
/// retained: total = s + l + d; off-diagonals are non-negative and every
/// column sums to zero.
struct RateMatrix {
  int N = 0;
  Eigen::SparseMatrix<double> total;
  Eigen::SparseMatrix<double> s, l, d;
};

RateMatrix build_rate_matrix(int N, const RateSet& rates);

/// Text triplet dump "row col value" (one entry per line, row-major order).
std::string dump_rate_matrix(const Eigen::SparseMatrix<double>& a);

struct EvolveResult {
  TimeSeries series;  ///< columns Jz, J2, JpJm, Jz2
  std::vector<Eigen::VectorXd> populations;  ///< per grid point if requested
  double max_norm_drift = 0.0;
  double min_population = 0.0;
  bool used_implicit_fallback = false;
  OdeStats stats;
};

/// Integrates dp/dt = A p with the adaptive explicit integrator; if the
/// controller collapses (extreme rate ratios make A stiff), the run restarts
/// with an L-stable implicit Euler scheme with Richardson extrapolation.
/// Normalization drift beyond 1e-6 aborts.
EvolveResult evolve_populations(const PopulationVector& p0,
                                const RateSet& rates,
                                std::span<const double> t_grid,
                                const OdeOptions& ode = {},
                                bool keep_populations = false);

}  // namespace dickesim::piqs
