#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dickesim/dicke_space.hpp"
#include "dickesim/half_int.hpp"
#include "dickesim/ode.hpp"
#include "dickesim/rates.hpp"
#include "dickesim/time_series.hpp"

namespace dickesim::oracle {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

/// Memory caps for the 2^N product space; configurable, not hard-coded.
inline constexpr int default_operator_cap = 10;
inline constexpr int default_basis_cap = 12;

/// Local and collective spin operators in the 2^N product basis.
/// Spin n (1-based) lives on bit N-n of the basis index; bit value 0 is up.
struct Operators {
  int N = 0;
  std::vector<SpMat> jz_local;      ///< J_{z,n}
  std::vector<SpMat> jplus_local;   ///< J_{+,n}
  std::vector<SpMat> jminus_local;  ///< J_{-,n}
  SpMat jz, jplus, jminus;          ///< collective sums
  SpMat j2;                         ///< J^2 = Jz^2 - Jz + J+J-
  SpMat jpjm;                       ///< J+J-
};

Operators build_operators(int N, int cap = default_operator_cap);

/// Right-hand side of the master equation
///   drho/dt = i w0 [Jz, rho] + (gS/2) L_{J-}[rho]
///             + (gL/2) sum_n L_{J-,n}[rho] + (gD/2) sum_n L_{Jz,n}[rho]
/// with L_O[rho] = 2 O rho O^dag - O^dag O rho - rho O^dag O.
MatrixXcd lindblad_rhs(const MatrixXcd& rho, const RateSet& rates,
                       const Operators& ops);

struct EvolveResult {
  TimeSeries series;  ///< columns Jz, J2, JpJm, Jz2
  std::vector<MatrixXcd> snapshots;  ///< per grid point when requested
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  OdeStats stats;
};

/// Integrates the master equation from rho0 over t_grid (adaptive embedded
/// Runge-Kutta). Trace and hermiticity drift are monitored at every sample;
/// drift beyond 1e-6 aborts with a diagnostic.
EvolveResult evolve(const MatrixXcd& rho0, const RateSet& rates,
                    std::span<const double> t_grid, const OdeOptions& ode = {},
                    bool keep_snapshots = false);

/// Orthonormal basis of simultaneous (J^2, Jz) eigenvectors labelled
/// (j, m, alpha), built by coupling one spin-1/2 at a time. Columns are
/// grouped by (j, m) in Dicke-space enumeration order; alpha is the rank of
/// the ladder in coupling-history order.
struct DickeBasis {
  int N = 0;
  MatrixXd vectors;  ///< 2^N x 2^N, orthonormal columns
  struct Label {
    HalfInt j, m;
    int alpha;
  };
  std::vector<Label> labels;          ///< per column
  std::vector<int> block_offset;      ///< per DickeSpace index
  std::vector<int> block_size;        ///< per DickeSpace index (= D_j)

  /// Columns spanning the (j, m) subspace.
  auto block(const DickeSpace& space, DickeIndex idx) const {
    const auto k = space.index_of(idx);
    return vectors.middleCols(block_offset[k], block_size[k]);
  }
};

DickeBasis build_dicke_basis(int N, int cap = default_basis_cap);

/// alpha-uniform Dicke-diagonal state: rho = P_{j,m} / D_j.
MatrixXcd dicke_diagonal_state(const DickeBasis& basis, const DickeSpace& space,
                               DickeIndex idx);

/// p(j,m) = Tr[P_{j,m} rho] in DickeSpace enumeration order.
std::vector<double> populations(const DickeBasis& basis,
                                const DickeSpace& space, const MatrixXcd& rho);

/// alpha-averaged population transfer rates measured from matrix elements of
/// the channel's jump operators, per unit channel rate gamma:
///   rate(jm -> j'm') = (1/D_j) sum_{alpha,alpha',k}
///                      |<j',m',alpha'| O_k |j,m,alpha>|^2.
/// `transfer[src]` lists (dest, rate) pairs including the dephasing self
/// block; `outflow[src]` is the total onflow sum_k <O_k^dag O_k> averaged the
/// same way.
struct TransitionRates {
  std::vector<std::vector<std::pair<std::size_t, double>>> transfer;
  std::vector<double> outflow;
};

TransitionRates measure_channel_rates(const DickeBasis& basis,
                                      const DickeSpace& space, Channel ch);
TransitionRates measure_channel_rates(int N, Channel ch);

/// Debug snapshot dump: little-endian {uint32 N, float64 t}, then the
/// row-major complex matrix as (re, im) float64 pairs.
void write_snapshot(const std::string& path, int N, double t,
                    const MatrixXcd& rho);
MatrixXcd read_snapshot(const std::string& path, int& N, double& t);

}  // namespace dickesim::oracle
