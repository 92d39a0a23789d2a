#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dickesim/half_int.hpp"
#include "dickesim/rates.hpp"
#include "dickesim/time_series.hpp"

namespace dickesim::analysis {

enum class Solver { oracle, piqs, cumulant1, cumulant2, bosonic };

const char* solver_name(Solver s);
Solver solver_from_name(const std::string& name);

/// One deterministic simulation request; every solver is seed-free.
struct RunConfig {
  Solver solver = Solver::piqs;
  int N = 2;
  RateSet rates;
  HalfInt j0, m0;       ///< initial Dicke index (defaults to totally excited)
  bool initial_set = false;
  double t_max = 1.0;
  int samples = 1000;
  double rtol = 1e-9;

  HalfInt initial_j() const { return initial_set ? j0 : HalfInt::from_doubled(N); }
  HalfInt initial_m() const { return initial_set ? m0 : HalfInt::from_doubled(N); }

  void validate() const;  ///< throws on solver/N/initial incompatibilities
  nlohmann::json to_json() const;
};

/// Runs the configured solver; meta carries the config echo, solver
/// diagnostics and code version.
TimeSeries run(const RunConfig& config);

struct DelayResult {
  bool reached = false;
  double t = 0.0;
};

/// First <Jz> = 0 crossing, located by linear interpolation between the
/// bracketing samples. Not-reached is an explicit result, not an error.
DelayResult effective_delay_time(const TimeSeries& series);

/// Re-solves with 10x tighter rtol and a 4x denser grid up to just past the
/// bracket, then interpolates.
DelayResult effective_delay_time_refined(const RunConfig& config);

struct SweepRow {
  int N = 0;
  double gamma_d = 0.0;
  double collective_ratio = 0.0;  ///< N gamma_s / gamma_d
  bool ok = false;
  bool reached = false;
  double td_eff = 0.0;
  double td = 0.0;  ///< ln(N)/(N gamma_s)
  double t0 = 0.0;  ///< 1/(gamma_s + gamma_l)
  std::string error;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  nlohmann::json meta;
  std::string to_csv() const;
};

/// Delay-time phase diagram over the (N, gamma_d) grid from the totally
/// excited state. Grid points are independent and run on `jobs` workers;
/// per-row failures are recorded and the sweep continues. Row order is
/// deterministic (grid order) regardless of scheduling.
SweepTable sweep_phase_diagram(std::span<const int> n_grid,
                               std::span<const double> gamma_d_grid,
                               const RateSet& fixed, Solver solver,
                               int jobs = 1, int samples = 2000);

/// Parametric (j(t), m(t)) curve: m = <Jz>, j from inverting j(j+1) = <J2>
/// (tiny negative <J2> is clamped to zero and counted in meta).
TimeSeries trajectory_jm(const TimeSeries& series);

/// Simple column table with optional (blank) cells, CSV-exportable.
struct FlatTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  std::string to_csv() const;
};

/// Normalized emission rate field (j, m, rate/(N^2 gamma_s)) sampled over the
/// triangle for color maps; `resolution` points across j.
FlatTable emission_field(int N, double gamma_s, int resolution);

/// dj/dt = 0 boundary curves j(m) for each gamma_l/gamma_d ratio; blank cells
/// mark "no boundary at this m". Ratio 0 means pure dephasing; an infinite
/// ratio (or gamma_d = 0) means pure loss.
FlatTable boundary_curves(int N, std::span<const double> ratios,
                          int m_samples = 0);

/// Formatted fixture table of the five characteristic states' derivatives,
/// leading-order forms next to the exact values at this N.
std::string table1_report(int N = 400);

/// Underlying fixture data; exposed for the verification suites.
struct Table1Cell {
  std::string state;            ///< e.g. "(N/2, N/2)"
  std::string quantity;         ///< "dm/dt" or "dj/dt"
  std::string formula;          ///< leading-order form as printed
  double table_value = 0.0;     ///< leading-order value at this N (unit rates)
  double exact_value = 0.0;     ///< from state_derivatives (unit rates)
  bool noted_exact = false;     ///< the printed form is exact, not leading
  double rel_error = 0.0;
};
std::vector<Table1Cell> table1_fixtures(int N);

/// Least-squares fit of log y against t over [t_lo, t_hi]; returns the decay
/// rate (positive for decaying y). Samples with y <= 0 are skipped.
double fit_exponential_rate(std::span<const double> t,
                            std::span<const double> y, double t_lo,
                            double t_hi);

/// Least-squares slope of log y against log x.
double fit_power_law(std::span<const double> x, std::span<const double> y);

/// Peak location by discrete argmax plus parabolic refinement.
double peak_time(std::span<const double> t, std::span<const double> y);

}  // namespace dickesim::analysis
