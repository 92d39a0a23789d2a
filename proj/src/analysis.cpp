#include "dickesim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "dickesim/bosonic.hpp"
#include "dickesim/dicke_space.hpp"
#include "dickesim/moments.hpp"
#include "dickesim/oracle.hpp"
#include "dickesim/piqs.hpp"
#include "dickesim/triangle.hpp"

namespace dickesim::analysis {

const char* solver_name(Solver s) {
  switch (s) {
    case Solver::oracle: return "oracle";
    case Solver::piqs: return "piqs";
    case Solver::cumulant1: return "cumulant1";
    case Solver::cumulant2: return "cumulant2";
    case Solver::bosonic: return "bosonic";
  }
  return "?";
}

Solver solver_from_name(const std::string& name) {
  for (Solver s : {Solver::oracle, Solver::piqs, Solver::cumulant1,
                   Solver::cumulant2, Solver::bosonic})
    if (name == solver_name(s)) return s;
  throw std::invalid_argument("unknown solver: " + name);
}

void RunConfig::validate() const {
  if (N < 1) throw std::invalid_argument("RunConfig: N must be >= 1");
  rates.require_valid_for_evolution();
  if (!(t_max > 0.0) || samples < 2)
    throw std::invalid_argument("RunConfig: need t_max > 0, samples >= 2");
  if (rtol < 1e-12 || rtol > 1e-3)
    throw std::invalid_argument("RunConfig: rtol outside [1e-12, 1e-3]");
  if (!valid_dicke_index(N, {initial_j(), initial_m()}))
    throw std::invalid_argument("RunConfig: initial (j0, m0) invalid for N");
  if (solver == Solver::oracle && N > oracle::default_operator_cap)
    throw std::invalid_argument("RunConfig: oracle solver capped at N <= " +
                                std::to_string(oracle::default_operator_cap));
  if (solver == Solver::bosonic) {
    const auto [nb, nd] = bosonic::map_exact(initial_j(), initial_m(), N);
    if ((nb + nd) / N > 0.1)
      throw std::invalid_argument(
          "RunConfig: bosonic solver requires a dilute initial state "
          "((nb+nd)/N <= 0.1)");
  }
}

nlohmann::json RunConfig::to_json() const {
  return {{"solver", solver_name(solver)},
          {"N", N},
          {"gamma_s", rates.gamma_s},
          {"gamma_l", rates.gamma_l},
          {"gamma_d", rates.gamma_d},
          {"omega0", rates.omega0},
          {"j0_doubled", initial_j().doubled()},
          {"m0_doubled", initial_m().doubled()},
          {"t_max", t_max},
          {"samples", samples},
          {"rtol", rtol}};
}

TimeSeries run(const RunConfig& config) {
  config.validate();
  const auto grid = uniform_grid(config.t_max, config.samples);
  OdeOptions ode;
  ode.rtol = config.rtol;
  ode.atol = config.rtol * 1e-3;

  TimeSeries series;
  switch (config.solver) {
    case Solver::oracle: {
      const DickeSpace space(config.N);
      const auto basis = oracle::build_dicke_basis(config.N);
      const auto rho0 = oracle::dicke_diagonal_state(
          basis, space, {config.initial_j(), config.initial_m()});
      series = oracle::evolve(rho0, config.rates, grid, ode).series;
      break;
    }
    case Solver::piqs: {
      const auto p0 = piqs::initial_dicke_state(config.N, config.initial_j(),
                                                config.initial_m());
      series = piqs::evolve_populations(p0, config.rates, grid, ode).series;
      break;
    }
    case Solver::cumulant1:
    case Solver::cumulant2: {
      const auto y0 = moments::dicke_state_moments(
          config.N, config.initial_j(), config.initial_m());
      const auto order = config.solver == Solver::cumulant1
                             ? moments::ClosureOrder::first
                             : moments::ClosureOrder::second;
      series = moments::integrate_closed(order, y0, config.rates, grid, ode)
                   .series;
      break;
    }
    case Solver::bosonic: {
      bosonic::BrightDarkState s0;
      s0.N = config.N;
      std::tie(s0.nb, s0.nd) =
          bosonic::map_exact(config.initial_j(), config.initial_m(), config.N);
      series = bosonic::evolve_bright_dark(s0, config.rates, grid, ode).series;
      break;
    }
  }
  series.meta["config"] = config.to_json();
  series.meta["code_version"] = DICKESIM_VERSION;
  return series;
}

DelayResult effective_delay_time(const TimeSeries& series) {
  const auto* jz = series.column("Jz");
  if (!jz) throw std::invalid_argument("effective_delay_time: no Jz column");
  if (jz->empty() || (*jz)[0] <= 0.0)
    throw std::invalid_argument(
        "effective_delay_time: <Jz> must start positive");
  for (std::size_t i = 1; i < jz->size(); ++i) {
    const double a = (*jz)[i - 1], b = (*jz)[i];
    if (b <= 0.0) {
      const double t0 = series.t[i - 1], t1 = series.t[i];
      // linear interpolation of the sign change
      const double frac = (a == b) ? 0.0 : a / (a - b);
      return {true, t0 + frac * (t1 - t0)};
    }
  }
  return {false, 0.0};
}

DelayResult effective_delay_time_refined(const RunConfig& config) {
  const auto coarse = run(config);
  const auto first = effective_delay_time(coarse);
  if (!first.reached) return first;
  RunConfig fine = config;
  fine.rtol = std::max(config.rtol * 0.1, 1e-12);
  fine.t_max = std::min(config.t_max, first.t * 1.05 + config.t_max * 1e-3);
  fine.samples = config.samples * 4;
  return effective_delay_time(run(fine));
}

std::string SweepTable::to_csv() const {
  std::string out = "N,gamma_d,n_gs_over_gd,td_eff,td,t0,status\n";
  char buf[64];
  for (const auto& r : rows) {
    out += std::to_string(r.N);
    auto push = [&](double v) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out += buf;
    };
    push(r.gamma_d);
    push(r.collective_ratio);
    if (r.ok && r.reached) push(r.td_eff);
    else out += ",";
    push(r.td);
    push(r.t0);
    out += r.ok ? (r.reached ? ",ok" : ",not-reached") : ",failed";
    out += '\n';
  }
  return out;
}

SweepTable sweep_phase_diagram(std::span<const int> n_grid,
                               std::span<const double> gamma_d_grid,
                               const RateSet& fixed, Solver solver, int jobs,
                               int samples) {
  if (n_grid.empty() || gamma_d_grid.empty())
    throw std::invalid_argument("sweep_phase_diagram: empty grid");
  SweepTable table;
  table.rows.resize(n_grid.size() * gamma_d_grid.size());
  nlohmann::json errors = nlohmann::json::array();

  auto work = [&](std::size_t row_idx) {
    const int n = n_grid[row_idx / gamma_d_grid.size()];
    const double gd = gamma_d_grid[row_idx % gamma_d_grid.size()];
    SweepRow row;
    row.N = n;
    row.gamma_d = gd;
    row.collective_ratio = gd > 0 ? n * fixed.gamma_s / gd : 0.0;
    row.td = delay_time_pure(n, fixed.gamma_s);
    row.t0 = incoherent_time(fixed);
    try {
      RunConfig config;
      config.solver = solver;
      config.N = n;
      config.rates = fixed;
      config.rates.gamma_d = gd;
      config.samples = samples;
      // the crossing sits between t_d and the incoherent half-life; start
      // with a window covering both and extend if it is not reached
      config.t_max = 4.0 * std::max(row.td, row.t0);
      for (int attempt = 0; attempt < 3; ++attempt) {
        const auto delay = effective_delay_time(run(config));
        row.reached = delay.reached;
        row.td_eff = delay.t;
        if (delay.reached) break;
        config.t_max *= 4.0;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    table.rows[row_idx] = row;
  };

  const std::size_t n_tasks = table.rows.size();
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(n_tasks)));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_tasks;
             i = next.fetch_add(1))
          work(i);
      });
    for (auto& th : pool) th.join();
  }

  for (const auto& r : table.rows)
    if (!r.ok)
      errors.push_back({{"N", r.N}, {"gamma_d", r.gamma_d}, {"error", r.error}});
  table.meta["solver"] = solver_name(solver);
  table.meta["gamma_s"] = fixed.gamma_s;
  table.meta["gamma_l"] = fixed.gamma_l;
  table.meta["errors"] = errors;
  table.meta["code_version"] = DICKESIM_VERSION;
  return table;
}

TimeSeries trajectory_jm(const TimeSeries& series) {
  const auto* j2 = series.column("J2");
  const auto* jz = series.column("Jz");
  if (!j2 || !jz)
    throw std::invalid_argument("trajectory_jm: needs J2 and Jz columns");
  TimeSeries out;
  out.t = series.t;
  auto& jc = out.add_column("j");
  auto& mc = out.add_column("m");
  int clamped = 0;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    double v = (*j2)[i];
    if (v < 0.0) {
      v = 0.0;
      ++clamped;
    }
    jc.push_back(0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * v)));
    mc.push_back((*jz)[i]);
  }
  out.meta = series.meta;
  out.meta["negative_J2_clamped"] = clamped;
  return out;
}

std::string FlatTable::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out += (c ? "," : "") + columns[c];
  out += '\n';
  char buf[48];
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (row[c]) {
        std::snprintf(buf, sizeof(buf), "%.17g", *row[c]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

FlatTable emission_field(int N, double gamma_s, int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("emission_field: resolution >= 2");
  FlatTable table;
  table.columns = {"j", "m", "rate_norm"};
  const double scale = 1.0 / (static_cast<double>(N) * N * gamma_s);
  for (int i = 0; i < resolution; ++i) {
    const double j = 0.5 * N * i / (resolution - 1);
    for (int k = 0; k < resolution; ++k) {
      const double m = -j + 2.0 * j * k / (resolution - 1);
      const double rate = gamma_s * (j * j + j - m * m + m);
      table.rows.push_back({j, m, rate * scale});
      if (j == 0.0) break;  // apex has a single m
    }
  }
  return table;
}

FlatTable boundary_curves(int N, std::span<const double> ratios,
                          int m_samples) {
  if (m_samples <= 0) m_samples = N + 1;
  FlatTable table;
  table.columns = {"m"};
  for (const double r : ratios) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "j_ratio_%g", r);
    table.columns.push_back(buf);
  }
  for (int i = 0; i < m_samples; ++i) {
    const double mv = -0.5 * N + static_cast<double>(N) * i / (m_samples - 1);
    std::vector<std::optional<double>> row;
    row.push_back(mv);
    for (const double r : ratios) {
      if (!(r >= 0.0))
        throw std::invalid_argument("boundary_curves: ratios must be >= 0");
      RateSet rates;
      rates.gamma_d = 1.0;
      rates.gamma_l = r;
      // continuous m: reuse the closed-form root directly
      const double rhs = (rates.gamma_d * (mv * mv + 0.5 * N) +
                          rates.gamma_l * (N - (N - 1) * mv - mv * mv)) /
                         (rates.gamma_d + rates.gamma_l);
      if (rhs < 0.0)
        row.push_back(std::nullopt);
      else
        row.push_back(0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * rhs)));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<Table1Cell> table1_fixtures(int N) {
  if (N % 4 != 0)
    throw std::invalid_argument("table1_fixtures: N must be divisible by 4");
  const double n = N;
  const RateSet unit{1.0, 1.0, 1.0, 0.0};

  struct Entry {
    const char* state;
    HalfInt j, m;
    const char* quantity;
    const char* formula;
    double table_value;
    bool exact;
  };
  // doubled(j) = 2j, so j = N/2 is doubled N and j = N/4 is doubled N/2
  const HalfInt jN2 = HalfInt::from_doubled(N);
  const HalfInt jN4 = HalfInt::from_doubled(N / 2);
  const HalfInt zero = HalfInt::from_doubled(0);

  const std::vector<Entry> entries = {
      {"(N/2,N/2)", jN2, jN2, "dm/dt", "-(gS+gL)N", -(1.0 + 1.0) * n, true},
      {"(N/4,N/4)", jN4, jN4, "dm/dt", "-(gS/2+3gL/4)N",
       -(0.5 + 0.75) * n, true},
      {"(N/2,0)", jN2, zero, "dm/dt", "-(gS/4)N^2-(gL/2)N",
       -0.25 * n * n - 0.5 * n, false},
      {"(0,0)", zero, zero, "dm/dt", "-(gL/2)N", -0.5 * n, true},
      {"(N/4,-N/4)", jN4, -jN4, "dm/dt", "-(gL/4)N", -0.25 * n, true},
      {"(N/2,N/2)", jN2, jN2, "dj/dt", "-gL N", -n, false},
      {"(N/4,N/4)", jN4, jN4, "dj/dt", "gD/2-(3gL/4)N", 0.5 - 0.75 * n,
       false},
      {"(N/2,0)", jN2, zero, "dj/dt", "-(gD/4+gL/4)N", -0.5 * n, false},
      {"(0,0)", zero, zero, "dj/dt", "(gD/2+gL)N", 1.5 * n, true},
      {"(N/4,-N/4)", jN4, -jN4, "dj/dt", "gD/2+(gL/4)N", 0.5 + 0.25 * n,
       false},
  };

  std::vector<Table1Cell> cells;
  for (const auto& e : entries) {
    const auto d = state_derivatives(e.j, e.m, unit, N);
    Table1Cell cell;
    cell.state = e.state;
    cell.quantity = e.quantity;
    cell.formula = e.formula;
    cell.table_value = e.table_value;
    cell.exact_value =
        std::string(e.quantity) == "dm/dt" ? d.dm_dt() : d.dj_dt();
    cell.noted_exact = e.exact;
    const double scale = std::max(std::abs(cell.table_value), 1e-300);
    cell.rel_error = std::abs(cell.table_value - cell.exact_value) / scale;
    cells.push_back(cell);
  }
  return cells;
}

std::string table1_report(int N) {
  const auto cells = table1_fixtures(N);
  std::string out =
      "Characteristic-state derivatives at N = " + std::to_string(N) +
      " (unit rates gS = gL = gD = 1)\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %-6s %-20s %16s %16s %10s %s\n",
                "state", "d/dt", "leading-order form", "leading value",
                "exact value", "rel.err", "check");
  out += buf;
  for (const auto& c : cells) {
    const bool pass = c.noted_exact ? c.rel_error < 1e-12
                                    : c.rel_error <= 2.0 / N;
    std::snprintf(buf, sizeof(buf), "%-12s %-6s %-20s %16.6g %16.6g %10.2e %s\n",
                  c.state.c_str(), c.quantity.c_str(), c.formula.c_str(),
                  c.table_value, c.exact_value, c.rel_error,
                  c.noted_exact ? (pass ? "exact" : "EXACT-MISMATCH")
                                : (pass ? "ok(<=2/N)" : "above 2/N"));
    out += buf;
  }
  return out;
}

double fit_exponential_rate(std::span<const double> t,
                            std::span<const double> y, double t_lo,
                            double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || y[i] <= 0.0) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++n;
  }
  if (n < 2)
    throw std::invalid_argument("fit_exponential_rate: window too small");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

double fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_power_law: need matching sizes >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double peak_time(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 3)
    throw std::invalid_argument("peak_time: need at least 3 samples");
  std::size_t k = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[k]) k = i;
  if (k == 0 || k + 1 == y.size()) return t[k];
  // parabolic refinement through the three bracketing samples
  const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom == 0.0) return t[k];
  const double shift = 0.5 * (y0 - y2) / denom;
  return t[k] + shift * (t[k + 1] - t[k]);
}

}  // namespace dickesim::analysis
