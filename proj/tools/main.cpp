#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dickesim/analysis.hpp"
#include "dickesim/half_int.hpp"
#include "dickesim/time_series.hpp"
#include "dickesim/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitValidation = 4;

dickesim::HalfInt half_int_from_cli(double v, const char* flag) {
  const double doubled = 2.0 * v;
  const long long rounded = std::llround(doubled);
  if (std::abs(doubled - rounded) > 1e-9)
    throw CLI::ValidationError(std::string(flag) +
                               ": must be an integer or half-integer");
  return dickesim::HalfInt::from_doubled(rounded);
}

std::vector<double> parse_list(const std::string& csv, const char* flag) {
  std::vector<double> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  if (out.empty())
    throw CLI::ValidationError(std::string(flag) + ": empty list");
  return out;
}

struct CommonOpts {
  std::string solver = "piqs";
  int n = 2;
  double gamma_s = 1.0, gamma_l = 0.0, gamma_d = 0.0, omega0 = 0.0;
  double j0 = 0.0, m0 = 0.0;
  bool has_j0 = false, has_m0 = false;
  double t_max = 1.0;
  int samples = 1000;
  double rtol = 1e-9;
  std::string out;
  std::string format = "csv";
};

void add_rate_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--gamma-s", o.gamma_s, "spontaneous emission rate");
  cmd->add_option("--gamma-l", o.gamma_l, "nonradiative loss rate");
  cmd->add_option("--gamma-d", o.gamma_d, "pure dephasing rate");
  cmd->add_option("--omega0", o.omega0, "transition frequency (default 0)");
}

void add_run_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--solver", o.solver,
                  "oracle | piqs | cumulant1 | cumulant2 | bosonic");
  cmd->add_option("--n", o.n, "number of two-level systems")->required();
  add_rate_flags(cmd, o);
  cmd->add_option("--j0", o.j0, "initial cooperation number (default N/2)")
      ->each([&](const std::string&) { o.has_j0 = true; });
  cmd->add_option("--m0", o.m0, "initial Jz quantum number (default N/2)")
      ->each([&](const std::string&) { o.has_m0 = true; });
  cmd->add_option("--t-max", o.t_max, "simulated time span");
  cmd->add_option("--samples", o.samples, "number of sample points");
  cmd->add_option("--rtol", o.rtol, "integrator relative tolerance");
  cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
}

dickesim::analysis::RunConfig to_config(const CommonOpts& o) {
  dickesim::analysis::RunConfig config;
  config.solver = dickesim::analysis::solver_from_name(o.solver);
  config.N = o.n;
  config.rates = {o.gamma_s, o.gamma_l, o.gamma_d, o.omega0};
  if (o.has_j0 != o.has_m0)
    throw CLI::ValidationError("--j0/--m0: provide both or neither");
  if (o.has_j0) {
    config.j0 = half_int_from_cli(o.j0, "--j0");
    config.m0 = half_int_from_cli(o.m0, "--m0");
    config.initial_set = true;
  }
  config.t_max = o.t_max;
  config.samples = o.samples;
  config.rtol = o.rtol;
  return config;
}

void emit_series(const dickesim::TimeSeries& series, const CommonOpts& o) {
  if (o.format == "json") {
    if (o.out.empty()) {
      nlohmann::json j;
      j["t"] = series.t;
      auto& cols = j["columns"] = nlohmann::json::object();
      for (std::size_t i = 0; i < series.names.size(); ++i)
        cols[series.names[i]] = series.columns[i];
      j["meta"] = series.meta;
      std::cout << j.dump(2) << '\n';
    } else {
      dickesim::write_json(series, o.out);
    }
    return;
  }
  if (o.out.empty()) {
    std::cout << dickesim::to_csv_string(series);
  } else {
    dickesim::write_csv(series, o.out);
    dickesim::write_meta_sidecar(series, o.out);
  }
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dickesim: collective radiative decay of N two-level systems under "
      "local dephasing and nonradiative loss"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand(
      "run", "single simulation, emits a sampled time series");
  add_run_flags(run_cmd, run_opts);

  CommonOpts traj_opts;
  auto* traj_cmd = app.add_subcommand(
      "trajectory", "run a solver and emit the (j(t), m(t)) Dicke-space curve");
  add_run_flags(traj_cmd, traj_opts);

  // sweep
  CommonOpts sweep_opts;
  std::string n_grid_csv, gd_grid_csv;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "delay-time phase diagram over an (N, gamma_d) grid");
  sweep_cmd->add_option("--solver", sweep_opts.solver, "solver tier");
  sweep_cmd->add_option("--n-grid", n_grid_csv, "comma-separated N values")
      ->required();
  sweep_cmd
      ->add_option("--gamma-d-grid", gd_grid_csv,
                   "comma-separated gamma_d values")
      ->required();
  add_rate_flags(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--samples", sweep_opts.samples,
                        "samples per grid-point run");
  sweep_cmd->add_option("--jobs", jobs, "concurrent grid points");
  sweep_cmd->add_option("--out", sweep_opts.out, "output path");

  // boundary
  int boundary_n = 100;
  std::string ratio_csv = "0.1,1,10";
  int boundary_samples = 0;
  std::string boundary_out;
  auto* boundary_cmd = app.add_subcommand(
      "boundary", "dj/dt = 0 boundary curves j(m) per gamma_l/gamma_d ratio");
  boundary_cmd->add_option("--n", boundary_n, "system size")->required();
  boundary_cmd->add_option("--ratio-list", ratio_csv,
                           "comma-separated gamma_l/gamma_d ratios (0 = pure "
                           "dephasing)");
  boundary_cmd->add_option("--samples", boundary_samples,
                           "m samples (default N+1)");
  boundary_cmd->add_option("--out", boundary_out, "output path");

  // field
  int field_n = 100, field_resolution = 101;
  double field_gs = 1.0;
  std::string field_out;
  auto* field_cmd = app.add_subcommand(
      "field", "photon emission rate over the triangle, in units N^2 gamma_s");
  field_cmd->add_option("--n", field_n, "system size")->required();
  field_cmd->add_option("--gamma-s", field_gs, "spontaneous emission rate");
  field_cmd->add_option("--resolution", field_resolution, "grid resolution")
      ->check(CLI::Range(2, 100000));
  field_cmd->add_option("--out", field_out, "output path");

  // table1
  int table1_n = 400;
  std::string table1_out;
  auto* table1_cmd = app.add_subcommand(
      "table1", "characteristic-state derivative fixtures");
  table1_cmd->add_option("--n", table1_n, "system size (divisible by 4)");
  table1_cmd->add_option("--out", table1_out, "output path");

  // validate
  bool validate_all = false;
  std::vector<int> validate_ids;
  auto* validate_cmd = app.add_subcommand(
      "validate", "run the cross-solver validation suites");
  validate_cmd->add_flag("--all", validate_all,
                         "run the full acceptance criteria set");
  validate_cmd->add_option("--criterion", validate_ids,
                           "run specific criteria by number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      emit_series(dickesim::analysis::run(to_config(run_opts)), run_opts);
    } else if (traj_cmd->parsed()) {
      const auto series = dickesim::analysis::run(to_config(traj_opts));
      emit_series(dickesim::analysis::trajectory_jm(series), traj_opts);
    } else if (sweep_cmd->parsed()) {
      const auto gd = parse_list(gd_grid_csv, "--gamma-d-grid");
      std::vector<int> ns;
      for (const double v : parse_list(n_grid_csv, "--n-grid"))
        ns.push_back(static_cast<int>(std::llround(v)));
      dickesim::RateSet fixed{sweep_opts.gamma_s, sweep_opts.gamma_l, 0.0,
                              sweep_opts.omega0};
      const auto table = dickesim::analysis::sweep_phase_diagram(
          ns, gd, fixed, dickesim::analysis::solver_from_name(sweep_opts.solver),
          jobs, sweep_opts.samples);
      emit_text(table.to_csv(), sweep_opts.out);
      if (!sweep_opts.out.empty()) {
        std::ofstream meta(sweep_opts.out + ".meta.json");
        meta << table.meta.dump(2) << '\n';
      }
    } else if (boundary_cmd->parsed()) {
      const auto ratios = parse_list(ratio_csv, "--ratio-list");
      emit_text(dickesim::analysis::boundary_curves(boundary_n, ratios,
                                                    boundary_samples)
                    .to_csv(),
                boundary_out);
    } else if (field_cmd->parsed()) {
      emit_text(
          dickesim::analysis::emission_field(field_n, field_gs, field_resolution)
              .to_csv(),
          field_out);
    } else if (table1_cmd->parsed()) {
      emit_text(dickesim::analysis::table1_report(table1_n), table1_out);
    } else if (validate_cmd->parsed()) {
      std::vector<int> ids = validate_ids;
      if (ids.empty())
        ids = validate_all ? dickesim::validate::all_criteria()
                           : dickesim::validate::cross_solver_criteria();
      bool all_pass = true;
      for (const int id : ids) {
        const auto result = dickesim::validate::run_criterion(id);
        std::cout << dickesim::validate::format_result(result) << std::endl;
        all_pass = all_pass && result.pass;
      }
      return all_pass ? kExitOk : kExitValidation;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
