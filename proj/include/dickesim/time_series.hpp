#pragma once

#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

namespace dickesim {

/// Sampled observables over time, with solver provenance in `meta`.
///
/// Column order is canonical (t first, then the observables in the order they
/// were added); all columns have the same length and t is strictly
/// increasing.
struct TimeSeries {
  std::vector<double> t;
  std::vector<std::string> names;            ///< observable column names
  std::deque<std::vector<double>> columns;   ///< one vector per name (deque:
                                             ///< add_column references stay
                                             ///< valid as columns are added)
  nlohmann::json meta = nlohmann::json::object();

  std::vector<double>& add_column(const std::string& name);
  const std::vector<double>* column(const std::string& name) const;
  bool has_column(const std::string& name) const { return column(name) != nullptr; }
  std::size_t n_samples() const { return t.size(); }

  void check_consistent() const;  ///< throws if ragged or t not increasing
};

/// CSV with a single header row: t,<name>,... ; floats at 17 significant
/// digits so a round trip is bit-identical.
void write_csv(const TimeSeries& series, const std::string& path);
TimeSeries read_csv(const std::string& path);

std::string to_csv_string(const TimeSeries& series);
TimeSeries from_csv_string(const std::string& csv);

/// Single-file JSON form: {"t": [...], "columns": {...}, "meta": {...}}.
void write_json(const TimeSeries& series, const std::string& path);

/// Sidecar metadata (config echo, diagnostics, code version) for a CSV.
void write_meta_sidecar(const TimeSeries& series, const std::string& csv_path);

/// Uniform sample grid [0, t_max] with `samples` points (samples >= 2).
std::vector<double> uniform_grid(double t_max, int samples);

}  // namespace dickesim
