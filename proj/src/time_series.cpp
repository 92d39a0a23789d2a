#include "dickesim/time_series.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dickesim {

std::vector<double>& TimeSeries::add_column(const std::string& name) {
  names.push_back(name);
  columns.emplace_back();
  return columns.back();
}

const std::vector<double>* TimeSeries::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return &columns[i];
  return nullptr;
}

void TimeSeries::check_consistent() const {
  if (names.size() != columns.size())
    throw std::logic_error("TimeSeries: names/columns mismatch");
  for (const auto& c : columns)
    if (c.size() != t.size())
      throw std::logic_error("TimeSeries: ragged columns");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw std::logic_error("TimeSeries: t not strictly increasing");
}

namespace {
void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}
}  // namespace

std::string to_csv_string(const TimeSeries& series) {
  series.check_consistent();
  std::string out = "t";
  for (const auto& n : series.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (std::size_t r = 0; r < series.t.size(); ++r) {
    format_double(out, series.t[r]);
    for (const auto& c : series.columns) {
      out += ',';
      format_double(out, c[r]);
    }
    out += '\n';
  }
  return out;
}

TimeSeries from_csv_string(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("CSV: empty input");
  TimeSeries series;
  {
    std::istringstream header(line);
    std::string field;
    bool first = true;
    while (std::getline(header, field, ',')) {
      if (first) {
        if (field != "t") throw std::runtime_error("CSV: first column must be t");
        first = false;
      } else {
        series.add_column(field);
      }
    }
    if (first) throw std::runtime_error("CSV: missing header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(row, field, ',')) {
      const double v = std::strtod(field.c_str(), nullptr);
      if (col == 0)
        series.t.push_back(v);
      else if (col - 1 < series.columns.size())
        series.columns[col - 1].push_back(v);
      else
        throw std::runtime_error("CSV: row wider than header");
      ++col;
    }
    if (col != series.columns.size() + 1)
      throw std::runtime_error("CSV: row narrower than header");
  }
  series.check_consistent();
  return series;
}

void write_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_csv_string(series);
}

TimeSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_string(buf.str());
}

void write_json(const TimeSeries& series, const std::string& path) {
  series.check_consistent();
  nlohmann::json j;
  j["t"] = series.t;
  auto& cols = j["columns"] = nlohmann::json::object();
  for (std::size_t i = 0; i < series.names.size(); ++i)
    cols[series.names[i]] = series.columns[i];
  j["meta"] = series.meta;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_meta_sidecar(const TimeSeries& series, const std::string& csv_path) {
  std::string path = csv_path;
  const auto dot = path.rfind(".csv");
  if (dot != std::string::npos && dot == path.size() - 4)
    path = path.substr(0, dot);
  path += ".meta.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << series.meta.dump(2) << '\n';
}

std::vector<double> uniform_grid(double t_max, int samples) {
  if (!(t_max > 0.0) || samples < 2)
    throw std::invalid_argument("uniform_grid: need t_max > 0, samples >= 2");
  std::vector<double> grid(samples);
  for (int i = 0; i < samples; ++i)
    grid[i] = t_max * static_cast<double>(i) / (samples - 1);
  return grid;
}

}  // namespace dickesim
