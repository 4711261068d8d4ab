#pragma once

// CSV snapshots, run history, range reports and flat key=value config files.
// Numbers are written with std::to_chars (shortest round-trip form), so the
// output is locale independent and reads back bit for bit.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cgidp/common.hpp"
#include "cgidp/mesh.hpp"
#include "cgidp/study.hpp"
#include "cgidp/time_integration.hpp"

namespace cgidp {

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

inline void close_output(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw IoError("write to " + path.string() + " failed");
}

template <class Row>
void write_row(std::ostream& os, const Row& cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

}  // namespace detail

// Default variable names: u for scalars, rho/m/E for 1D Euler.
inline std::vector<std::string> variable_names(int m, bool is_euler, int dim = 1) {
  if (is_euler && m == dim + 2) {
    std::vector<std::string> v{"rho"};
    const char* axes[] = {"mx", "my", "mz"};
    for (int d = 0; d < dim; ++d) v.emplace_back(dim == 1 ? "m" : axes[d]);
    v.emplace_back("E");
    return v;
  }
  if (m == 1) return {"u"};
  std::vector<std::string> v;
  for (int k = 0; k < m; ++k) v.push_back("u" + std::to_string(k));
  return v;
}

// One row per node: coordinates, then one column per variable.
template <int Dim, int M>
void write_solution(const std::filesystem::path& path, const Mesh<Dim>& mesh, const NodalField<M>& u,
                    const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != M) throw InvalidArgument("write_solution: need one name per variable");
  auto os = detail::open_output(path);
  std::vector<std::string> row;
  const char* axes[] = {"x", "y", "z"};
  for (int d = 0; d < Dim; ++d) row.emplace_back(axes[d]);
  row.insert(row.end(), names.begin(), names.end());
  detail::write_row(os, row);
  for (int j = 0; j < mesh.num_nodes(); ++j) {
    row.clear();
    const auto x = mesh.node_coordinate(j);
    for (int d = 0; d < Dim; ++d) row.push_back(format_number(x[d]));
    for (int k = 0; k < M; ++k) row.push_back(format_number(u[j][k]));
    detail::write_row(os, row);
  }
  detail::close_output(os, path);
}

// Per-element averages together with the smoothness sensor and slope
// limiting factor of the last right-hand-side evaluation.
template <int Dim, int M>
void write_cells(const std::filesystem::path& path, const Mesh<Dim>& mesh, const NodalField<M>& u,
                 const std::vector<std::string>& names, const std::vector<double>& gamma,
                 const std::vector<double>& beta) {
  auto os = detail::open_output(path);
  std::vector<std::string> row{"element"};
  const char* axes[] = {"xc", "yc", "zc"};
  for (int d = 0; d < Dim; ++d) row.emplace_back(axes[d]);
  for (const auto& n : names) row.push_back("avg_" + n);
  row.emplace_back("gamma");
  row.emplace_back("beta");
  detail::write_row(os, row);
  Vec<Dim> center{};
  for (int d = 0; d < Dim; ++d) center[d] = 0.5;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    row.clear();
    row.push_back(std::to_string(e));
    const auto xc = mesh.map(e, center);
    for (int d = 0; d < Dim; ++d) row.push_back(format_number(xc[d]));
    const auto avg = cell_average<Dim, M>(mesh, u, e);
    for (int k = 0; k < M; ++k) row.push_back(format_number(avg[k]));
    row.push_back(format_number(e < static_cast<int>(gamma.size()) ? gamma[e] : std::nan("")));
    row.push_back(format_number(e < static_cast<int>(beta.size()) ? beta[e] : std::nan("")));
    detail::write_row(os, row);
  }
  detail::close_output(os, path);
}

template <int M>
void write_history(const std::filesystem::path& path, const std::vector<StepRecord<M>>& history,
                   const std::vector<std::string>& names) {
  auto os = detail::open_output(path);
  std::vector<std::string> row{"step", "t", "dt"};
  for (const auto& n : names) row.push_back("mass_" + n);
  row.emplace_back("entropy");
  for (const auto& n : names) row.push_back("min_" + n);
  for (const auto& n : names) row.push_back("max_" + n);
  row.insert(row.end(), {"min_beta", "alpha_limited", "retries"});
  detail::write_row(os, row);
  for (const auto& r : history) {
    row.clear();
    row.push_back(std::to_string(r.step));
    row.push_back(format_number(r.t));
    row.push_back(format_number(r.dt));
    for (int k = 0; k < M; ++k) row.push_back(format_number(r.mass[k]));
    row.push_back(format_number(r.entropy));
    for (int k = 0; k < M; ++k) row.push_back(format_number(r.min[k]));
    for (int k = 0; k < M; ++k) row.push_back(format_number(r.max[k]));
    row.push_back(format_number(r.min_beta));
    row.push_back(std::to_string(r.alpha_limited));
    row.push_back(std::to_string(r.retries));
    detail::write_row(os, row);
  }
  detail::close_output(os, path);
}

// "name min max" per variable.
template <int M>
void write_range(const std::filesystem::path& path, const NodalField<M>& u, const std::vector<std::string>& names) {
  auto os = detail::open_output(path);
  for (int k = 0; k < M; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : u) {
      lo = std::min(lo, v[k]);
      hi = std::max(hi, v[k]);
    }
    os << names[k] << ' ' << format_number(lo) << ' ' << format_number(hi) << '\n';
  }
  detail::close_output(os, path);
}

inline void write_eoc(const std::filesystem::path& path, const std::vector<StudyRow>& rows) {
  auto os = detail::open_output(path);
  detail::write_row(os, std::vector<std::string>{"cells", "h", "l2_error", "eoc", "steps"});
  for (const auto& r : rows)
    detail::write_row(os, std::vector<std::string>{std::to_string(r.cells), format_number(r.h),
                                                   format_number(r.error), format_number(r.eoc),
                                                   std::to_string(r.steps)});
  detail::close_output(os, path);
}

// Minimal CSV table: header plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw InvalidArgument("no column '" + std::string(name) + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                    " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Flat "key = value" file; '#' starts a comment. Later keys override.
inline std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace cgidp
