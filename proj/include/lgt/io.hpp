#pragma once

// File formats: step functions (CSV "knot,value"), sampled kernels (CSV
// matrix, y-cell measures in the first row and x-cell measures in the first
// column), weight literals, and atomic output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lgt/grid.hpp"
#include "lgt/rearrangement.hpp"
#include "lgt/step_function.hpp"
#include "lgt/weights.hpp"

namespace lgt::io {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, where + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::InvalidArgument, where + ": not a number: '" + s + "'");
  return v;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace detail

inline StepFunction parse_step_csv(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "knot" || rows[0][1] != "value") {
    throw Error(ErrorCode::InvalidArgument, name + ": header must be 'knot,value'");
  }
  std::vector<double> k, v;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw Error(ErrorCode::InvalidArgument, name + ": line " + std::to_string(i + 1) + " needs 2 fields");
    k.push_back(detail::to_double(rows[i][0], name));
    v.push_back(detail::to_double(rows[i][1], name));
  }
  return StepFunction(std::move(k), std::move(v));
}

inline StepFunction read_step_csv(const std::string& path) { return parse_step_csv(detail::read_csv(path), path); }

inline std::string step_csv(const StepFunction& f) {
  std::ostringstream out;
  out.precision(17);
  out << "knot,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << f.knots()[i] << ',' << f.values()[i] << '\n';
  return out.str();
}

/// First row: a corner cell then the y-cell measures; each later row: the
/// x-cell measure then that row's values.
inline SampledKernel read_kernel_csv(const std::string& path) {
  const auto rows = detail::read_csv(path);
  if (rows.size() < 2 || rows[0].size() < 2) throw Error(ErrorCode::InvalidArgument, path + ": kernel needs a header row and one data row");
  std::vector<double> ym, xm, vals;
  for (std::size_t j = 1; j < rows[0].size(); ++j) ym.push_back(detail::to_double(rows[0][j], path));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != ym.size() + 1) throw Error(ErrorCode::InvalidArgument, path + ": ragged kernel row " + std::to_string(i + 1));
    xm.push_back(detail::to_double(rows[i][0], path));
    for (std::size_t j = 1; j < rows[i].size(); ++j) vals.push_back(detail::to_double(rows[i][j], path));
  }
  return SampledKernel(std::move(xm), std::move(ym), std::move(vals));
}

/// Tabulated weight from a CSV "t,value": log-log linear between rows and
/// power laws with the declared exponents outside.
inline Weight read_weight_table(const std::string& path, std::optional<double> a0, std::optional<double> ainf,
                                const GeometricGrid& grid) {
  const auto rows = detail::read_csv(path);
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "t" || rows[0][1] != "value") {
    throw Error(ErrorCode::InvalidArgument, path + ": header must be 't,value'");
  }
  std::vector<double> lt, lv;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw Error(ErrorCode::InvalidArgument, path + ": line " + std::to_string(i + 1) + " needs 2 fields");
    const double t = detail::to_double(rows[i][0], path), v = detail::to_double(rows[i][1], path);
    if (!(t > 0.0) || !(v > 0.0)) throw Error(ErrorCode::InvalidArgument, path + ": t and value must be positive");
    if (!lt.empty() && !(std::log(t) > lt.back())) throw Error(ErrorCode::InvalidArgument, path + ": t must increase");
    lt.push_back(std::log(t));
    lv.push_back(std::log(v));
  }
  if (lt.size() < 2) throw Error(ErrorCode::InvalidArgument, path + ": table needs at least two rows");
  if (!a0 || !ainf) throw Error(ErrorCode::UnknownTail, path + ": table weights need a0 and ainf");
  auto eval = [lt, lv, a = *a0, b = *ainf](double t) {
    const double x = std::log(t);
    if (x <= lt.front()) return std::exp(lv.front() + a * (x - lt.front()));
    if (x >= lt.back()) return std::exp(lv.back() + b * (x - lt.back()));
    const auto it = std::upper_bound(lt.begin(), lt.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - lt.begin());
    const double u = (x - lt[j - 1]) / (lt[j] - lt[j - 1]);
    return std::exp(lv[j - 1] + u * (lv[j] - lv[j - 1]));
  };
  return TabulatedWeight::sample(eval, grid, TailSpec{a0, ainf});
}

/// "pow(a0=..,ainf=..,log=..,C=..)" or "table(file=..,a0=..,ainf=..)".
/// In pow, ainf defaults to a0, log to 0 and C to 1.
inline Weight parse_weight(const std::string& literal, const GeometricGrid& grid = GeometricGrid::standard()) {
  const std::string s = detail::trim(literal);
  const auto open = s.find('('), close = s.rfind(')');
  if (open == std::string::npos || close != s.size() - 1) {
    throw Error(ErrorCode::InvalidArgument, "weight literal must look like pow(...) or table(...): '" + literal + "'");
  }
  const std::string kind = s.substr(0, open);
  std::map<std::string, std::string> args;
  for (const auto& part : detail::split(s.substr(open + 1, close - open - 1), ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "weight argument needs key=value: '" + part + "'");
    args[detail::trim(part.substr(0, eq))] = detail::trim(part.substr(eq + 1));
  }
  auto num = [&](const std::string& key) -> std::optional<double> {
    const auto it = args.find(key);
    if (it == args.end()) return std::nullopt;
    return detail::to_double(it->second, "weight argument " + key);
  };
  if (kind == "pow") {
    for (const auto& [k, v] : args) {
      if (k != "a0" && k != "ainf" && k != "log" && k != "C") throw Error(ErrorCode::InvalidArgument, "unknown pow argument '" + k + "'");
    }
    SymbolicWeight w;
    w.a0 = num("a0").value_or(0.0);
    w.ainf = num("ainf").value_or(w.a0);
    w.clog = num("log").value_or(0.0);
    w.C = num("C").value_or(1.0);
    if (!(w.C > 0.0)) throw Error(ErrorCode::InvalidArgument, "weight constant C must be positive");
    return w;
  }
  if (kind == "table") {
    const auto it = args.find("file");
    if (it == args.end()) throw Error(ErrorCode::InvalidArgument, "table weight needs file=...");
    return read_weight_table(it->second, num("a0"), num("ainf"), grid);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown weight kind '" + kind + "'");
}

/// Writes through a temporary file in the same directory and renames it.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(static_cast<unsigned long>(std::hash<std::string>{}(path + content) & 0xffffffUL));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::Io, "cannot rename onto " + path + ": " + ec.message());
  }
}

}  // namespace lgt::io
