#pragma once

// CSV and JSON encodings of paths, sets and estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace rosefract {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void set_precision(std::ostream &os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    out.push_back(field);
  }
  return out;
}

inline double parse_double(const std::string &s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

// Reads rows of a CSV with the given header; each row must have header.size() numbers.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream &in,
                                                         const std::vector<std::string> &header) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("empty CSV input");
  }
  if (split_csv_line(line) != header) {
    std::string want;
    for (const auto &h : header) {
      want += (want.empty() ? "" : ",") + h;
    }
    throw FormatError("expected CSV header '" + want + "', got '" + line + "'");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto &f : fields) {
      row.push_back(parse_double(f, line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace detail

inline void write_path_csv(std::ostream &os, const SamplePath &path) {
  detail::set_precision(os);
  os << "t,z\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    os << path.time(i) << ',' << path.values[i] << '\n';
  }
}

inline json path_sidecar(const SamplePath &path, double horizon) {
  return json{{"H", path.hurst},
              {"n", path.grid.n},
              {"T", horizon},
              {"seed", path.seed},
              {"method", "hermite2"}};
}

// Reads a `t,z` CSV on a uniform grid starting at t = 0.
inline SamplePath read_path_csv(std::istream &in, double hurst) {
  const auto rows = detail::read_numeric_csv(in, {"t", "z"});
  if (rows.size() < 2) {
    throw FormatError("path CSV needs at least two rows");
  }
  const double t0 = rows[0][0];
  const double dt = rows[1][0] - rows[0][0];
  SamplePath path;
  path.grid = PathGrid::uniform(t0, dt, rows.size() - 1);
  path.hurst = hurst;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = t0 + static_cast<double>(i) * dt;
    if (std::abs(rows[i][0] - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
      throw FormatError("path CSV is not on a uniform grid at row " + std::to_string(i + 2));
    }
    path.values.push_back(rows[i][1]);
  }
  path.validate();
  return path;
}

inline void write_interval_csv(std::ostream &os, const IntervalSet &set) {
  detail::set_precision(os);
  os << "a,b\n";
  for (const auto &iv : set) {
    os << iv.a << ',' << iv.b << '\n';
  }
}

inline IntervalSet read_interval_csv(std::istream &in) {
  const auto rows = detail::read_numeric_csv(in, {"a", "b"});
  std::vector<Interval> items;
  items.reserve(rows.size());
  for (const auto &r : rows) {
    items.push_back({r[0], r[1]});
  }
  return IntervalSet::from_unsorted(std::move(items));
}

inline void write_pixel_csv(std::ostream &os, const PixelSet &set) {
  os << "cell\n";
  for (auto c : set) {
    os << c << '\n';
  }
}

inline PixelSet read_pixel_csv(std::istream &in) {
  const auto rows = detail::read_numeric_csv(in, {"cell"});
  std::vector<std::int64_t> cells;
  cells.reserve(rows.size());
  for (const auto &r : rows) {
    if (r[0] != std::floor(r[0])) {
      throw FormatError("pixel cell is not an integer");
    }
    cells.push_back(static_cast<std::int64_t>(r[0]));
  }
  return PixelSet(std::move(cells));
}

// Sorted reals from a one-column CSV with header `x`.
inline std::vector<double> read_points_csv(std::istream &in) {
  const auto rows = detail::read_numeric_csv(in, {"x"});
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto &r : rows) {
    out.push_back(r[0]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline json to_json(const DimensionEstimate &est) {
  json diag = json::array();
  for (const auto &row : est.diagnostics) {
    diag.push_back(
        {{"scale", row.scale}, {"quantity", row.quantity}, {"used", row.used}, {"note", row.note}});
  }
  return json{{"value", est.value},
              {"stderr", est.stderr_},
              {"scales", {est.scale_lo, est.scale_hi}},
              {"method", est.method},
              {"diagnostics", diag},
              {"flags", est.flags}};
}

inline std::ifstream open_input(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  return in;
}

inline std::ofstream open_output(const std::string &path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  return out;
}

} // namespace rosefract
