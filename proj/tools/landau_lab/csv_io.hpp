#pragma once

// CSV and file plumbing: shortest round-trip numbers, LF endings, mandatory
// header, atomic writes (temp file + rename), line-numbered parse errors.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "landau/linalg.hpp"
#include "landau/transport.hpp"

namespace lab {

/// Bad user input: exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double.
inline std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Writes `content` to a sibling temp file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Rows of a header-first CSV. Builder for output files.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) out_ += ',';
      out_ += num(values[k]);
    }
    out_ += '\n';
  }

  void row_strings(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ += ',';
      out_ += fields[k];
    }
    out_ += '\n';
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto k = line.find(',', start);
    out.push_back(trim(line.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start)));
    if (k == std::string_view::npos) return out;
    start = k + 1;
  }
}

inline double parse_double(std::string_view field, const std::string& where) {
  double x = 0.0;
  const char* first = field.data();
  if (!field.empty() && field.front() == '+') ++first;
  const auto res = std::from_chars(first, field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty())
    throw InputError(where + ": cannot parse \"" + std::string(field) + "\" as a number");
  if (!std::isfinite(x)) throw InputError(where + ": non-finite value \"" + std::string(field) + "\"");
  return x;
}

}  // namespace detail

/// Point cloud from CSV with header x,y,z or x,y,z,w. Without a weight column
/// the measure is uniform.
inline landau::DiscreteMeasure read_point_cloud(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string name = path.string();
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false, weighted = false;
  landau::DiscreteMeasure m;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto fields = detail::split(line);
    const std::string where = name + ":" + std::to_string(line_no);
    if (!have_header) {
      const bool xyz = fields.size() >= 3 && fields[0] == "x" && fields[1] == "y" && fields[2] == "z";
      if (!xyz || fields.size() > 4 || (fields.size() == 4 && fields[3] != "w"))
        throw InputError(where + ": expected header x,y,z or x,y,z,w");
      weighted = fields.size() == 4;
      have_header = true;
      continue;
    }
    const std::size_t want = weighted ? 4 : 3;
    if (fields.size() != want)
      throw InputError(where + ": expected " + std::to_string(want) + " fields, found " + std::to_string(fields.size()));
    m.points.push_back({detail::parse_double(fields[0], where), detail::parse_double(fields[1], where),
                        detail::parse_double(fields[2], where)});
    if (weighted) {
      const double w = detail::parse_double(fields[3], where);
      if (w < 0.0) throw InputError(where + ": negative weight");
      m.weights.push_back(w);
    }
  }
  if (!have_header) throw InputError(name + ": empty file, header x,y,z required");
  if (m.points.empty()) throw InputError(name + ": no data rows");
  if (!weighted) m = landau::DiscreteMeasure::uniform(std::move(m.points));
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(name + ": " + e.what());
  }
  return m;
}

/// Unweighted ensemble (a weight column is rejected).
inline std::vector<landau::Vec3> read_ensemble(const std::filesystem::path& path) {
  auto m = read_point_cloud(path);
  if (!m.is_uniform()) throw InputError(path.string() + ": ensembles must be unweighted (uniform)");
  return std::move(m.points);
}

inline std::string ensemble_csv(const std::vector<landau::Vec3>& v) {
  CsvWriter w({"x", "y", "z"});
  for (const auto& x : v) w.row({x.x, x.y, x.z});
  return w.str();
}

}  // namespace lab
