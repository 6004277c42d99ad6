#pragma once

/** @file
 * Text formats used by the command-line tool.
 *
 * Series files are two-column CSV with header `t,x`, one observation per row
 * in increasing t. Blank lines and lines starting with `#` are ignored.
 * Metadata sidecars and config files are `key=value` lines.
 */

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iarma/error.hpp"
#include "iarma/model.hpp"
#include "iarma/montecarlo.hpp"

namespace iarma::io {

/// Shortest-safe round trip: 17 significant digits.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return lines;
}

inline bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

// ---------------------------------------------------------------------------
// Series CSV

struct RawSeries {
  std::vector<double> t;
  std::vector<double> x;
};

inline RawSeries parse_series_csv(const std::vector<std::string>& lines,
                                  const std::string& source = "<input>") {
  RawSeries raw;
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (i == 0 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (skippable(line)) continue;
    const auto cols = split(line, ',');
    const std::string where = source + ":" + std::to_string(i + 1);
    if (!header) {
      if (cols.size() != 2 || cols[0] != "t" || cols[1] != "x") {
        throw ValidationError(where + ": expected header 't,x'");
      }
      header = true;
      continue;
    }
    if (cols.size() != 2) throw ValidationError(where + ": expected two columns");
    raw.t.push_back(parse_double(cols[0], "time at " + where));
    raw.x.push_back(parse_double(cols[1], "value at " + where));
  }
  if (!header) throw ValidationError(source + ": missing header 't,x'");
  if (raw.t.empty()) throw ValidationError(source + ": no observations");
  return raw;
}

inline IrregularSeries read_series(const std::string& path, Rescale rescale = Rescale::automatic) {
  auto raw = parse_series_csv(read_lines(path), path);
  return IrregularSeries(std::move(raw.t), std::move(raw.x), rescale);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

/// CSV text of the series on its original time axis.
inline std::string series_csv(const IrregularSeries& s) {
  std::string out = "t,x\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += fmt_double(s.original_times()[i]);
    out += ',';
    out += fmt_double(s.values()[i]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// key=value files

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(const std::vector<std::string>& lines,
                                  const std::string& source = "<input>") {
  KeyValues kv;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (skippable(lines[i])) continue;
    const std::string_view line = lines[i];
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(source + ":" + std::to_string(i + 1) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(i + 1) + ": empty key");
    kv.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

inline KeyValues read_key_values(const std::string& path) {
  return parse_key_values(read_lines(path), path);
}

inline std::string key_values_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo grid files and tables

/// A parsed grid row; `error` is set when the row was rejected.
struct GridRow {
  mc::Design design;
  std::string error;
};

/// Grid spec CSV with header `n,phi,theta,sigma2,gaps`. Rows that fail to
/// parse or validate are kept with their error so the run can record them.
inline std::vector<GridRow> parse_grid(const std::vector<std::string>& lines, std::size_t m,
                                       std::uint64_t seed, const std::string& source = "<grid>") {
  std::vector<GridRow> rows;
  bool header = false;
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (skippable(lines[i])) continue;
    const auto cols = split(lines[i], ',');
    if (!header) {
      if (cols.size() != 5 || cols[0] != "n" || cols[1] != "phi" || cols[2] != "theta" ||
          cols[3] != "sigma2" || cols[4] != "gaps") {
        throw ValidationError(source + ": expected header 'n,phi,theta,sigma2,gaps'");
      }
      header = true;
      continue;
    }
    GridRow row;
    row.design.m = m;
    row.design.base_seed = seed;
    row.design.cell_index = idx++;
    try {
      if (cols.size() != 5) throw ValidationError("expected five columns");
      const double n = parse_double(cols[0], "n");
      if (!(n >= 2.0) || n != std::floor(n)) throw ValidationError("n must be an integer >= 2");
      row.design.n = static_cast<std::size_t>(n);
      row.design.phi = parse_double(cols[1], "phi");
      row.design.theta = parse_double(cols[2], "theta");
      row.design.sigma2 = parse_double(cols[3], "sigma2");
      row.design.gaps = GapLaw::parse(cols[4]);
      mc::validate(row.design);
    } catch (const ValidationError& e) {
      row.error = source + ":" + std::to_string(i + 1) + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ValidationError(source + ": missing grid header");
  return rows;
}

inline std::string mc_csv_header() {
  std::string h = "n,phi,theta,sigma2,gaps,m,used,failures,flagged";
  for (const char* p : {"phi", "theta"}) {
    for (const char* f : {"mean", "se_hat", "se_emp", "bias", "rmse", "cv", "mce", "se_count"}) {
      h += ',';
      h += p;
      h += '_';
      h += f;
    }
  }
  return h + ",error\n";
}

inline std::string mc_csv_row(const mc::Cell& c) {
  const auto& d = c.design;
  std::string row = std::to_string(d.n) + "," + fmt_double(d.phi) + "," + fmt_double(d.theta) +
                    "," + fmt_double(d.sigma2) + "," + d.gaps.to_string() + "," +
                    std::to_string(d.m) + "," + std::to_string(c.used) + "," +
                    std::to_string(c.failures) + "," + (c.flagged ? "1" : "0");
  for (const auto* s : {&c.phi, &c.theta}) {
    for (const double v : {s->mean, s->se_hat, s->se_emp, s->bias, s->rmse, s->cv, s->mce}) {
      row += ',';
      row += c.error.empty() ? fmt_double(v) : "";
    }
    row += ',';
    row += std::to_string(s->se_count);
  }
  std::string err = c.error;
  for (auto& ch : err) {
    if (ch == ',' || ch == '\n') ch = ';';
  }
  return row + "," + err + "\n";
}

}  // namespace iarma::io
