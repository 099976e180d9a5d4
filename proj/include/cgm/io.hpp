#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgm/busemann.hpp"
#include "cgm/lattice.hpp"
#include "cgm/lpp.hpp"
#include "cgm/stats.hpp"

namespace cgm {

class output_exists_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  if (r.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, r.ptr);
}

// Creates parent directories; refuses an existing file unless force.
inline std::ofstream open_output(const std::filesystem::path& path, bool force) {
  if (std::filesystem::exists(path) && !force)
    throw output_exists_error("refusing to overwrite " + path.string() + " (use --force)");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

// Row-major over t then k.
inline void write_gtable_csv(std::ostream& out, const GTable& g) {
  out << "k,t,value\n";
  for (std::int64_t t = g.lo().y; t <= g.hi().y; ++t)
    for (std::int64_t k = g.lo().x; k <= g.hi().x; ++k)
      out << k << ',' << t << ',' << format_double(g.value({k, t})) << '\n';
}

inline void write_multiconfig_csv(std::ostream& out, const MultiConfig& c) {
  out << "line,index,value\n";
  for (std::size_t i = 0; i < c.n(); ++i)
    for (std::int64_t k = c.offset(); k < c.end(); ++k)
      out << i << ',' << k << ',' << format_double(c.lines[i].at(k)) << '\n';
}

// key=value sidecar for a MultiConfig CSV.
inline void write_multiconfig_meta(std::ostream& out, const MultiConfig& c) {
  out << "lines=" << c.n() << "\noffset=" << c.offset() << "\nlength=" << c.length() << "\nrates=";
  for (std::size_t i = 0; i < c.rates.size(); ++i) out << (i ? "," : "") << format_double(c.rates[i]);
  out << '\n';
}

inline void write_edges_csv(std::ostream& out, const BusemannEdgeEstimates& est) {
  out << "k,t,rho,horizontal,vertical\n";
  for (const auto& e : est.per_rho)
    for (std::size_t i = 0; i < est.window.count; ++i)
      out << est.window.k_first + static_cast<std::int64_t>(i) << ',' << est.window.level << ','
          << format_double(e.rho) << ',' << format_double(e.horizontal[i]) << ','
          << format_double(e.vertical[i]) << '\n';
}

// Several paths share one file; step_index restarts at 0 for each. Dual points are written at
// their half-integer positions.
inline void write_geodesics_csv(std::ostream& out, const std::vector<GeodesicPath>& paths) {
  out << "step_index,x,y\n";
  for (const auto& p : paths) {
    const auto pts = p.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (p.dual)
        out << i << ',' << format_double(static_cast<double>(pts[i].x) - 0.5) << ','
            << format_double(static_cast<double>(pts[i].y) - 0.5) << '\n';
      else
        out << i << ',' << pts[i].x << ',' << pts[i].y << '\n';
    }
  }
}

inline void write_pmf_csv(std::ostream& out, const std::vector<double>& empirical, const std::vector<double>& exact) {
  if (empirical.size() != exact.size()) throw std::invalid_argument("write_pmf_csv: size mismatch");
  out << "n,empirical,exact\n";
  for (std::size_t n = 0; n < exact.size(); ++n)
    out << n << ',' << format_double(empirical[n]) << ',' << format_double(exact[n]) << '\n';
}

inline nlohmann::json to_json(const TestReport& r) {
  return {{"name", r.name}, {"statistic", r.statistic}, {"threshold", r.threshold}, {"n", r.n},
          {"seed", r.seed},  {"pass", r.pass},           {"paper_ref", r.paper_ref}};
}

inline void write_report_line(std::ostream& out, const TestReport& r) { out << to_json(r).dump() << '\n'; }

// Flat key=value text; '#' starts a comment line. Later keys win.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t no = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("config line " + std::to_string(no) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace cgm
