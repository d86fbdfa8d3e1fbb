#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qqg/csv.hpp"

namespace qqg {

/// One row of a convergence trace.
struct TraceRecord {
  long iter = 0;
  double f = 0.0;
  double grad_inf_norm = 0.0;
  double step_norm = 0.0;
  long ls_trials = 0;
  long updates_skipped = 0;
  double elapsed_s = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline constexpr std::string_view kTraceHeader =
    "iter,f,grad_inf_norm,step_norm,ls_trials,updates_skipped,elapsed_s";

inline std::string format_trace(const std::vector<TraceRecord>& records) {
  std::string out;
  out.reserve(64 * (records.size() + 1));
  out.append(kTraceHeader);
  out.push_back('\n');
  for (const auto& r : records) {
    out += std::to_string(r.iter);
    out += ',';
    out += csv::format_double(r.f);
    out += ',';
    out += csv::format_double(r.grad_inf_norm);
    out += ',';
    out += csv::format_double(r.step_norm);
    out += ',';
    out += std::to_string(r.ls_trials);
    out += ',';
    out += std::to_string(r.updates_skipped);
    out += ',';
    out += csv::format_double(r.elapsed_s);
    out += '\n';
  }
  return out;
}

inline void write_trace_csv(const std::vector<TraceRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("write_trace_csv: no records");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << format_trace(records);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<TraceRecord> parse_trace(std::istream& in, const std::string& origin = "<trace>") {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error(origin + ": unexpected header '" + line + "'");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 7)
      throw std::runtime_error(origin + " line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      TraceRecord r;
      r.iter = csv::parse_long(f[0]);
      r.f = csv::parse_double(f[1]);
      r.grad_inf_norm = csv::parse_double(f[2]);
      r.step_norm = csv::parse_double(f[3]);
      r.ls_trials = csv::parse_long(f[4]);
      r.updates_skipped = csv::parse_long(f[5]);
      r.elapsed_s = csv::parse_double(f[6]);
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error(origin + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_trace(in, path);
}

}  // namespace qqg
