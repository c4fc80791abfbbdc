#pragma once
// Wire formats: the per-second telemetry CSV, the mode-timeline CSV, and
// the switch-record CSV.  All files open with '#' provenance lines (tool
// version, seed, rng, config hash); columns are fixed and bit-exact so a
// simulate -> replay round trip reproduces files byte for byte.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsim/controller.hpp"
#include "vcsim/detectors.hpp"
#include "vcsim/telemetry.hpp"
#include "vcsim/version.hpp"

namespace vcsim {

struct Provenance {
  std::string tool = std::string(kToolName) + " " + kVersion;
  std::uint64_t seed = 0;
  std::string rng;
  std::string config_hash;

  std::string header() const {
    std::ostringstream os;
    os << "# " << tool << "\n";
    os << "# seed=" << seed << " rng=" << rng << " config=" << config_hash
       << "\n";
    return os.str();
  }
};

struct TelemetryCsvRow {
  std::int64_t timestamp_ms = 0;
  std::int64_t bytes_sent_cum = 0;
  std::int64_t bytes_received_cum = 0;
  std::int64_t packets_lost_cum = 0;
  std::int64_t packets_received_cum = 0;
  double rtt_ms = 0.0;     // quantized to 3 decimals
  double jitter_ms = 0.0;  // quantized to 3 decimals
  std::optional<std::int64_t> frames_rendered_cum;
  std::optional<std::string> mode_label;
};

// Quantize to 3 decimals the same way the writer prints, so the value a
// simulation feeds its own estimator equals what a replay parses back.
inline double quantize3(double v) { return std::llround(v * 1000.0) / 1000.0; }

inline CounterSample to_counter_sample(const TelemetryCsvRow& row) {
  CounterSample s;
  s.t = static_cast<double>(row.timestamp_ms) / 1000.0;
  s.bytes_tx_cum = static_cast<double>(row.bytes_sent_cum);
  s.bytes_rx_cum = static_cast<double>(row.bytes_received_cum);
  s.packets_lost_cum = static_cast<double>(row.packets_lost_cum);
  s.packets_recv_cum = static_cast<double>(row.packets_received_cum);
  s.rtt = row.rtt_ms / 1000.0;
  s.jitter = row.jitter_ms / 1000.0;
  return s;
}

namespace csv_detail {

inline std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_i64(const std::string& s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && !s.empty();
}

inline bool parse_f64(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace csv_detail

inline constexpr const char* kTelemetryBaseHeader =
    "timestamp_ms,bytes_sent_cum,bytes_received_cum,packets_lost_cum,"
    "packets_received_cum,rtt_ms,jitter_ms";

inline std::string telemetry_header(bool with_frames, bool with_mode) {
  std::string h = kTelemetryBaseHeader;
  if (with_frames) h += ",frames_rendered_cum";
  if (with_mode) h += ",mode_label";
  return h;
}

inline std::string format_telemetry_row(const TelemetryCsvRow& r) {
  std::ostringstream os;
  os << r.timestamp_ms << ',' << r.bytes_sent_cum << ',' << r.bytes_received_cum
     << ',' << r.packets_lost_cum << ',' << r.packets_received_cum << ','
     << csv_detail::fmt3(r.rtt_ms) << ',' << csv_detail::fmt3(r.jitter_ms);
  if (r.frames_rendered_cum) os << ',' << *r.frames_rendered_cum;
  if (r.mode_label) os << ',' << *r.mode_label;
  return os.str();
}

struct TelemetryCsv {
  Provenance provenance;
  std::vector<TelemetryCsvRow> rows;
  bool has_frames = false;
  bool has_mode = false;
  std::size_t malformed = 0;
  std::vector<std::string> diagnostics;  // one per skipped row
};

inline std::string render_telemetry_csv(const TelemetryCsv& csv) {
  std::string out = csv.provenance.header();
  out += telemetry_header(csv.has_frames, csv.has_mode) + "\n";
  for (const auto& r : csv.rows) out += format_telemetry_row(r) + "\n";
  return out;
}

// Parses a telemetry CSV.  '#' lines are captured as provenance; malformed
// data rows are skipped with a diagnostic and counted.  More than 10%
// malformed rows (or a bad header) is a hard error.
inline TelemetryCsv parse_telemetry_csv(std::istream& in,
                                        const std::string& name = "telemetry") {
  TelemetryCsv csv;
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') {
      // Second provenance line carries seed/rng/config.
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        if (tok.rfind("seed=", 0) == 0)
          csv.provenance.seed = std::strtoull(tok.c_str() + 5, nullptr, 10);
        else if (tok.rfind("rng=", 0) == 0)
          csv.provenance.rng = tok.substr(4);
        else if (tok.rfind("config=", 0) == 0)
          csv.provenance.config_hash = tok.substr(7);
      }
      continue;
    }
    if (line.empty()) continue;
    if (!header_seen) {
      const auto cols = csv_detail::split(line, ',');
      const auto base = csv_detail::split(kTelemetryBaseHeader, ',');
      if (cols.size() < base.size())
        throw std::runtime_error(name + ": header: missing mandatory columns");
      for (std::size_t i = 0; i < base.size(); ++i)
        if (cols[i] != base[i])
          throw std::runtime_error(name + ": header: expected column '" +
                                   base[i] + "', found '" + cols[i] + "'");
      std::size_t extra = base.size();
      if (extra < cols.size() && cols[extra] == "frames_rendered_cum") {
        csv.has_frames = true;
        ++extra;
      }
      if (extra < cols.size() && cols[extra] == "mode_label") {
        csv.has_mode = true;
        ++extra;
      }
      if (extra != cols.size())
        throw std::runtime_error(name + ": header: unexpected column '" +
                                 cols[extra] + "'");
      header_seen = true;
      continue;
    }
    ++data_rows;
    const auto f = csv_detail::split(line, ',');
    const std::size_t expect = 7 + (csv.has_frames ? 1 : 0) +
                               (csv.has_mode ? 1 : 0);
    TelemetryCsvRow row;
    bool ok = f.size() == expect;
    ok = ok && csv_detail::parse_i64(f[0], row.timestamp_ms);
    ok = ok && csv_detail::parse_i64(f[1], row.bytes_sent_cum);
    ok = ok && csv_detail::parse_i64(f[2], row.bytes_received_cum);
    ok = ok && csv_detail::parse_i64(f[3], row.packets_lost_cum);
    ok = ok && csv_detail::parse_i64(f[4], row.packets_received_cum);
    ok = ok && csv_detail::parse_f64(f[5], row.rtt_ms);
    ok = ok && csv_detail::parse_f64(f[6], row.jitter_ms);
    if (ok && csv.has_frames) {
      std::int64_t frames = 0;
      ok = csv_detail::parse_i64(f[7], frames);
      row.frames_rendered_cum = frames;
    }
    if (ok && csv.has_mode) row.mode_label = f.back();
    if (!ok) {
      ++csv.malformed;
      csv.diagnostics.push_back(name + ":" + std::to_string(lineno) +
                                ": malformed row skipped");
      continue;
    }
    csv.rows.push_back(row);
  }
  if (!header_seen)
    throw std::runtime_error(name + ": missing mandatory header row");
  if (data_rows > 0 && csv.malformed * 10 > data_rows)
    throw std::runtime_error(name + ": more than 10% malformed rows (" +
                             std::to_string(csv.malformed) + "/" +
                             std::to_string(data_rows) + ")");
  return csv;
}

// One mode-timeline row: the link estimate, the counters, the decision and
// the adapted knobs for a tick.
struct ModeTimelineRow {
  std::int64_t t_ms = 0;
  LinkEstimate est;
  Mode mode = Mode::Normal;
  int n_down = 0;
  int n_up = 0;
  int n_mid = 0;
  bool feasible = true;
  double demand_total = 0.0;
  double eta = 1.0;
  double gamma = 1.0;
  double f_ctrl = 0.0;
  double d_bits = 0.0;
  double t_ref = 0.0;
};

inline constexpr const char* kTimelineHeader =
    "t_ms,rate_tx_kbps,rate_rx_kbps,rate_tx_smooth_kbps,rate_rx_smooth_kbps,"
    "loss_ratio,goodput_kbps,capacity_kbps,mode,n_down,n_up,n_mid,feasible,"
    "demand_total_kbps,eta,gamma,f_ctrl,d_bits,t_ref_s";

inline std::string format_timeline_row(const ModeTimelineRow& r) {
  using csv_detail::fmt6;
  std::ostringstream os;
  os << r.t_ms << ',' << fmt6(r.est.rate_tx) << ',' << fmt6(r.est.rate_rx)
     << ',' << fmt6(r.est.rate_tx_smooth) << ',' << fmt6(r.est.rate_rx_smooth)
     << ',' << fmt6(r.est.loss_ratio) << ',' << fmt6(r.est.goodput) << ','
     << fmt6(r.est.capacity) << ',' << to_string(r.mode) << ',' << r.n_down
     << ',' << r.n_up << ',' << r.n_mid << ',' << (r.feasible ? 1 : 0) << ','
     << fmt6(r.demand_total) << ',' << fmt6(r.eta) << ',' << fmt6(r.gamma)
     << ',' << fmt6(r.f_ctrl) << ',' << fmt6(r.d_bits) << ','
     << fmt6(r.t_ref);
  return os.str();
}

inline std::string render_timeline_csv(const Provenance& prov,
                                       const std::vector<ModeTimelineRow>& rows) {
  std::string out = prov.header();
  out += std::string(kTimelineHeader) + "\n";
  for (const auto& r : rows) out += format_timeline_row(r) + "\n";
  return out;
}

inline constexpr const char* kSwitchHeader =
    "decide_ms,complete_ms,from_mode,to_mode,latency_ms,complete";

inline std::string render_switch_csv(const Provenance& prov,
                                     const std::vector<SwitchRecord>& switches) {
  std::string out = prov.header();
  out += std::string(kSwitchHeader) + "\n";
  for (const auto& s : switches) {
    std::ostringstream os;
    os << std::llround(s.decide_t * 1000.0) << ',';
    if (s.complete)
      os << std::llround(s.complete_t * 1000.0);
    os << ',' << to_string(s.from_mode) << ',' << to_string(s.to_mode) << ',';
    if (s.complete)
      os << csv_detail::fmt3(s.latency() * 1000.0);
    os << ',' << (s.complete ? 1 : 0);
    out += os.str() + "\n";
  }
  return out;
}

}  // namespace vcsim
