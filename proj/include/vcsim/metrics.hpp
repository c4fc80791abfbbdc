#pragma once
// Summary statistics over logged series and the two result tables:
// bandwidth/data-usage and per-mode jitter/RTT/freeze quality.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vcsim {

struct SeriesSummary {
  double mean = 0.0;
  double median = 0.0;  // lower-of-two-middles for even n
  double p95 = 0.0;     // nearest-rank: ceil(0.95 n)-th order statistic
  std::size_t n = 0;
};

inline SeriesSummary summarize(std::span<const double> series) {
  if (series.empty())
    throw std::invalid_argument("summarize: series must be non-empty");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  SeriesSummary s;
  s.n = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  s.median = sorted[(s.n - 1) / 2];
  const std::size_t rank =
      static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(s.n)));
  s.p95 = sorted[rank - 1];
  return s;
}

// Data volumes in decimal gigabytes (1 GB = 1e9 bytes).  Table-style
// reports label the column GB and carry a footnote; volumes are linear in
// duration by construction.
struct DataVolume {
  double gb_per_hour = 0.0;
  double gb = 0.0;  // for the requested duration

  double gb_for(double seconds) const { return gb_per_hour * seconds / 3600.0; }
};

inline DataVolume data_volume(double mean_total_kbps, double duration_s) {
  if (mean_total_kbps < 0.0 || duration_s < 0.0)
    throw std::invalid_argument("data_volume: inputs must be >= 0");
  DataVolume v;
  v.gb_per_hour = mean_total_kbps * 1000.0 / 8.0 * 3600.0 / 1e9;
  v.gb = v.gb_per_hour * duration_s / 3600.0;
  return v;
}

// One per-tick quality observation tagged with the active mode.
struct QualitySample {
  std::string mode;
  double audio_jitter_ms = 0.0;
  double video_jitter_ms = 0.0;
  double rtt_ms = 0.0;
};

struct FreezeEvent {
  std::string mode;
  double t = 0.0;
};

struct QualityRow {
  std::string mode;
  double audio_jitter_ms = 0.0;  // mean
  double video_jitter_ms = 0.0;  // mean
  double rtt_ms = 0.0;           // mean
  long freeze_count = 0;
};

inline std::vector<QualityRow> aggregate_quality(
    std::span<const QualitySample> samples,
    std::span<const FreezeEvent> freezes) {
  struct Acc {
    double aj = 0, vj = 0, rtt = 0;
    long n = 0;
    long freezes = 0;
  };
  std::map<std::string, Acc> by_mode;  // ordered by mode name
  for (const auto& s : samples) {
    Acc& a = by_mode[s.mode];
    a.aj += s.audio_jitter_ms;
    a.vj += s.video_jitter_ms;
    a.rtt += s.rtt_ms;
    ++a.n;
  }
  for (const auto& f : freezes) ++by_mode[f.mode].freezes;
  std::vector<QualityRow> rows;
  for (const auto& [mode, a] : by_mode) {
    QualityRow r;
    r.mode = mode;
    if (a.n > 0) {
      r.audio_jitter_ms = a.aj / a.n;
      r.video_jitter_ms = a.vj / a.n;
      r.rtt_ms = a.rtt / a.n;
    }
    r.freeze_count = a.freezes;
    rows.push_back(r);
  }
  return rows;
}

struct BandwidthRow {
  std::string mode;
  double uplink_mean = 0.0;
  double downlink_mean = 0.0;
  double total_mean = 0.0;
  double total_median = 0.0;
  double total_p95 = 0.0;
  double gb_per_hour = 0.0;
  double gb_5h = 0.0;
};

inline BandwidthRow make_bandwidth_row(const std::string& mode,
                                       const SeriesSummary& uplink,
                                       const SeriesSummary& downlink,
                                       const SeriesSummary& total) {
  BandwidthRow r;
  r.mode = mode;
  r.uplink_mean = uplink.mean;
  r.downlink_mean = downlink.mean;
  r.total_mean = total.mean;
  r.total_median = total.median;
  r.total_p95 = total.p95;
  const DataVolume v = data_volume(total.mean, 3600.0);
  r.gb_per_hour = v.gb_per_hour;
  r.gb_5h = v.gb_for(5.0 * 3600.0);
  return r;
}

struct ReportDocument {
  std::string human;                                      // fixed-layout text
  std::vector<std::pair<std::string, std::string>> kv;    // machine-readable
};

namespace detail {

inline std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

// Renders both tables.  Column set and order are fixed; rows are sorted by
// mode name; the layout is pinned by golden-file tests.
inline ReportDocument render_report(std::vector<BandwidthRow> bandwidth,
                                    std::vector<QualityRow> quality) {
  using detail::fmt;
  using detail::pad_left;
  using detail::pad_right;

  std::sort(bandwidth.begin(), bandwidth.end(),
            [](const BandwidthRow& a, const BandwidthRow& b) {
              return a.mode < b.mode;
            });
  std::sort(quality.begin(), quality.end(),
            [](const QualityRow& a, const QualityRow& b) {
              return a.mode < b.mode;
            });

  ReportDocument doc;
  std::string& out = doc.human;
  out += "Bandwidth and data usage\n";
  out += pad_right("Mode", 14) + pad_left("Uplink", 10) +
         pad_left("Downlink", 10) + pad_left("Total", 10) +
         pad_left("Total", 10) + pad_left("Total", 10) +
         pad_left("Data/hour", 11) + pad_left("Data/5h", 11) + "\n";
  out += pad_right("", 14) + pad_left("Mean", 10) + pad_left("Mean", 10) +
         pad_left("Mean", 10) + pad_left("Median", 10) + pad_left("p95", 10) +
         pad_left("(GB)", 11) + pad_left("(GB)", 11) + "\n";
  out += pad_right("", 14) + pad_left("(kbps)", 10) + pad_left("(kbps)", 10) +
         pad_left("(kbps)", 10) + pad_left("(kbps)", 10) +
         pad_left("(kbps)", 10) + "\n";
  out += std::string(86, '-') + "\n";
  for (const auto& r : bandwidth) {
    out += pad_right(r.mode, 14) + pad_left(fmt(r.uplink_mean, 2), 10) +
           pad_left(fmt(r.downlink_mean, 2), 10) +
           pad_left(fmt(r.total_mean, 2), 10) +
           pad_left(fmt(r.total_median, 2), 10) +
           pad_left(fmt(r.total_p95, 2), 10) +
           pad_left(fmt(r.gb_per_hour, 2), 11) +
           pad_left(fmt(r.gb_5h, 2), 11) + "\n";
  }
  out += "Data volumes are decimal GB (1e9 bytes).\n";
  out += "\n";
  out += "Audio/Video jitter, RTT, and freeze count\n";
  if (quality.empty()) {
    out += "(no quality samples)\n";
  } else {
    out += pad_right("Mode", 14) + pad_left("Audio Jitter (ms)", 19) +
           pad_left("Video Jitter (ms)", 19) + pad_left("RTT (ms)", 10) +
           pad_left("Freeze", 8) + "\n";
    out += std::string(70, '-') + "\n";
    for (const auto& r : quality) {
      out += pad_right(r.mode, 14) + pad_left(fmt(r.audio_jitter_ms, 3), 19) +
             pad_left(fmt(r.video_jitter_ms, 3), 19) +
             pad_left(fmt(r.rtt_ms, 3), 10) +
             pad_left(std::to_string(r.freeze_count), 8) + "\n";
    }
  }

  for (const auto& r : bandwidth) {
    const std::string p = "bandwidth." + r.mode + ".";
    doc.kv.emplace_back(p + "uplink_mean_kbps", fmt(r.uplink_mean, 6));
    doc.kv.emplace_back(p + "downlink_mean_kbps", fmt(r.downlink_mean, 6));
    doc.kv.emplace_back(p + "total_mean_kbps", fmt(r.total_mean, 6));
    doc.kv.emplace_back(p + "total_median_kbps", fmt(r.total_median, 6));
    doc.kv.emplace_back(p + "total_p95_kbps", fmt(r.total_p95, 6));
    doc.kv.emplace_back(p + "gb_per_hour", fmt(r.gb_per_hour, 6));
    doc.kv.emplace_back(p + "gb_5h", fmt(r.gb_5h, 6));
  }
  for (const auto& r : quality) {
    const std::string p = "quality." + r.mode + ".";
    doc.kv.emplace_back(p + "audio_jitter_ms", fmt(r.audio_jitter_ms, 6));
    doc.kv.emplace_back(p + "video_jitter_ms", fmt(r.video_jitter_ms, 6));
    doc.kv.emplace_back(p + "rtt_ms", fmt(r.rtt_ms, 6));
    doc.kv.emplace_back(p + "freeze_count", std::to_string(r.freeze_count));
  }
  return doc;
}

}  // namespace vcsim
