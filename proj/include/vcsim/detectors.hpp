#pragma once
// Post-processing detectors over a logged session timeline: video freezes,
// audio dropouts, mode-switch handover latency, synthesis pipeline latency,
// and recovery time after bandwidth drops.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vcsim/controller.hpp"

namespace vcsim {

struct FreezeDetectorConfig {
  double t_freeze = 0.5;  // seconds without frame progress counted as frozen

  void validate() const {
    if (!(t_freeze > 0.0))
      throw std::invalid_argument("freeze.t_freeze: must be > 0");
  }
};

struct FreezeStats {
  int count = 0;
  double total = 0.0;  // seconds; the full gap counts once it exceeds t_freeze
  double ratio = 0.0;  // total / window
};

// Render timestamps are relative to the window start; the window edges act
// as boundaries, so a fully frame-less active window is one freeze of the
// whole window.
inline FreezeStats detect_freezes(std::span<const double> render_ts,
                                  const FreezeDetectorConfig& cfg,
                                  double window) {
  cfg.validate();
  if (!(window > 0.0))
    throw std::invalid_argument("freeze window: must be > 0");
  FreezeStats stats;
  double prev = 0.0;
  auto account = [&](double gap) {
    if (gap > cfg.t_freeze) {
      ++stats.count;
      stats.total += gap;
    }
  };
  for (double t : render_ts) {
    if (t < prev)
      throw std::invalid_argument("render timestamps: must be non-decreasing");
    account(t - prev);
    prev = t;
  }
  account(window - prev);
  stats.ratio = stats.total / window;
  return stats;
}

// Sums inter-arrival gaps that exceed the threshold; cadence documents the
// stream's nominal spacing and bounds the threshold from below.
inline double detect_audio_dropouts(std::span<const double> arrivals,
                                    double cadence, double gap_threshold) {
  const double threshold = std::max(gap_threshold, cadence);
  double total = 0.0;
  for (std::size_t i = 1; i < arrivals.size(); ++i) {
    if (arrivals[i] < arrivals[i - 1])
      throw std::invalid_argument("audio arrivals: must be sorted");
    const double gap = arrivals[i] - arrivals[i - 1];
    if (gap > threshold) total += gap;
  }
  return total;
}

struct RenderedFrame {
  double t = 0.0;
  Mode mode = Mode::Normal;
};

struct ModeSwitchEvent {
  double decide_t = 0.0;
  Mode from = Mode::Normal;
  Mode to = Mode::Normal;
};

struct SwitchRecord {
  double decide_t = 0.0;
  double complete_t = 0.0;  // valid only when complete
  Mode from_mode = Mode::Normal;
  Mode to_mode = Mode::Normal;
  bool complete = false;
  double latency() const { return complete_t - decide_t; }
};

// Handover latency: decide_t is the controller decision; complete_t is the
// render time of the first new-mode frame after which frames continue
// gap-free (no gap above gap_tol) for stability_window seconds.  Switches
// whose stability window runs past the trace end are recorded incomplete.
inline std::vector<SwitchRecord> measure_handover(
    std::span<const ModeSwitchEvent> switches,
    std::span<const RenderedFrame> frames, double trace_end,
    double stability_window = 1.0, double gap_tol = 0.5) {
  std::vector<SwitchRecord> out;
  out.reserve(switches.size());
  for (const auto& sw : switches) {
    SwitchRecord rec;
    rec.decide_t = sw.decide_t;
    rec.from_mode = sw.from;
    rec.to_mode = sw.to;

    auto it = std::lower_bound(
        frames.begin(), frames.end(), sw.decide_t,
        [](const RenderedFrame& f, double t) { return f.t < t; });
    for (; it != frames.end() && !rec.complete; ++it) {
      if (it->mode != sw.to) continue;
      const double start = it->t;
      const double horizon = start + stability_window;
      if (horizon > trace_end) break;  // cannot verify stability
      bool stable = true;
      double prev = start;
      for (auto jt = std::next(it); stable && prev < horizon; ++jt) {
        if (jt == frames.end() || jt->mode != sw.to) {
          stable = prev >= horizon;
          break;
        }
        if (jt->t - prev > gap_tol && prev < horizon) stable = false;
        prev = jt->t;
      }
      if (stable && prev < horizon) stable = false;
      if (stable) {
        rec.complete = true;
        rec.complete_t = start;
      }
    }
    out.push_back(rec);
  }
  return out;
}

struct SynthPipelineModel {
  double capture_delay = 0.02;           // seconds
  double request_response_delay = 0.05;  // network to/from the synth service
  double inference_delay = 0.15;
  double render_delay = 0.03;

  double total() const {
    return capture_delay + request_response_delay + inference_delay +
           render_delay;
  }

  void validate() const {
    if (capture_delay < 0.0 || request_response_delay < 0.0 ||
        inference_delay < 0.0 || render_delay < 0.0)
      throw std::invalid_argument("synth delays: must be >= 0");
  }
};

struct ChunkTiming {
  double t_cap = 0.0;
  double t_req = 0.0;
  double t_resp = 0.0;
  double t_play = 0.0;
};

struct SynthLatency {
  double total = 0.0;      // t_play - t_cap
  double capture = 0.0;    // t_req - t_cap
  double transport = 0.0;  // request/response share of t_resp - t_req
  double inference = 0.0;  // compute share of t_resp - t_req
  double render = 0.0;     // t_play - t_resp
};

struct SynthLatencyReport {
  std::vector<SynthLatency> chunks;
  std::size_t rejected = 0;  // non-monotone chunk timings
};

// Per-chunk end-to-end synthesis delay with a component breakdown; the
// request/response leg is split into transport and inference using the
// model's nominal inference time.
inline SynthLatencyReport measure_synthesis_latency(
    std::span<const ChunkTiming> chunks, const SynthPipelineModel& model) {
  SynthLatencyReport report;
  for (const auto& c : chunks) {
    if (!(c.t_cap <= c.t_req && c.t_req <= c.t_resp && c.t_resp <= c.t_play)) {
      ++report.rejected;
      continue;
    }
    SynthLatency s;
    s.total = c.t_play - c.t_cap;
    s.capture = c.t_req - c.t_cap;
    const double mid = c.t_resp - c.t_req;
    s.inference = std::min(model.inference_delay, mid);
    s.transport = mid - s.inference;
    s.render = c.t_play - c.t_resp;
    report.chunks.push_back(s);
  }
  return report;
}

struct RecoveryResult {
  double drop_t = 0.0;
  std::optional<double> recovery;  // seconds; nullopt = not achieved in trace
};

// Recovery after a capacity drop: the time until the operated demand has
// been feasible for n_stable consecutive samples.  The feasible run may
// straddle the drop, so a drop that never breaks feasibility recovers in 0.
inline std::vector<RecoveryResult> measure_recovery(
    std::span<const double> drop_times, std::span<const double> ts,
    std::span<const double> capacity, std::span<const double> demand_total,
    int n_stable) {
  if (ts.size() != capacity.size() || ts.size() != demand_total.size())
    throw std::invalid_argument("recovery series: length mismatch");
  if (n_stable < 1) throw std::invalid_argument("n_stable: must be >= 1");

  std::vector<int> run(ts.size(), 0);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const bool ok = demand_total[i] <= capacity[i];
    run[i] = ok ? (i > 0 ? run[i - 1] + 1 : 1) : 0;
  }

  std::vector<RecoveryResult> out;
  out.reserve(drop_times.size());
  for (double drop : drop_times) {
    RecoveryResult r{drop, std::nullopt};
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i] < drop) continue;
      if (run[i] >= n_stable) {
        r.recovery = std::max(0.0, ts[i] - drop);
        break;
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace vcsim
