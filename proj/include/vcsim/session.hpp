#pragma once
// Simulated two-endpoint call.  The local endpoint sends mode-dependent
// traffic through the impaired uplink, the peer mirrors the mode and sends
// back through the downlink, and the local controller is driven purely by
// the counters an endpoint could observe.  Every tick logs one telemetry
// row and one mode-timeline row; detectors run over the logged series.
//
// The controller consumes the quantized values that go into the telemetry
// CSV, so replaying that CSV through the same estimator and controller
// reproduces the mode timeline byte for byte.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "vcsim/controller.hpp"
#include "vcsim/csv.hpp"
#include "vcsim/detectors.hpp"
#include "vcsim/metrics.hpp"
#include "vcsim/netsim.hpp"
#include "vcsim/scenario.hpp"
#include "vcsim/telemetry.hpp"
#include "vcsim/traffic.hpp"

namespace vcsim {

struct FlowStats {
  long sent = 0;
  long delivered = 0;
  long lost = 0;
  long dropped = 0;
};

struct SessionReport {
  std::string tool = std::string(kToolName) + " " + kVersion;
  std::string rng_algorithm = kRngAlgorithm;
  std::string config_hash;
  std::string resolved_config;
  std::uint64_t seed = 0;
  double duration = 0.0;
  double warm_up = 0.0;
  double eval_window = 0.0;

  std::vector<TelemetryCsvRow> telemetry;
  std::vector<ModeTimelineRow> timeline;
  std::vector<SwitchRecord> switches;
  std::vector<RenderedFrame> frames;    // local stream as rendered at the peer
  std::vector<double> audio_arrivals;  // local audio at the peer

  FreezeStats freeze;  // evaluation window
  double audio_dropout_s = 0.0;
  std::vector<QualityRow> quality;
  std::vector<BandwidthRow> bandwidth;  // one row per operated mode
  std::vector<RecoveryResult> recoveries;
  SynthLatencyReport synth;
  std::array<FlowStats, 4> uplink_flows;  // indexed by PacketKind

  Provenance provenance() const {
    Provenance p;
    p.seed = seed;
    p.rng = rng_algorithm;
    p.config_hash = config_hash;
    return p;
  }
};

namespace session_detail {

struct EventAfter {
  bool operator()(const DeliveryEvent& a, const DeliveryEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.packet.flow != b.packet.flow) return a.packet.flow > b.packet.flow;
    return a.packet.id > b.packet.id;
  }
};

using EventQueue =
    std::priority_queue<DeliveryEvent, std::vector<DeliveryEvent>, EventAfter>;

// One direction of the call: a single link, or two store-and-forward legs
// when routed through the SFU hop.
class Path {
 public:
  Path(const ImpairmentProfile& leg1, std::optional<ImpairmentProfile> leg2,
       const std::string& label)
      : leg1_(leg1, label + ".leg1") {
    if (leg2) leg2_.emplace(*leg2, label + ".leg2");
  }

  void push(const Packet& p) { leg1_.push(p); }

  // Service both legs up to t; completed events land in `out` (unordered).
  void advance(double t, std::vector<DeliveryEvent>& out) {
    leg1_.flush_until(t);
    route_leg1(leg1_.take_events(), out);
    if (leg2_) {
      forward_until(t, out);
      leg2_->flush_until(t);
      append(leg2_->take_events(), out);
    }
  }

  void drain(std::vector<DeliveryEvent>& out) {
    leg1_.drain();
    route_leg1(leg1_.take_events(), out);
    if (leg2_) {
      forward_until(std::numeric_limits<double>::max(), out);
      leg2_->drain();
      append(leg2_->take_events(), out);
    }
  }

  double max_transit() const {
    double m = leg1_.profile().max_transit();
    if (leg2_) m += leg2_->profile().max_transit();
    return m;
  }

 private:
  void route_leg1(std::vector<DeliveryEvent> events,
                  std::vector<DeliveryEvent>& out) {
    for (auto& ev : events) {
      if (!leg2_) {
        out.push_back(std::move(ev));
      } else if (ev.outcome == Outcome::Delivered) {
        pending_.push(std::move(ev));  // enters leg 2 at its arrival time
      } else {
        out.push_back(std::move(ev));  // lost on leg 1 is final
      }
    }
  }

  void forward_until(double t, std::vector<DeliveryEvent>&) {
    while (!pending_.empty() && pending_.top().time <= t) {
      DeliveryEvent ev = pending_.top();
      pending_.pop();
      Packet p = ev.packet;
      p.send_t = ev.time;
      leg2_->push(p);
    }
  }

  static void append(std::vector<DeliveryEvent> events,
                     std::vector<DeliveryEvent>& out) {
    for (auto& ev : events) out.push_back(std::move(ev));
  }

  Link leg1_;
  std::optional<Link> leg2_;
  EventQueue pending_;
};

// RFC 3550 style interarrival jitter, in seconds.
class JitterEstimator {
 public:
  void observe(double send_t, double arrive_t) {
    if (has_prev_) {
      const double d = (arrive_t - prev_arrive_) - (send_t - prev_send_);
      jitter_ += (std::abs(d) - jitter_) / 16.0;
    }
    prev_send_ = send_t;
    prev_arrive_ = arrive_t;
    has_prev_ = true;
  }
  double value() const { return jitter_; }

 private:
  double jitter_ = 0.0;
  double prev_send_ = 0.0;
  double prev_arrive_ = 0.0;
  bool has_prev_ = false;
};

struct FrameProgress {
  int expected = 0;
  int seen = 0;
  int failed = 0;
  double last_arrival = 0.0;
  Mode mode = Mode::Normal;
};

inline ImpairmentProfile clean_leg(double delay, std::uint64_t seed) {
  ImpairmentProfile p;
  p.seed = seed;
  ProfileSegment seg;
  seg.start_t = 0.0;
  seg.cap = 1e6;  // effectively unconstrained forwarding
  seg.delay = delay;
  p.segments.push_back(seg);
  return p;
}

// The peer mirrors the local mode; its return path carries plain audio in
// the reconstruction modes (the peer does not synthesize).
inline RateDemand peer_demand(Mode mode, const ControllerConfig& knobs,
                              const PeerConfig& peer) {
  switch (mode) {
    case Mode::Normal:
      return make_demand(peer.audio_rate, peer.video_rate_normal, 0.0, 0.0);
    case Mode::LowBitrate:
      return make_demand(
          peer.audio_rate,
          knobs.eta * knobs.eta * knobs.gamma * peer.video_rate_normal, 0.0,
          0.0);
    case Mode::AI:
    case Mode::AudioOnly:
      return make_demand(peer.audio_rate, 0.0, 0.0, 0.0);
  }
  return make_demand(peer.audio_rate, 0.0, 0.0, 0.0);
}

}  // namespace session_detail

class Session {
 public:
  explicit Session(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  SessionReport run() {
    using namespace session_detail;
    const double dt = cfg_.estimator.delta_t;
    const int ticks = static_cast<int>(std::ceil(cfg_.duration / dt));

    SessionReport report;
    report.seed = cfg_.seed;
    report.duration = cfg_.duration;
    report.warm_up = cfg_.warm_up;
    report.eval_window = cfg_.duration - cfg_.warm_up;
    report.resolved_config = canonical_text(cfg_);
    report.config_hash = config_hash_hex(report.resolved_config);

    const bool sfu = cfg_.topology == Topology::Sfu;
    Path uplink(cfg_.uplink_profile,
                sfu ? std::optional(cfg_.sfu.uplink_leg2.value_or(
                          clean_leg(cfg_.sfu.forward_delay, cfg_.seed)))
                    : std::nullopt,
                "uplink");
    Path downlink(sfu ? cfg_.sfu.downlink_leg1.value_or(
                            clean_leg(cfg_.sfu.forward_delay, cfg_.seed))
                      : cfg_.downlink_profile,
                  sfu ? std::optional(cfg_.downlink_profile) : std::nullopt,
                  "downlink");

    EndpointTraffic local(0, cfg_.mtu, cfg_.video_fps);
    EndpointTraffic peer(10, cfg_.mtu, cfg_.video_fps);

    RateEstimator estimator(cfg_.estimator);
    ModeController controller(cfg_.controller, Mode::Normal);

    // Initial operating point: Normal at configured defaults.
    Mode operated = Mode::Normal;
    ControllerConfig knobs = cfg_.controller;
    local.apply(operated, demand_for(operated, knobs), knobs, 0.0);
    peer.apply(operated, peer_demand(operated, knobs, cfg_.peer), knobs, 0.0);

    // Counter state (local endpoint's view).
    std::int64_t bytes_tx = 0, bytes_rx = 0, pkts_lost = 0, pkts_recv = 0;
    double rtt_up = cfg_.uplink_profile.segments.front().delay;
    double rtt_down = cfg_.downlink_profile.segments.front().delay;
    if (sfu) rtt_up += cfg_.sfu.forward_delay, rtt_down += cfg_.sfu.forward_delay;
    JitterEstimator jitter_all, jitter_audio, jitter_video, jitter_control;

    EventQueue up_events, down_events;
    std::map<std::int64_t, FrameProgress> frames_in_flight;
    std::vector<ModeSwitchEvent> switch_events;
    std::vector<double> ai_entries;  // chunker epochs
    double ai_epoch = -1.0, ai_epoch_end = -1.0;
    std::int64_t next_chunk = 0;
    std::deque<std::pair<double, double>> gate_arrivals;  // send_t, arrive_t
    std::vector<ChunkTiming> chunk_timings;
    const double chunk_horizon = uplink.max_transit() + 1.0;

    std::vector<Packet> scratch;

    auto register_video_frames = [&](const std::vector<Packet>& pkts,
                                     Mode mode) {
      for (const auto& p : pkts) {
        if (p.kind != PacketKind::Video || p.flow >= 10) continue;
        auto& fp = frames_in_flight[p.frame];
        ++fp.expected;
        fp.mode = mode;
      }
    };

    auto process_ai_chunks = [&](double safe_until) {
      while (ai_epoch >= 0.0) {
        const double c_k = ai_epoch + (next_chunk + 1) / cfg_.synth_fps;
        if (ai_epoch_end >= 0.0 && c_k > ai_epoch_end) {
          ai_epoch = -1.0;  // epoch closed, no further chunks
          break;
        }
        if (c_k > safe_until) break;
        ++next_chunk;
        double watermark = -1.0;
        bool live = false;
        for (const auto& [send_t, arrive_t] : gate_arrivals) {
          if (send_t > c_k) continue;
          watermark = std::max(watermark, arrive_t);
          if (send_t > c_k - cfg_.synth_stall_window) live = true;
        }
        while (!gate_arrivals.empty() &&
               gate_arrivals.front().first < c_k - cfg_.synth_stall_window - 1.0)
          gate_arrivals.pop_front();
        if (!live) continue;  // stream stalled: no synthetic frame
        ChunkTiming ct;
        ct.t_cap = std::max(c_k, watermark);
        ct.t_req = ct.t_cap + cfg_.synth.capture_delay;
        ct.t_resp = ct.t_req + cfg_.synth.request_response_delay +
                    cfg_.synth.inference_delay;
        ct.t_play = ct.t_resp + cfg_.synth.render_delay;
        chunk_timings.push_back(ct);
        report.frames.push_back({ct.t_play, Mode::AI});
      }
    };

    auto handle_uplink_event = [&](const DeliveryEvent& ev) {
      const auto kind = ev.packet.kind;
      auto& fs = report.uplink_flows[static_cast<int>(kind)];
      if (ev.outcome == Outcome::Delivered) {
        ++fs.delivered;
        ++pkts_recv;
        rtt_up_acc_ += ev.time - ev.packet.send_t;
        ++rtt_up_n_;
        jitter_all.observe(ev.packet.send_t, ev.time);
        switch (kind) {
          case PacketKind::Audio:
            jitter_audio.observe(ev.packet.send_t, ev.time);
            report.audio_arrivals.push_back(ev.time);
            gate_arrivals.emplace_back(ev.packet.send_t, ev.time);
            break;
          case PacketKind::Video: {
            jitter_video.observe(ev.packet.send_t, ev.time);
            auto it = frames_in_flight.find(ev.packet.frame);
            if (it != frames_in_flight.end()) {
              auto& fp = it->second;
              ++fp.seen;
              fp.last_arrival = std::max(fp.last_arrival, ev.time);
              if (fp.seen == fp.expected && fp.failed == 0) {
                report.frames.push_back({fp.last_arrival, fp.mode});
                frames_in_flight.erase(it);
              } else if (fp.seen + fp.failed == fp.expected) {
                frames_in_flight.erase(it);  // frame incomplete, not rendered
              }
            }
            break;
          }
          case PacketKind::Control:
            jitter_control.observe(ev.packet.send_t, ev.time);
            gate_arrivals.emplace_back(ev.packet.send_t, ev.time);
            break;
          case PacketKind::Reference:
            break;
        }
      } else {
        ++pkts_lost;
        if (ev.outcome == Outcome::Lost) ++fs.lost;
        else ++fs.dropped;
        if (kind == PacketKind::Video) {
          auto it = frames_in_flight.find(ev.packet.frame);
          if (it != frames_in_flight.end()) {
            auto& fp = it->second;
            ++fp.failed;
            if (fp.seen + fp.failed == fp.expected) frames_in_flight.erase(it);
          }
        }
      }
    };

    auto handle_downlink_event = [&](const DeliveryEvent& ev) {
      if (ev.outcome != Outcome::Delivered) return;
      bytes_rx += ev.packet.size;
      rtt_down_acc_ += ev.time - ev.packet.send_t;
      ++rtt_down_n_;
    };

    std::vector<DeliveryEvent> batch;
    for (int k = 1; k <= ticks; ++k) {
      const double t_k = std::min(k * dt, cfg_.duration);
      const double window_end = t_k;

      scratch.clear();
      local.generate(window_end, scratch);
      register_video_frames(scratch, operated);
      std::stable_sort(scratch.begin(), scratch.end(),
                       [](const Packet& a, const Packet& b) {
                         if (a.send_t != b.send_t) return a.send_t < b.send_t;
                         if (a.flow != b.flow) return a.flow < b.flow;
                         return a.id < b.id;
                       });
      for (const auto& p : scratch) {
        ++report.uplink_flows[static_cast<int>(p.kind)].sent;
        bytes_tx += p.size;
        uplink.push(p);
      }

      scratch.clear();
      peer.generate(window_end, scratch);
      std::stable_sort(scratch.begin(), scratch.end(),
                       [](const Packet& a, const Packet& b) {
                         if (a.send_t != b.send_t) return a.send_t < b.send_t;
                         if (a.flow != b.flow) return a.flow < b.flow;
                         return a.id < b.id;
                       });
      for (const auto& p : scratch) downlink.push(p);

      batch.clear();
      uplink.advance(t_k, batch);
      for (auto& ev : batch) up_events.push(std::move(ev));
      batch.clear();
      downlink.advance(t_k, batch);
      for (auto& ev : batch) down_events.push(std::move(ev));

      rtt_up_acc_ = rtt_down_acc_ = 0.0;
      rtt_up_n_ = rtt_down_n_ = 0;
      while (!up_events.empty() && up_events.top().time <= t_k) {
        handle_uplink_event(up_events.top());
        up_events.pop();
      }
      while (!down_events.empty() && down_events.top().time <= t_k) {
        handle_downlink_event(down_events.top());
        down_events.pop();
      }
      if (rtt_up_n_ > 0) rtt_up = rtt_up_acc_ / rtt_up_n_;
      if (rtt_down_n_ > 0) rtt_down = rtt_down_acc_ / rtt_down_n_;

      process_ai_chunks(t_k - chunk_horizon);

      // Telemetry row first; the estimator consumes the quantized values.
      TelemetryCsvRow row;
      row.timestamp_ms = std::llround(t_k * 1000.0);
      row.bytes_sent_cum = bytes_tx;
      row.bytes_received_cum = bytes_rx;
      row.packets_lost_cum = pkts_lost;
      row.packets_received_cum = pkts_recv;
      row.rtt_ms = quantize3((rtt_up + rtt_down) * 1000.0);
      row.jitter_ms = quantize3(jitter_all.value() * 1000.0);
      row.mode_label = to_string(operated);
      report.telemetry.push_back(row);

      const auto est = estimator.push(to_counter_sample(row));
      const ControlDecision decision = controller.step(t_k, est->capacity);

      ModeTimelineRow trow;
      trow.t_ms = row.timestamp_ms;
      trow.est = *est;
      trow.mode = decision.mode;
      trow.n_down = decision.n_down;
      trow.n_up = decision.n_up;
      trow.n_mid = decision.n_mid;
      trow.feasible = decision.feasible_now;
      trow.demand_total = decision.demand.total;
      trow.eta = decision.knobs.eta;
      trow.gamma = decision.knobs.gamma;
      trow.f_ctrl = decision.knobs.f_ctrl;
      trow.d_bits = decision.knobs.d_bits;
      trow.t_ref = decision.knobs.t_ref;
      report.timeline.push_back(trow);

      // Per-tick quality sample for the operated mode.
      quality_samples_.push_back(
          {to_string(operated), quantize3(jitter_audio.value() * 1000.0),
           operated == Mode::AI || operated == Mode::AudioOnly
               ? quantize3(jitter_control.value() * 1000.0)
               : quantize3(jitter_video.value() * 1000.0),
           row.rtt_ms});

      if (decision.switched) {
        switch_events.push_back({t_k, decision.previous_mode, decision.mode});
        if (decision.mode == Mode::AI) {
          ai_epoch = t_k;
          ai_epoch_end = -1.0;
          next_chunk = 0;
          ai_entries.push_back(t_k);
        } else if (decision.previous_mode == Mode::AI) {
          ai_epoch_end = t_k;
        }
      }

      operated = decision.mode;
      knobs = decision.knobs;
      local.apply(operated, decision.demand, knobs, t_k);
      peer.apply(operated, peer_demand(operated, knobs, cfg_.peer), knobs,
                 t_k);
    }

    // Let in-flight traffic land, then finish the lagging chunk pipeline.
    batch.clear();
    uplink.drain(batch);
    for (auto& ev : batch) up_events.push(std::move(ev));
    batch.clear();
    downlink.drain(batch);
    for (auto& ev : batch) down_events.push(std::move(ev));
    while (!up_events.empty()) {
      handle_uplink_event(up_events.top());
      up_events.pop();
    }
    while (!down_events.empty()) {
      handle_downlink_event(down_events.top());
      down_events.pop();
    }
    if (ai_epoch >= 0.0 && ai_epoch_end < 0.0) ai_epoch_end = cfg_.duration;
    process_ai_chunks(cfg_.duration + chunk_horizon);

    std::sort(report.frames.begin(), report.frames.end(),
              [](const RenderedFrame& a, const RenderedFrame& b) {
                return a.t < b.t;
              });
    std::sort(report.audio_arrivals.begin(), report.audio_arrivals.end());

    // frames_rendered_cum is backfilled: synthesis renders lag the tick
    // loop by the pipeline depth, so the column is only known post hoc.
    std::size_t fi = 0;
    for (auto& row : report.telemetry) {
      const double t = static_cast<double>(row.timestamp_ms) / 1000.0;
      while (fi < report.frames.size() && report.frames[fi].t <= t) ++fi;
      row.frames_rendered_cum = static_cast<std::int64_t>(fi);
    }

    finalize_metrics(report, switch_events, chunk_timings);
    return report;
  }

 private:
  void finalize_metrics(SessionReport& report,
                        const std::vector<ModeSwitchEvent>& switch_events,
                        const std::vector<ChunkTiming>& chunk_timings) {
    const double w0 = cfg_.warm_up;
    const double w1 = cfg_.duration;

    // Freeze stats over the evaluation window, frame times re-based to it.
    std::vector<double> eval_frames;
    for (const auto& f : report.frames)
      if (f.t >= w0 && f.t < w1) eval_frames.push_back(f.t - w0);
    report.freeze = detect_freezes(eval_frames, cfg_.freeze, w1 - w0);

    std::vector<double> eval_audio;
    for (double t : report.audio_arrivals)
      if (t >= w0 && t < w1) eval_audio.push_back(t);
    report.audio_dropout_s = detect_audio_dropouts(
        eval_audio, cfg_.audio.cadence, cfg_.audio.gap_threshold);

    report.switches = measure_handover(
        switch_events, report.frames, cfg_.duration,
        cfg_.handover_stability_window, cfg_.freeze.t_freeze);

    report.synth = measure_synthesis_latency(chunk_timings, cfg_.synth);

    // Per-mode rate series from telemetry deltas; interval i is attributed
    // to the mode operated during it (the row's mode_label).
    std::map<std::string, std::vector<double>> up_by_mode, down_by_mode,
        tot_by_mode;
    for (std::size_t i = 1; i < report.telemetry.size(); ++i) {
      const auto& prev = report.telemetry[i - 1];
      const auto& cur = report.telemetry[i];
      const double t = static_cast<double>(cur.timestamp_ms) / 1000.0;
      if (t <= w0) continue;
      const double dt =
          static_cast<double>(cur.timestamp_ms - prev.timestamp_ms) / 1000.0;
      if (dt <= 0.0) continue;
      const double up =
          8.0 * static_cast<double>(cur.bytes_sent_cum - prev.bytes_sent_cum) /
          (1000.0 * dt);
      const double down =
          8.0 *
          static_cast<double>(cur.bytes_received_cum - prev.bytes_received_cum) /
          (1000.0 * dt);
      const std::string mode = cur.mode_label.value_or("normal");
      up_by_mode[mode].push_back(up);
      down_by_mode[mode].push_back(down);
      tot_by_mode[mode].push_back(up + down);
    }
    for (const auto& [mode, tot] : tot_by_mode) {
      report.bandwidth.push_back(make_bandwidth_row(
          mode, summarize(up_by_mode[mode]), summarize(down_by_mode[mode]),
          summarize(tot)));
    }

    // Per-mode freeze counts: segment the frame timeline by operated mode.
    std::vector<FreezeEvent> freeze_events;
    {
      const auto& rows = report.telemetry;
      std::size_t i = 0;
      while (i < rows.size()) {
        std::size_t j = i;
        const std::string mode = rows[i].mode_label.value_or("normal");
        while (j + 1 < rows.size() &&
               rows[j + 1].mode_label.value_or("normal") == mode)
          ++j;
        const double seg_start =
            i == 0 ? 0.0
                   : static_cast<double>(rows[i - 1].timestamp_ms) / 1000.0;
        const double seg_end = static_cast<double>(rows[j].timestamp_ms) / 1000.0;
        const double lo = std::max(seg_start, w0);
        const double hi = std::min(seg_end, w1);
        if (hi - lo > cfg_.freeze.t_freeze) {
          std::vector<double> seg_frames;
          for (const auto& f : report.frames)
            if (f.t >= lo && f.t < hi) seg_frames.push_back(f.t - lo);
          const FreezeStats fs = detect_freezes(seg_frames, cfg_.freeze, hi - lo);
          for (int c = 0; c < fs.count; ++c) freeze_events.push_back({mode, lo});
        }
        i = j + 1;
      }
    }
    std::vector<QualitySample> eval_quality;
    for (std::size_t i = 0; i < quality_samples_.size(); ++i) {
      const double t =
          static_cast<double>(report.telemetry[i].timestamp_ms) / 1000.0;
      if (t > w0) eval_quality.push_back(quality_samples_[i]);
    }
    report.quality = aggregate_quality(eval_quality, freeze_events);

    // Recovery per capacity drop in the uplink profile schedule.
    std::vector<double> drops;
    const auto& segs = cfg_.uplink_profile.segments;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].cap < segs[i - 1].cap) drops.push_back(segs[i].start_t);
    std::vector<double> ts, cap, dem;
    for (const auto& r : report.timeline) {
      ts.push_back(static_cast<double>(r.t_ms) / 1000.0);
      cap.push_back(r.est.capacity);
      dem.push_back(r.demand_total);
    }
    report.recoveries =
        measure_recovery(drops, ts, cap, dem, cfg_.controller.n_stable());
  }

  ScenarioConfig cfg_;
  std::vector<QualitySample> quality_samples_;
  double rtt_up_acc_ = 0.0, rtt_down_acc_ = 0.0;
  int rtt_up_n_ = 0, rtt_down_n_ = 0;
};

inline SessionReport run_session(const ScenarioConfig& cfg) {
  return Session(cfg).run();
}

// Replays recorded counters through the estimator and controller exactly
// as the live path runs them.  Samples the estimator rejects (counter
// resets) are skipped with a diagnostic; the estimator re-initializes from
// the next sample.
struct ReplayResult {
  std::vector<ModeTimelineRow> timeline;
  std::vector<std::string> diagnostics;
  std::size_t rejected = 0;
};

inline ReplayResult replay_rows(const std::vector<TelemetryCsvRow>& rows,
                                const EstimatorConfig& est_cfg,
                                const ControllerConfig& ctrl_cfg) {
  ReplayResult result;
  RateEstimator estimator(est_cfg);
  ModeController controller(ctrl_cfg, Mode::Normal);
  for (const auto& row : rows) {
    const auto est = estimator.push(to_counter_sample(row));
    if (!est) {
      ++result.rejected;
      result.diagnostics.push_back(estimator.last_error());
      continue;
    }
    const ControlDecision d = controller.step(est->t, est->capacity);
    ModeTimelineRow trow;
    trow.t_ms = row.timestamp_ms;
    trow.est = *est;
    trow.mode = d.mode;
    trow.n_down = d.n_down;
    trow.n_up = d.n_up;
    trow.n_mid = d.n_mid;
    trow.feasible = d.feasible_now;
    trow.demand_total = d.demand.total;
    trow.eta = d.knobs.eta;
    trow.gamma = d.knobs.gamma;
    trow.f_ctrl = d.knobs.f_ctrl;
    trow.d_bits = d.knobs.d_bits;
    trow.t_ref = d.knobs.t_ref;
    result.timeline.push_back(trow);
  }
  return result;
}

}  // namespace vcsim
