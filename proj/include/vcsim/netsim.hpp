#pragma once
// Deterministic single-link model: token-bucket rate cap with a bounded
// queue, uniform or two-state (Gilbert-Elliott) packet loss, fixed one-way
// delay plus uniform jitter.  Impairments follow a time-scheduled profile;
// all randomness comes from labeled substreams of one seed, so the loss
// pattern of a run is independent of the jitter parameters.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsim/rng.hpp"

namespace vcsim {

struct LossModel {
  enum class Kind { None, Uniform, Burst };
  Kind kind = Kind::None;
  double p = 0.0;  // Uniform
  // Burst (Gilbert-Elliott): two-state chain advanced per packet.
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 0.0;
  double loss_in_bad = 1.0;
  double loss_in_good = 0.0;

  static LossModel none() { return {}; }
  static LossModel uniform(double p) {
    LossModel m;
    m.kind = Kind::Uniform;
    m.p = p;
    return m;
  }
  static LossModel burst(double g2b, double b2g, double loss_bad,
                         double loss_good) {
    LossModel m;
    m.kind = Kind::Burst;
    m.p_good_to_bad = g2b;
    m.p_bad_to_good = b2g;
    m.loss_in_bad = loss_bad;
    m.loss_in_good = loss_good;
    return m;
  }

  void validate(const std::string& where) const {
    auto prob = [&](double v, const char* name) {
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument(where + "." + name +
                                    ": must be in [0,1]");
    };
    prob(p, "p");
    prob(p_good_to_bad, "p_good_to_bad");
    prob(p_bad_to_good, "p_bad_to_good");
    prob(loss_in_bad, "loss_in_bad");
    prob(loss_in_good, "loss_in_good");
  }
};

struct ProfileSegment {
  double start_t = 0.0;   // seconds
  double cap = 1000.0;    // kbps
  double delay = 0.0;     // fixed one-way delay, seconds
  double jitter_max = 0.0;  // uniform jitter bound, seconds
  LossModel loss;
};

struct ImpairmentProfile {
  std::vector<ProfileSegment> segments;
  std::uint64_t seed = 1;
  double burst_window = 0.1;   // bucket depth = cap * burst_window
  double queue_bound_s = 0.25;  // queue bound in seconds of cap-rate bytes

  void validate(const std::string& where = "profile") const {
    if (segments.empty())
      throw std::invalid_argument(where + ".segments: at least one required");
    if (segments.front().start_t != 0.0)
      throw std::invalid_argument(where + ".segments: first must start at 0");
    double prev = -1.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      const std::string seg = where + ".segment[" + std::to_string(i) + "]";
      if (s.start_t <= prev)
        throw std::invalid_argument(seg + ".start: must be strictly increasing");
      prev = s.start_t;
      if (!(s.cap > 0.0)) throw std::invalid_argument(seg + ".cap: must be > 0");
      if (s.delay < 0.0) throw std::invalid_argument(seg + ".delay: must be >= 0");
      if (s.jitter_max < 0.0)
        throw std::invalid_argument(seg + ".jitter_max: must be >= 0");
      s.loss.validate(seg + ".loss");
    }
    if (!(burst_window > 0.0))
      throw std::invalid_argument(where + ".burst_window: must be > 0");
    if (queue_bound_s < 0.0)
      throw std::invalid_argument(where + ".queue_bound_s: must be >= 0");
  }

  const ProfileSegment& segment_at(double t) const {
    std::size_t i = segments.size();
    while (i > 1 && segments[i - 1].start_t > t) --i;
    return segments[i - 1];
  }

  // Largest delay + jitter over all segments; used by callers that need an
  // upper bound on how late an in-flight packet can still arrive.
  double max_transit() const {
    double m = 0.0;
    for (const auto& s : segments) m = std::max(m, s.delay + s.jitter_max);
    return m + queue_bound_s;
  }
};

enum class PacketKind : std::uint8_t { Audio, Video, Control, Reference };

inline const char* to_string(PacketKind k) {
  switch (k) {
    case PacketKind::Audio: return "audio";
    case PacketKind::Video: return "video";
    case PacketKind::Control: return "control";
    case PacketKind::Reference: return "reference";
  }
  return "?";
}

// Audio survives congestion first; video is evicted first.  Mirrors how a
// real pacer prioritizes flows sharing one uplink.
inline int drop_priority(PacketKind k) {
  switch (k) {
    case PacketKind::Audio: return 3;
    case PacketKind::Control: return 2;
    case PacketKind::Reference: return 1;
    case PacketKind::Video: return 0;
  }
  return 0;
}

struct Packet {
  std::uint64_t id = 0;  // strictly increasing per flow
  std::uint32_t flow = 0;
  PacketKind kind = PacketKind::Audio;
  std::int32_t size = 0;  // bytes, > 0
  double send_t = 0.0;
  std::int64_t frame = -1;  // video frame index, -1 for non-video
};

enum class Outcome : std::uint8_t { Delivered, Lost, QueuedDropped };

struct DeliveryEvent {
  Packet packet;
  Outcome outcome = Outcome::Delivered;
  double time = 0.0;  // arrive_t when delivered, else loss/drop time
};

// Per-packet loss decision; the burst chain state lives across segments.
class LossProcess {
 public:
  bool apply(const LossModel& model, Rng& rng) {
    switch (model.kind) {
      case LossModel::Kind::None:
        return false;
      case LossModel::Kind::Uniform:
        return rng.bernoulli(model.p);
      case LossModel::Kind::Burst: {
        const double loss_p = in_bad_ ? model.loss_in_bad : model.loss_in_good;
        const bool lost = rng.bernoulli(loss_p);
        const double flip_p =
            in_bad_ ? model.p_bad_to_good : model.p_good_to_bad;
        if (rng.bernoulli(flip_p)) in_bad_ = !in_bad_;
        return lost;
      }
    }
    return false;
  }

  bool in_bad_state() const { return in_bad_; }

 private:
  bool in_bad_ = false;
};

inline double apply_delay(double wire_t, const ProfileSegment& seg, Rng& rng) {
  double arrive = wire_t + seg.delay;
  if (seg.jitter_max > 0.0) arrive += rng.next_double(seg.jitter_max);
  return arrive;
}

// Streaming link.  push() packets in non-decreasing send_t order; events
// (delivered/lost/dropped) accumulate in events() with event times that
// never precede the time of the flush/push that produced them.
class Link {
 public:
  Link(ImpairmentProfile profile, const std::string& label)
      : profile_(std::move(profile)),
        loss_rng_(profile_.seed, label + ".loss"),
        jitter_rng_(profile_.seed, label + ".jitter") {
    profile_.validate(label.empty() ? "profile" : label);
    clock_ = 0.0;
    tokens_ = bucket_depth(current().cap);
  }

  void push(const Packet& p) {
    if (p.size <= 0) throw std::invalid_argument("packet.size: must be > 0");
    if (p.send_t + 1e-12 < clock_)
      throw std::invalid_argument("packet.send_t: not in send order");
    advance(std::max(p.send_t, clock_));
    if (queue_.empty() && tokens_ >= p.size) {
      tokens_ -= p.size;
      transmit(p, clock_);
      return;
    }
    enqueue(p);
  }

  // Service queued packets up to time t.
  void flush_until(double t) { advance(std::max(t, clock_)); }

  // Service everything left; returns once the queue is empty.
  void drain() { advance(std::numeric_limits<double>::max()); }

  std::vector<DeliveryEvent> take_events() {
    std::vector<DeliveryEvent> out;
    out.swap(events_);
    return out;
  }

  const ImpairmentProfile& profile() const { return profile_; }
  std::size_t queue_depth() const { return queue_.size(); }

 private:
  const ProfileSegment& current() const { return profile_.segment_at(clock_); }

  double bucket_depth(double cap_kbps) const {
    return cap_kbps * 1000.0 / 8.0 * profile_.burst_window;  // bytes
  }
  double queue_bound(double cap_kbps) const {
    return cap_kbps * 1000.0 / 8.0 * profile_.queue_bound_s;  // bytes
  }
  static double rate_bps(double cap_kbps) { return cap_kbps * 1000.0 / 8.0; }

  // Accrue tokens and emit queued departures up to time t.  Token accrual
  // is piecewise across segment boundaries; the bucket saturates at the
  // depth only while the queue is idle.
  void advance(double t) {
    while (clock_ < t) {
      const ProfileSegment& seg = current();
      const double seg_end = next_boundary();
      const double horizon = std::min(t, seg_end);
      if (queue_.empty()) {
        tokens_ = std::min(tokens_ + rate_bps(seg.cap) * (horizon - clock_),
                           bucket_depth(seg.cap));
        clock_ = horizon;
      } else {
        const Packet& head = queue_.front();
        const double need = head.size - tokens_;
        if (need <= 0.0) {
          tokens_ -= head.size;
          Packet p = head;
          queue_.pop_front();
          queue_bytes_ -= p.size;
          transmit(p, clock_);
          continue;
        }
        const double ready = clock_ + need / rate_bps(seg.cap);
        if (ready <= horizon) {
          tokens_ = 0.0;
          clock_ = ready;
          Packet p = queue_.front();
          queue_.pop_front();
          queue_bytes_ -= p.size;
          transmit(p, clock_);
        } else {
          tokens_ += rate_bps(seg.cap) * (horizon - clock_);
          clock_ = horizon;
        }
      }
      if (clock_ >= t) break;
    }
    if (clock_ < t) clock_ = t;
  }

  double next_boundary() const {
    for (const auto& s : profile_.segments)
      if (s.start_t > clock_) return s.start_t;
    return std::numeric_limits<double>::max();
  }

  void enqueue(const Packet& p) {
    const double bound = queue_bound(current().cap);
    double need = queue_bytes_ + p.size - bound;
    // Overflow: evict lowest-priority queued packets (newest first) that
    // rank strictly below the incoming one; otherwise the newcomer drops.
    while (need > 0.0) {
      auto victim = queue_.end();
      int worst = drop_priority(p.kind);
      for (auto it = queue_.rbegin(); it != queue_.rend(); ++it) {
        if (drop_priority(it->kind) < worst) {
          worst = drop_priority(it->kind);
          victim = std::prev(it.base());
        }
      }
      if (victim == queue_.end()) {
        events_.push_back({p, Outcome::QueuedDropped, clock_});
        return;
      }
      need -= victim->size;
      queue_bytes_ -= victim->size;
      events_.push_back({*victim, Outcome::QueuedDropped, clock_});
      queue_.erase(victim);
    }
    queue_bytes_ += p.size;
    queue_.push_back(p);
  }

  // Wire exit: loss stage, then delay + jitter.  Loss and delay parameters
  // follow the segment of the packet's send time; the cap schedule is
  // physical and follows the wire clock.
  void transmit(const Packet& p, double wire_t) {
    const ProfileSegment& seg = profile_.segment_at(p.send_t);
    if (loss_.apply(seg.loss, loss_rng_)) {
      events_.push_back({p, Outcome::Lost, wire_t});
      return;
    }
    events_.push_back({p, Outcome::Delivered, apply_delay(wire_t, seg, jitter_rng_)});
  }

  ImpairmentProfile profile_;
  Rng loss_rng_;
  Rng jitter_rng_;
  LossProcess loss_;
  std::deque<Packet> queue_;
  double queue_bytes_ = 0.0;
  double tokens_ = 0.0;
  double clock_ = 0.0;
  std::vector<DeliveryEvent> events_;
};

// Batch form: runs a whole packet stream through one link and returns the
// events ordered by event time.  Deterministic in (packets, profile).
inline std::vector<DeliveryEvent> run_link(const std::vector<Packet>& packets,
                                           const ImpairmentProfile& profile,
                                           const std::string& label = "link") {
  Link link(profile, label);
  for (const auto& p : packets) link.push(p);
  link.drain();
  auto events = link.take_events();
  std::stable_sort(events.begin(), events.end(),
                   [](const DeliveryEvent& a, const DeliveryEvent& b) {
                     if (a.time != b.time) return a.time < b.time;
                     if (a.packet.flow != b.packet.flow)
                       return a.packet.flow < b.packet.flow;
                     return a.packet.id < b.packet.id;
                   });
  return events;
}

}  // namespace vcsim
