#pragma once
// Mode-dependent packet sources.  Audio is 20 ms CBR, video is a burst of
// MTU-sized packets per frame, control is CBR at the control update rate,
// reference is one burst per refresh period.  Byte accumulators carry
// fractional bytes so the long-run rate matches the demand exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "vcsim/controller.hpp"
#include "vcsim/netsim.hpp"

namespace vcsim {

inline constexpr double kAudioCadence = 0.02;  // seconds between audio packets
inline constexpr int kDefaultMtu = 1200;       // bytes

struct TrafficSource {
  PacketKind kind = PacketKind::Audio;
  double target_rate = 0.0;  // kbps
  int packet_size = 0;       // bytes; 0 = derived from cadence/MTU
  enum class Pattern { Cbr, FrameBurst } pattern = Pattern::Cbr;
  double fps = 0.0;  // FrameBurst only
};

// Emits fixed-cadence packets whose sizes realize the target rate; byte
// remainders carry over between packets.
class CbrStream {
 public:
  CbrStream(std::uint32_t flow, PacketKind kind, double cadence_s)
      : flow_(flow), kind_(kind), cadence_(cadence_s) {}

  void set_rate(double kbps) { rate_ = kbps; }
  // Takes effect from the next packet on; the emission clock never rewinds.
  void set_cadence(double cadence_s) { cadence_ = cadence_s; }
  double rate() const { return rate_; }

  void generate(double until, std::vector<Packet>& out) {
    while (next_t_ < until) {
      carry_ += rate_ * 1000.0 / 8.0 * cadence_;
      const int size = static_cast<int>(carry_);
      if (size >= 1) {
        carry_ -= size;
        out.push_back({next_id_++, flow_, kind_, size, next_t_, -1});
      }
      next_t_ += cadence_;
    }
  }

 private:
  std::uint32_t flow_;
  PacketKind kind_;
  double cadence_;
  double rate_ = 0.0;
  double carry_ = 0.0;
  double next_t_ = 0.0;
  std::uint64_t next_id_ = 0;
};

// One burst of MTU-sized packets per frame.
class FrameBurstStream {
 public:
  FrameBurstStream(std::uint32_t flow, double fps, int mtu)
      : flow_(flow), fps_(fps), mtu_(mtu) {}

  void set_rate(double kbps) { rate_ = kbps; }
  void set_fps(double fps) { fps_ = fps; }
  double rate() const { return rate_; }

  // Frames emitted in [next_t_, until); packets of one frame share send_t.
  void generate(double until, std::vector<Packet>& out) {
    while (next_t_ < until) {
      if (rate_ > 0.0 && fps_ > 0.0) {
        carry_ += rate_ * 1000.0 / 8.0 / fps_;
        int frame_bytes = static_cast<int>(carry_);
        carry_ -= frame_bytes;
        while (frame_bytes > 0) {
          const int size = std::min(frame_bytes, mtu_);
          out.push_back({next_id_++, flow_, PacketKind::Video, size, next_t_,
                         frame_});
          frame_bytes -= size;
        }
        ++frame_;
      }
      next_t_ += fps_ > 0.0 ? 1.0 / fps_ : 0.04;
    }
  }

  std::int64_t next_frame_index() const { return frame_; }

 private:
  std::uint32_t flow_;
  double fps_;
  int mtu_;
  double rate_ = 0.0;
  double carry_ = 0.0;
  double next_t_ = 0.0;
  std::int64_t frame_ = 0;
  std::uint64_t next_id_ = 0;
};

// One s_ref-sized burst at activation and then every t_ref seconds.
class ReferenceStream {
 public:
  ReferenceStream(std::uint32_t flow, int mtu) : flow_(flow), mtu_(mtu) {}

  void arm(double now, double s_ref_bits, double t_ref_s) {
    next_t_ = now;
    bits_ = s_ref_bits;
    period_ = t_ref_s;
    armed_ = bits_ > 0.0 && period_ > 0.0;
  }
  void disarm() { armed_ = false; }

  void generate(double until, std::vector<Packet>& out) {
    while (armed_ && next_t_ < until) {
      int burst_bytes = static_cast<int>(std::llround(bits_ / 8.0));
      while (burst_bytes > 0) {
        const int size = std::min(burst_bytes, mtu_);
        out.push_back(
            {next_id_++, flow_, PacketKind::Reference, size, next_t_, -1});
        burst_bytes -= size;
      }
      next_t_ += period_;
    }
  }

 private:
  std::uint32_t flow_;
  int mtu_;
  double next_t_ = 0.0;
  double bits_ = 0.0;
  double period_ = 0.0;
  bool armed_ = false;
  std::uint64_t next_id_ = 0;
};

// The four flows of one sending endpoint, reconfigured per controller
// decision.  The active flow set follows the mode: AI emits zero video
// packets, Normal/LB emit zero control and reference packets.
class EndpointTraffic {
 public:
  EndpointTraffic(std::uint32_t flow_base, int mtu, double video_fps)
      : audio_(flow_base + 0, PacketKind::Audio, kAudioCadence),
        video_(flow_base + 1, video_fps, mtu),
        control_(flow_base + 2, PacketKind::Control, 0.04),
        reference_(flow_base + 3, mtu),
        base_fps_(video_fps) {}

  // demand carries the adapted per-component rates; knobs carry the control
  // cadence and reference schedule; gamma scales the frame rate in LB.
  void apply(Mode mode, const RateDemand& demand, const ControllerConfig& knobs,
             double now) {
    audio_.set_rate(demand.audio);
    video_.set_rate(demand.video);
    video_.set_fps(mode == Mode::LowBitrate ? base_fps_ * knobs.gamma
                                            : base_fps_);
    control_.set_rate(demand.control);
    if (knobs.f_ctrl > 0.0) control_.set_cadence(1.0 / knobs.f_ctrl);
    if (mode == Mode::AI) {
      if (!ref_armed_) {
        reference_.arm(now, knobs.s_ref, knobs.t_ref);
        ref_armed_ = true;
      }
    } else {
      reference_.disarm();
      ref_armed_ = false;
    }
  }

  void generate(double until, std::vector<Packet>& out) {
    audio_.generate(until, out);
    video_.generate(until, out);
    control_.generate(until, out);
    reference_.generate(until, out);
  }

 private:
  CbrStream audio_;
  FrameBurstStream video_;
  CbrStream control_;
  ReferenceStream reference_;
  double base_fps_;
  bool ref_armed_ = false;
};

// Batch form used by tests and tooling: the packet stream one endpoint
// emits over a fixed window in a fixed mode, sorted by send time.
inline std::vector<Packet> generate_traffic(const RateDemand& demand, Mode mode,
                                            double duration,
                                            const ControllerConfig& knobs,
                                            double video_fps = 25.0,
                                            int mtu = kDefaultMtu) {
  EndpointTraffic traffic(0, mtu, video_fps);
  traffic.apply(mode, demand, knobs, 0.0);
  std::vector<Packet> out;
  traffic.generate(duration, out);
  std::stable_sort(out.begin(), out.end(),
                   [](const Packet& a, const Packet& b) {
                     if (a.send_t != b.send_t) return a.send_t < b.send_t;
                     return a.flow < b.flow;
                   });
  return out;
}

}  // namespace vcsim
