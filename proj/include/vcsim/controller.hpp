#pragma once
// Three-mode hysteresis controller: persistence counters over a capacity
// estimate decide Normal / LowBitrate / AI, per-mode bitrate demand models,
// a feasibility check against the capacity proxy, and knob adaptation
// ladders for the low-bitrate and AI modes.  AudioOnly is entered only
// through the infeasibility fallback ladder, never by hysteresis.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vcsim {

enum class Mode : std::uint8_t { Normal, LowBitrate, AI, AudioOnly };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Normal: return "normal";
    case Mode::LowBitrate: return "low_bitrate";
    case Mode::AI: return "ai";
    case Mode::AudioOnly: return "audio_only";
  }
  return "?";
}

inline bool mode_from_string(const std::string& s, Mode& out) {
  if (s == "normal") out = Mode::Normal;
  else if (s == "low_bitrate") out = Mode::LowBitrate;
  else if (s == "ai") out = Mode::AI;
  else if (s == "audio_only") out = Mode::AudioOnly;
  else return false;
  return true;
}

// Rungs of the fallback ladder, most capable first.
inline int ladder_rank(Mode m) {
  switch (m) {
    case Mode::Normal: return 0;
    case Mode::LowBitrate: return 1;
    case Mode::AI: return 2;
    case Mode::AudioOnly: return 3;
  }
  return 3;
}

struct ControllerConfig {
  double tau_low = 300.0;   // kbps
  double tau_high = 800.0;  // kbps
  double t_stable = 5.0;    // seconds
  double delta_t = 1.0;     // seconds per controller sample
  double audio_rate = 24.0;            // kbps
  double video_rate_normal = 1400.0;   // kbps
  double eta = 1.0;    // spatial scale, (0,1]
  double gamma = 1.0;  // temporal scale, (0,1]
  double f_ctrl = 25.0;   // control updates per second
  double n_desc = 68.0;   // descriptors per control update
  double d_bits = 10.0;   // bits per descriptor
  double s_ref = 400000.0;  // bits per reference update
  double t_ref = 60.0;      // seconds between reference updates

  int n_stable() const {
    return static_cast<int>(std::ceil(t_stable / delta_t));
  }

  void validate() const {
    if (!(tau_low < tau_high))
      throw std::invalid_argument("controller.tau_low: must be < tau_high");
    if (!(t_stable > 0.0))
      throw std::invalid_argument("controller.t_stable: must be > 0");
    if (!(delta_t > 0.0))
      throw std::invalid_argument("controller.delta_t: must be > 0");
    if (!(eta > 0.0 && eta <= 1.0))
      throw std::invalid_argument("controller.eta: must be in (0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw std::invalid_argument("controller.gamma: must be in (0,1]");
    if (audio_rate < 0.0)
      throw std::invalid_argument("controller.audio_rate: must be >= 0");
    if (video_rate_normal < 0.0)
      throw std::invalid_argument("controller.video_rate_normal: must be >= 0");
    if (f_ctrl < 0.0 || n_desc < 0.0 || d_bits < 0.0)
      throw std::invalid_argument(
          "controller.f_ctrl/n_desc/d_bits: must be >= 0");
    if (!(t_ref > 0.0))
      throw std::invalid_argument("controller.t_ref: must be > 0");
    if (s_ref < 0.0)
      throw std::invalid_argument("controller.s_ref: must be >= 0");
  }
};

// Persistence counters.  n_down counts consecutive samples with capacity
// below tau_low, n_up consecutive samples at/above tau_high, n_mid
// consecutive samples in between (the LB-entry counter; the bands are
// disjoint so at most one counter is ever positive).
struct ControllerState {
  Mode mode = Mode::Normal;
  int n_down = 0;
  int n_up = 0;
  int n_mid = 0;
  double last_switch_t = 0.0;
};

struct RateDemand {
  double audio = 0.0;  // kbps
  double video = 0.0;
  double control = 0.0;
  double reference = 0.0;
  double total = 0.0;  // always the exact component sum
};

inline RateDemand make_demand(double audio, double video, double control,
                              double reference) {
  return {audio, video, control, reference,
          audio + video + control + reference};
}

inline ControllerState update_counters(ControllerState state, double capacity,
                                       const ControllerConfig& cfg) {
  if (capacity < cfg.tau_low) {
    ++state.n_down;
    state.n_up = 0;
    state.n_mid = 0;
  } else if (capacity >= cfg.tau_high) {
    state.n_down = 0;
    ++state.n_up;
    state.n_mid = 0;
  } else {
    state.n_down = 0;
    state.n_up = 0;
    ++state.n_mid;
  }
  return state;
}

// Hysteresis decision.  A literal "otherwise -> LB" would force LB on every
// unripe sample and destroy the hysteresis, so LB entry requires its own
// ripened mid-band counter; with no counter ripe the current mode is kept.
inline Mode decide_mode(const ControllerState& state,
                        const ControllerConfig& cfg) {
  const int n_stable = cfg.n_stable();
  if (state.n_down >= n_stable) return Mode::AI;
  if (state.n_up >= n_stable) return Mode::Normal;
  if (state.n_mid >= n_stable) return Mode::LowBitrate;
  return state.mode;
}

inline RateDemand demand_normal(const ControllerConfig& cfg) {
  return make_demand(cfg.audio_rate, cfg.video_rate_normal, 0.0, 0.0);
}

// Video scales with encoded pixels per second: eta^2 for area, gamma for
// frame rate.
inline RateDemand demand_low_bitrate(const ControllerConfig& cfg) {
  return make_demand(cfg.audio_rate,
                     cfg.eta * cfg.eta * cfg.gamma * cfg.video_rate_normal,
                     0.0, 0.0);
}

inline RateDemand demand_ai(const ControllerConfig& cfg) {
  if (!(cfg.t_ref > 0.0))
    throw std::invalid_argument("controller.t_ref: must be > 0");
  return make_demand(cfg.audio_rate, 0.0,
                     cfg.f_ctrl * cfg.n_desc * cfg.d_bits / 1000.0,
                     cfg.s_ref / (1000.0 * cfg.t_ref));
}

inline RateDemand demand_audio_only(const ControllerConfig& cfg) {
  return make_demand(cfg.audio_rate, 0.0, 0.0, 0.0);
}

inline RateDemand demand_for(Mode mode, const ControllerConfig& cfg) {
  switch (mode) {
    case Mode::Normal: return demand_normal(cfg);
    case Mode::LowBitrate: return demand_low_bitrate(cfg);
    case Mode::AI: return demand_ai(cfg);
    case Mode::AudioOnly: return demand_audio_only(cfg);
  }
  return demand_audio_only(cfg);
}

inline bool feasible(const RateDemand& demand, double capacity) {
  return demand.total <= capacity;
}

// Fixed adaptation ladders (descending).
inline constexpr std::array<std::array<double, 2>, 4> kLbLadder = {{
    {0.75, 1.0}, {0.5, 1.0}, {0.5, 0.5}, {0.25, 0.5}}};
inline constexpr std::array<double, 4> kFctrlLadder = {25.0, 15.0, 10.0, 5.0};
inline constexpr std::array<double, 3> kDbitsLadder = {10.0, 8.0, 6.0};
inline constexpr double kTrefCap = 600.0;  // seconds

struct KnobResult {
  ControllerConfig cfg;
  bool needs_fallback = false;
};

// Picks the least aggressive knob setting whose demand fits the capacity.
// LowBitrate walks the (eta,gamma) ladder; AI walks f_ctrl down, then
// d_bits down, then doubles t_ref up to the cap; Normal and AudioOnly
// restore the configured defaults.  When even the ladder floor does not
// fit, needs_fallback asks for one rung down the mode ladder.
inline KnobResult adapt_knobs(const ControllerConfig& cfg, Mode mode,
                              double capacity) {
  KnobResult out{cfg, false};
  switch (mode) {
    case Mode::Normal:
    case Mode::AudioOnly: {
      out.needs_fallback = !feasible(demand_for(mode, out.cfg), capacity);
      return out;
    }
    case Mode::LowBitrate: {
      if (feasible(demand_low_bitrate(out.cfg), capacity)) return out;
      for (const auto& rung : kLbLadder) {
        if (rung[0] > cfg.eta || rung[0] * rung[0] * rung[1] >
                                     cfg.eta * cfg.eta * cfg.gamma)
          continue;  // never adapt upward of the configured point
        out.cfg.eta = rung[0];
        out.cfg.gamma = rung[1];
        if (feasible(demand_low_bitrate(out.cfg), capacity)) return out;
      }
      out.needs_fallback = true;
      return out;
    }
    case Mode::AI: {
      if (feasible(demand_ai(out.cfg), capacity)) return out;
      for (double f : kFctrlLadder) {
        if (f > cfg.f_ctrl) continue;
        out.cfg.f_ctrl = f;
        if (feasible(demand_ai(out.cfg), capacity)) return out;
      }
      for (double d : kDbitsLadder) {
        if (d > cfg.d_bits) continue;
        out.cfg.d_bits = d;
        if (feasible(demand_ai(out.cfg), capacity)) return out;
      }
      const double t_ref_max = std::max(kTrefCap, cfg.t_ref);
      while (out.cfg.t_ref * 2.0 <= t_ref_max) {
        out.cfg.t_ref *= 2.0;
        if (feasible(demand_ai(out.cfg), capacity)) return out;
      }
      out.needs_fallback = true;
      return out;
    }
  }
  return out;
}

inline Mode fallback_mode(Mode mode, bool demand_infeasible) {
  if (!demand_infeasible) return mode;
  switch (mode) {
    case Mode::Normal: return Mode::LowBitrate;
    case Mode::LowBitrate: return Mode::AI;
    case Mode::AI: return Mode::AudioOnly;
    case Mode::AudioOnly: return Mode::AudioOnly;  // terminal rung
  }
  return Mode::AudioOnly;
}

// One controller tick: what the session applies and what the mode-timeline
// CSV logs.
struct ControlDecision {
  double t = 0.0;
  double capacity = 0.0;
  Mode mode = Mode::Normal;
  bool switched = false;
  Mode previous_mode = Mode::Normal;
  bool feasible_now = true;  // demand of the final mode fits capacity
  RateDemand demand;
  ControllerConfig knobs;  // config with adapted knobs
  int n_down = 0;
  int n_up = 0;
  int n_mid = 0;
};

// Sequential state machine stepping the full hysteresis + adaptation +
// fallback pipeline once per capacity sample.  Shared by the live session
// and the CSV replay path so both produce identical timelines.
class ModeController {
 public:
  explicit ModeController(ControllerConfig cfg, Mode initial = Mode::Normal)
      : base_(cfg) {
    base_.validate();
    state_.mode = initial;
  }

  const ControllerState& state() const { return state_; }
  const ControllerConfig& base_config() const { return base_; }

  ControlDecision step(double t, double capacity) {
    state_ = update_counters(state_, capacity, base_);
    const Mode before = state_.mode;
    Mode mode = decide_mode(state_, base_);

    // Never operate an infeasible mode knowingly: descend the fallback
    // ladder within the tick until a rung fits or AudioOnly is reached.
    KnobResult knobs = adapt_knobs(base_, mode, capacity);
    while (knobs.needs_fallback && mode != Mode::AudioOnly) {
      mode = fallback_mode(mode, true);
      knobs = adapt_knobs(base_, mode, capacity);
    }

    ControlDecision d;
    d.t = t;
    d.capacity = capacity;
    d.mode = mode;
    d.previous_mode = before;
    d.switched = mode != before;
    d.knobs = knobs.cfg;
    d.demand = demand_for(mode, knobs.cfg);
    d.feasible_now = feasible(d.demand, capacity);
    d.n_down = state_.n_down;
    d.n_up = state_.n_up;
    d.n_mid = state_.n_mid;

    if (d.switched) state_.last_switch_t = t;
    state_.mode = mode;
    return d;
  }

 private:
  ControllerConfig base_;
  ControllerState state_;
};

}  // namespace vcsim
