#pragma once
// Scenario configuration: a plain nested key/value text format.
//
//   # comment
//   schema_version 1
//   duration 600
//   uplink_profile {
//     segment 0 3000 0.02 0.005 none
//     segment 300 150 0.02 0.005 uniform 0.02
//   }
//
// A leaf line is `key value...`; `key {` opens a nested block; `}` closes
// it.  Profile segments are positional: start cap delay jitter_max loss,
// where loss is `none`, `uniform p`, or `burst g2b b2g loss_bad loss_good`.
// Unknown keys are rejected; every defaulted field is echoed back through
// canonical_text() so a run's full configuration is reproducible.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsim/controller.hpp"
#include "vcsim/detectors.hpp"
#include "vcsim/netsim.hpp"
#include "vcsim/rng.hpp"
#include "vcsim/telemetry.hpp"

namespace vcsim {

namespace cfgtext {

struct Node {
  std::vector<std::pair<std::string, Node>> blocks;
  std::vector<std::pair<std::string, std::vector<std::string>>> leaves;
};

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

inline Node parse(std::istream& in, const std::string& name) {
  std::vector<Node*> stack;
  Node root;
  stack.push_back(&root);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (toks.size() == 1 && toks[0] == "}") {
      if (stack.size() == 1)
        throw std::invalid_argument(where + ": unbalanced '}'");
      stack.pop_back();
      continue;
    }
    if (toks.size() == 2 && toks[1] == "{") {
      stack.back()->blocks.emplace_back(toks[0], Node{});
      stack.push_back(&stack.back()->blocks.back().second);
      continue;
    }
    if (toks.size() < 2)
      throw std::invalid_argument(where + ": expected 'key value...'");
    std::vector<std::string> values(toks.begin() + 1, toks.end());
    stack.back()->leaves.emplace_back(toks[0], std::move(values));
  }
  if (stack.size() != 1)
    throw std::invalid_argument(name + ": unterminated block");
  return root;
}

// Tracks which keys were consumed so typos surface as errors.
class Reader {
 public:
  Reader(const Node& node, std::string path) : node_(node), path_(path) {}

  bool has(const std::string& key) const {
    for (const auto& [k, v] : node_.leaves)
      if (k == key) return true;
    return false;
  }

  std::optional<std::string> raw(const std::string& key) {
    for (const auto& [k, v] : node_.leaves) {
      if (k == key) {
        used_.insert(key);
        std::string joined;
        for (const auto& t : v) {
          if (!joined.empty()) joined += ' ';
          joined += t;
        }
        return joined;
      }
    }
    return std::nullopt;
  }

  std::vector<std::string> tokens(const std::string& key) {
    for (const auto& [k, v] : node_.leaves)
      if (k == key) {
        used_.insert(key);
        return v;
      }
    return {};
  }

  double num(const std::string& key, double def) {
    auto v = raw(key);
    if (!v) return def;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw std::invalid_argument(path_ + "." + key + ": expected a number, got '" +
                                  *v + "'");
    }
  }

  double require_num(const std::string& key) {
    if (!has(key))
      throw std::invalid_argument(path_ + "." + key + ": required field missing");
    return num(key, 0.0);
  }

  std::string str(const std::string& key, const std::string& def) {
    auto v = raw(key);
    return v ? *v : def;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    auto v = raw(key);
    if (!v) return def;
    try {
      return std::stoull(*v);
    } catch (...) {
      throw std::invalid_argument(path_ + "." + key +
                                  ": expected an unsigned integer");
    }
  }

  const Node* block(const std::string& key) {
    for (const auto& [k, v] : node_.blocks)
      if (k == key) {
        used_.insert(key);
        return &v;
      }
    return nullptr;
  }

  // Repeated blocks/leaves with the same key, in file order.
  std::vector<std::vector<std::string>> repeated(const std::string& key) {
    std::vector<std::vector<std::string>> out;
    for (const auto& [k, v] : node_.leaves)
      if (k == key) out.push_back(v);
    if (!out.empty()) used_.insert(key);
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : node_.leaves)
      if (!used_.count(k))
        throw std::invalid_argument(path_ + "." + k + ": unknown field");
    for (const auto& [k, v] : node_.blocks)
      if (!used_.count(k))
        throw std::invalid_argument(path_ + "." + k + ": unknown block");
  }

 private:
  const Node& node_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace cfgtext

enum class Topology { P2p, Sfu };

inline const char* to_string(Topology t) {
  return t == Topology::P2p ? "p2p" : "sfu";
}

struct PeerConfig {
  double audio_rate = 24.0;          // kbps the peer returns
  double video_rate_normal = 1400.0;  // kbps in Normal mode
};

struct AudioDetectorConfig {
  double cadence = 0.02;       // nominal packet spacing, seconds
  double gap_threshold = 0.1;  // seconds
};

struct SfuConfig {
  double forward_delay = 0.005;  // store-and-forward hop, seconds
  std::optional<ImpairmentProfile> uplink_leg2;    // sfu -> peer
  std::optional<ImpairmentProfile> downlink_leg1;  // peer -> sfu
};

struct ScenarioConfig {
  int schema_version = 1;
  double duration = 0.0;  // required
  double warm_up = 10.0;
  Topology topology = Topology::P2p;
  std::uint64_t seed = 1;
  double video_fps = 25.0;
  int mtu = 1200;

  EstimatorConfig estimator;
  ControllerConfig controller;
  PeerConfig peer;
  SynthPipelineModel synth;
  double synth_fps = 25.0;
  double synth_stall_window = 0.5;
  FreezeDetectorConfig freeze;
  AudioDetectorConfig audio;
  double handover_stability_window = 1.0;

  ImpairmentProfile uplink_profile;
  ImpairmentProfile downlink_profile;
  SfuConfig sfu;

  void validate() const {
    if (schema_version != 1)
      throw std::invalid_argument("schema_version: only version 1 is supported");
    if (!(duration > 0.0))
      throw std::invalid_argument("duration: must be > 0");
    if (warm_up < 0.0 || !(duration > warm_up))
      throw std::invalid_argument("warm_up: need duration > warm_up >= 0");
    if (!(video_fps > 0.0))
      throw std::invalid_argument("video_fps: must be > 0");
    if (!(synth_fps > 0.0))
      throw std::invalid_argument("synth.fps: must be > 0");
    if (mtu < 64)
      throw std::invalid_argument("mtu: must be >= 64");
    estimator.validate();
    controller.validate();
    synth.validate();
    freeze.validate();
    if (audio.cadence <= 0.0 || audio.gap_threshold <= 0.0)
      throw std::invalid_argument("audio.cadence/gap_threshold: must be > 0");
    if (peer.audio_rate < 0.0 || peer.video_rate_normal < 0.0)
      throw std::invalid_argument("peer rates: must be >= 0");
    uplink_profile.validate("uplink_profile");
    downlink_profile.validate("downlink_profile");
    if (sfu.uplink_leg2) sfu.uplink_leg2->validate("sfu.uplink_profile");
    if (sfu.downlink_leg1) sfu.downlink_leg1->validate("sfu.downlink_profile");
    if (!(handover_stability_window > 0.0))
      throw std::invalid_argument("handover.stability_window: must be > 0");
    if (!(synth_stall_window > 0.0))
      throw std::invalid_argument("synth.stall_window: must be > 0");
  }
};

namespace scenario_detail {

inline LossModel parse_loss(const std::vector<std::string>& toks,
                            std::size_t at, const std::string& where) {
  auto need = [&](std::size_t n) {
    if (toks.size() != at + n)
      throw std::invalid_argument(where + ": wrong number of loss parameters");
  };
  auto num = [&](std::size_t i) {
    try {
      return std::stod(toks[i]);
    } catch (...) {
      throw std::invalid_argument(where + ": expected a number, got '" +
                                  toks[i] + "'");
    }
  };
  const std::string& kind = toks[at - 1];
  if (kind == "none") {
    need(0);
    return LossModel::none();
  }
  if (kind == "uniform") {
    need(1);
    return LossModel::uniform(num(at));
  }
  if (kind == "burst") {
    need(4);
    return LossModel::burst(num(at), num(at + 1), num(at + 2), num(at + 3));
  }
  throw std::invalid_argument(where + ": loss kind must be none|uniform|burst");
}

inline ImpairmentProfile parse_profile(const cfgtext::Node& node,
                                       const std::string& path,
                                       std::uint64_t default_seed) {
  cfgtext::Reader r(node, path);
  ImpairmentProfile p;
  p.seed = r.u64("seed", default_seed);
  p.burst_window = r.num("burst_window", 0.1);
  p.queue_bound_s = r.num("queue_bound", 0.25);
  for (const auto& toks : r.repeated("segment")) {
    const std::string where = path + ".segment";
    if (toks.size() < 5)
      throw std::invalid_argument(
          where + ": expected 'start cap delay jitter_max loss...'");
    auto num = [&](std::size_t i) {
      try {
        return std::stod(toks[i]);
      } catch (...) {
        throw std::invalid_argument(where + ": expected a number, got '" +
                                    toks[i] + "'");
      }
    };
    ProfileSegment seg;
    seg.start_t = num(0);
    seg.cap = num(1);
    seg.delay = num(2);
    seg.jitter_max = num(3);
    seg.loss = parse_loss(toks, 5, where);
    p.segments.push_back(seg);
  }
  r.finish();
  p.validate(path);
  return p;
}

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string fmt_loss(const LossModel& m) {
  switch (m.kind) {
    case LossModel::Kind::None:
      return "none";
    case LossModel::Kind::Uniform:
      return "uniform " + fmt_num(m.p);
    case LossModel::Kind::Burst:
      return "burst " + fmt_num(m.p_good_to_bad) + " " +
             fmt_num(m.p_bad_to_good) + " " + fmt_num(m.loss_in_bad) + " " +
             fmt_num(m.loss_in_good);
  }
  return "none";
}

inline void dump_profile(std::ostream& os, const std::string& name,
                         const ImpairmentProfile& p) {
  os << name << " {\n";
  os << "  seed " << p.seed << "\n";
  os << "  burst_window " << fmt_num(p.burst_window) << "\n";
  os << "  queue_bound " << fmt_num(p.queue_bound_s) << "\n";
  for (const auto& s : p.segments)
    os << "  segment " << fmt_num(s.start_t) << " " << fmt_num(s.cap) << " "
       << fmt_num(s.delay) << " " << fmt_num(s.jitter_max) << " "
       << fmt_loss(s.loss) << "\n";
  os << "}\n";
}

}  // namespace scenario_detail

inline ScenarioConfig parse_scenario(std::istream& in,
                                     const std::string& name = "scenario") {
  using cfgtext::Reader;
  const cfgtext::Node root = cfgtext::parse(in, name);
  Reader r(root, "scenario");
  ScenarioConfig cfg;

  cfg.schema_version = static_cast<int>(r.num("schema_version", 1));
  if (!r.has("duration"))
    throw std::invalid_argument("duration: required field missing");
  cfg.duration = r.num("duration", 0.0);
  cfg.warm_up = r.num("warm_up", cfg.warm_up);
  const std::string topo = r.str("topology", "p2p");
  if (topo == "p2p")
    cfg.topology = Topology::P2p;
  else if (topo == "sfu")
    cfg.topology = Topology::Sfu;
  else
    throw std::invalid_argument("topology: must be p2p or sfu");
  cfg.seed = r.u64("seed", cfg.seed);
  cfg.video_fps = r.num("video_fps", cfg.video_fps);
  cfg.mtu = static_cast<int>(r.num("mtu", cfg.mtu));

  if (const auto* n = r.block("estimator")) {
    Reader er(*n, "estimator");
    cfg.estimator.delta_t = er.num("delta_t", cfg.estimator.delta_t);
    cfg.estimator.alpha = er.num("alpha", cfg.estimator.alpha);
    cfg.estimator.kappa = er.num("kappa", cfg.estimator.kappa);
    cfg.estimator.lambda = er.num("lambda", cfg.estimator.lambda);
    er.finish();
  }
  // One sampling clock drives the estimator and the persistence counters.
  cfg.controller.delta_t = cfg.estimator.delta_t;

  if (const auto* n = r.block("controller")) {
    Reader cr(*n, "controller");
    auto& c = cfg.controller;
    c.tau_low = cr.num("tau_low", c.tau_low);
    c.tau_high = cr.num("tau_high", c.tau_high);
    c.t_stable = cr.num("t_stable", c.t_stable);
    c.audio_rate = cr.num("audio_rate", c.audio_rate);
    c.video_rate_normal = cr.num("video_rate_normal", c.video_rate_normal);
    c.eta = cr.num("eta", c.eta);
    c.gamma = cr.num("gamma", c.gamma);
    c.f_ctrl = cr.num("f_ctrl", c.f_ctrl);
    c.n_desc = cr.num("n_desc", c.n_desc);
    c.d_bits = cr.num("d_bits", c.d_bits);
    c.s_ref = cr.num("s_ref", c.s_ref);
    c.t_ref = cr.num("t_ref", c.t_ref);
    cr.finish();
  }

  cfg.peer.audio_rate = cfg.controller.audio_rate;
  cfg.peer.video_rate_normal = cfg.controller.video_rate_normal;
  if (const auto* n = r.block("peer")) {
    Reader pr(*n, "peer");
    cfg.peer.audio_rate = pr.num("audio_rate", cfg.peer.audio_rate);
    cfg.peer.video_rate_normal =
        pr.num("video_rate_normal", cfg.peer.video_rate_normal);
    pr.finish();
  }

  if (const auto* n = r.block("synth")) {
    Reader sr(*n, "synth");
    cfg.synth.capture_delay = sr.num("capture_delay", cfg.synth.capture_delay);
    cfg.synth.request_response_delay =
        sr.num("request_response_delay", cfg.synth.request_response_delay);
    cfg.synth.inference_delay =
        sr.num("inference_delay", cfg.synth.inference_delay);
    cfg.synth.render_delay = sr.num("render_delay", cfg.synth.render_delay);
    cfg.synth_fps = sr.num("fps", cfg.synth_fps);
    cfg.synth_stall_window = sr.num("stall_window", cfg.synth_stall_window);
    sr.finish();
  }

  if (const auto* n = r.block("freeze")) {
    Reader fr(*n, "freeze");
    cfg.freeze.t_freeze = fr.num("t_freeze", cfg.freeze.t_freeze);
    fr.finish();
  }

  if (const auto* n = r.block("audio")) {
    Reader ar(*n, "audio");
    cfg.audio.cadence = ar.num("cadence", cfg.audio.cadence);
    cfg.audio.gap_threshold = ar.num("gap_threshold", cfg.audio.gap_threshold);
    ar.finish();
  }

  if (const auto* n = r.block("handover")) {
    Reader hr(*n, "handover");
    cfg.handover_stability_window =
        hr.num("stability_window", cfg.handover_stability_window);
    hr.finish();
  }

  const auto* up = r.block("uplink_profile");
  if (!up)
    throw std::invalid_argument("uplink_profile: required block missing");
  cfg.uplink_profile =
      scenario_detail::parse_profile(*up, "uplink_profile", cfg.seed);

  if (const auto* down = r.block("downlink_profile")) {
    cfg.downlink_profile =
        scenario_detail::parse_profile(*down, "downlink_profile", cfg.seed);
  } else {
    cfg.downlink_profile = cfg.uplink_profile;  // symmetric by default
  }

  if (const auto* n = r.block("sfu")) {
    Reader sr(*n, "sfu");
    cfg.sfu.forward_delay = sr.num("delay", cfg.sfu.forward_delay);
    if (const auto* leg = sr.block("uplink_profile"))
      cfg.sfu.uplink_leg2 =
          scenario_detail::parse_profile(*leg, "sfu.uplink_profile", cfg.seed);
    if (const auto* leg = sr.block("downlink_profile"))
      cfg.sfu.downlink_leg1 = scenario_detail::parse_profile(
          *leg, "sfu.downlink_profile", cfg.seed);
    sr.finish();
  }

  r.finish();
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

// Canonical dump of the fully resolved configuration; defaults are
// materialized so a report always records the exact run parameters.
inline std::string canonical_text(const ScenarioConfig& cfg) {
  using scenario_detail::dump_profile;
  using scenario_detail::fmt_num;
  std::ostringstream os;
  os << "schema_version " << cfg.schema_version << "\n";
  os << "duration " << fmt_num(cfg.duration) << "\n";
  os << "warm_up " << fmt_num(cfg.warm_up) << "\n";
  os << "topology " << to_string(cfg.topology) << "\n";
  os << "seed " << cfg.seed << "\n";
  os << "video_fps " << fmt_num(cfg.video_fps) << "\n";
  os << "mtu " << cfg.mtu << "\n";
  os << "estimator {\n";
  os << "  delta_t " << fmt_num(cfg.estimator.delta_t) << "\n";
  os << "  alpha " << fmt_num(cfg.estimator.alpha) << "\n";
  os << "  kappa " << fmt_num(cfg.estimator.kappa) << "\n";
  os << "  lambda " << fmt_num(cfg.estimator.lambda) << "\n";
  os << "}\n";
  os << "controller {\n";
  os << "  tau_low " << fmt_num(cfg.controller.tau_low) << "\n";
  os << "  tau_high " << fmt_num(cfg.controller.tau_high) << "\n";
  os << "  t_stable " << fmt_num(cfg.controller.t_stable) << "\n";
  os << "  audio_rate " << fmt_num(cfg.controller.audio_rate) << "\n";
  os << "  video_rate_normal " << fmt_num(cfg.controller.video_rate_normal)
     << "\n";
  os << "  eta " << fmt_num(cfg.controller.eta) << "\n";
  os << "  gamma " << fmt_num(cfg.controller.gamma) << "\n";
  os << "  f_ctrl " << fmt_num(cfg.controller.f_ctrl) << "\n";
  os << "  n_desc " << fmt_num(cfg.controller.n_desc) << "\n";
  os << "  d_bits " << fmt_num(cfg.controller.d_bits) << "\n";
  os << "  s_ref " << fmt_num(cfg.controller.s_ref) << "\n";
  os << "  t_ref " << fmt_num(cfg.controller.t_ref) << "\n";
  os << "}\n";
  os << "peer {\n";
  os << "  audio_rate " << fmt_num(cfg.peer.audio_rate) << "\n";
  os << "  video_rate_normal " << fmt_num(cfg.peer.video_rate_normal) << "\n";
  os << "}\n";
  os << "synth {\n";
  os << "  capture_delay " << fmt_num(cfg.synth.capture_delay) << "\n";
  os << "  request_response_delay "
     << fmt_num(cfg.synth.request_response_delay) << "\n";
  os << "  inference_delay " << fmt_num(cfg.synth.inference_delay) << "\n";
  os << "  render_delay " << fmt_num(cfg.synth.render_delay) << "\n";
  os << "  fps " << fmt_num(cfg.synth_fps) << "\n";
  os << "  stall_window " << fmt_num(cfg.synth_stall_window) << "\n";
  os << "}\n";
  os << "freeze {\n";
  os << "  t_freeze " << fmt_num(cfg.freeze.t_freeze) << "\n";
  os << "}\n";
  os << "audio {\n";
  os << "  cadence " << fmt_num(cfg.audio.cadence) << "\n";
  os << "  gap_threshold " << fmt_num(cfg.audio.gap_threshold) << "\n";
  os << "}\n";
  os << "handover {\n";
  os << "  stability_window " << fmt_num(cfg.handover_stability_window)
     << "\n";
  os << "}\n";
  dump_profile(os, "uplink_profile", cfg.uplink_profile);
  dump_profile(os, "downlink_profile", cfg.downlink_profile);
  if (cfg.topology == Topology::Sfu) {
    os << "sfu {\n";
    os << "  delay " << fmt_num(cfg.sfu.forward_delay) << "\n";
    os << "}\n";
    if (cfg.sfu.uplink_leg2)
      dump_profile(os, "sfu_uplink_profile", *cfg.sfu.uplink_leg2);
    if (cfg.sfu.downlink_leg1)
      dump_profile(os, "sfu_downlink_profile", *cfg.sfu.downlink_leg1);
  }
  return os.str();
}

inline std::string config_hash_hex(const std::string& canonical) {
  const std::uint64_t h = detail::fnv1a64(canonical);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vcsim
