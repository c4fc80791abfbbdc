#pragma once
// Per-interval link estimates from cumulative endpoint counters:
// instantaneous and smoothed rates, loss ratio, goodput, and the
// stability-aware capacity proxy that feeds the mode controller.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace vcsim {

// One timestamped snapshot of cumulative transport counters.  Cumulative
// fields must be monotone non-decreasing and t strictly increasing within
// a trace; violations are rejected per-sample (client restarts in replayed
// CSVs show up as counter resets).
struct CounterSample {
  double t = 0.0;  // seconds since session start
  double bytes_tx_cum = 0.0;
  double bytes_rx_cum = 0.0;
  double packets_lost_cum = 0.0;
  double packets_recv_cum = 0.0;
  double rtt = 0.0;     // seconds
  double jitter = 0.0;  // seconds
};

// Derived per-interval estimates.  Invariants: loss_ratio in [0,1],
// capacity <= goodput <= rate_tx_smooth, all rates >= 0.
struct LinkEstimate {
  double t = 0.0;
  double rate_tx = 0.0;  // kbps
  double rate_rx = 0.0;
  double rate_tx_smooth = 0.0;
  double rate_rx_smooth = 0.0;
  double loss_ratio = 0.0;
  double goodput = 0.0;   // kbps
  double capacity = 0.0;  // kbps
};

struct EstimatorConfig {
  double delta_t = 1.0;  // nominal sampling interval, seconds
  double alpha = 0.8;    // EWMA weight, in (0,1)
  double kappa = 1.0;    // RTT penalty weight, 1/s
  double lambda = 1.0;   // jitter penalty weight, 1/s

  void validate() const {
    if (!(delta_t > 0.0))
      throw std::invalid_argument("estimator.delta_t: must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("estimator.alpha: must be in (0,1)");
    if (kappa < 0.0)
      throw std::invalid_argument("estimator.kappa: must be >= 0");
    if (lambda < 0.0)
      throw std::invalid_argument("estimator.lambda: must be >= 0");
  }
};

// Returns nullptr if curr may follow prev, else the name of the offending
// field.
inline const char* check_sample_order(const CounterSample& prev,
                                      const CounterSample& curr) {
  if (!(curr.t > prev.t)) return "t";
  if (curr.bytes_tx_cum < prev.bytes_tx_cum) return "bytes_tx_cum";
  if (curr.bytes_rx_cum < prev.bytes_rx_cum) return "bytes_rx_cum";
  if (curr.packets_lost_cum < prev.packets_lost_cum) return "packets_lost_cum";
  if (curr.packets_recv_cum < prev.packets_recv_cum) return "packets_recv_cum";
  return nullptr;
}

struct RatePair {
  double tx = 0.0;
  double rx = 0.0;
};

// Instantaneous rates in kbps over the actual elapsed time, not the
// nominal interval, so jittery sampling does not bias the estimate.
inline RatePair estimate_rates(const CounterSample& prev,
                               const CounterSample& curr,
                               const EstimatorConfig& /*cfg*/) {
  if (const char* field = check_sample_order(prev, curr)) {
    throw std::invalid_argument(std::string("rejected sample: non-monotone ") +
                                field);
  }
  const double dt = curr.t - prev.t;
  return {8.0 * (curr.bytes_tx_cum - prev.bytes_tx_cum) / (1000.0 * dt),
          8.0 * (curr.bytes_rx_cum - prev.bytes_rx_cum) / (1000.0 * dt)};
}

inline double smooth_rate(double prev_smooth, double instantaneous,
                          double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha: must be in (0,1)");
  return alpha * prev_smooth + (1.0 - alpha) * instantaneous;
}

// Interval loss ratio. An idle interval (no packets either way) counts as
// lossless, not lossy.
inline double loss_ratio(const CounterSample& prev, const CounterSample& curr) {
  const double lost = curr.packets_lost_cum - prev.packets_lost_cum;
  const double recv = curr.packets_recv_cum - prev.packets_recv_cum;
  if (lost < 0.0 || recv < 0.0)
    throw std::invalid_argument("rejected sample: non-monotone packet counters");
  const double denom = lost + recv;
  if (denom <= 0.0) return 0.0;
  return lost / denom;
}

inline double goodput(double rate_tx_smooth, double loss) {
  return rate_tx_smooth * (1.0 - loss);
}

// Goodput penalized by RTT and jitter (both in seconds; kappa/lambda in 1/s
// keep the denominator dimensionless).
inline double capacity_proxy(double goodput_kbps, double rtt, double jitter,
                             double kappa, double lambda) {
  return goodput_kbps / (1.0 + kappa * rtt + lambda * jitter);
}

// Streaming composition of the per-interval estimates.  Holds the previous
// sample and the EWMA memory; the EWMA seeds from the first computed
// instantaneous rate instead of zero to avoid a warm-up bias.  On a
// rejected sample the estimator resets and the next sample starts a fresh
// trace segment.
class RateEstimator {
 public:
  explicit RateEstimator(EstimatorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const EstimatorConfig& config() const { return cfg_; }

  // Returns the estimate, or std::nullopt when the sample was rejected
  // (reason retrievable via last_error()).
  std::optional<LinkEstimate> push(const CounterSample& curr) {
    if (prev_) {
      if (const char* field = check_sample_order(*prev_, curr)) {
        last_error_ = std::string("rejected sample at t=") +
                      std::to_string(curr.t) + ": non-monotone " + field;
        ++rejected_;
        reset();
        return std::nullopt;
      }
    }
    LinkEstimate est;
    est.t = curr.t;
    if (prev_) {
      const RatePair inst = estimate_rates(*prev_, curr, cfg_);
      est.rate_tx = inst.tx;
      est.rate_rx = inst.rx;
      if (smooth_) {
        est.rate_tx_smooth = smooth_rate(smooth_->tx, inst.tx, cfg_.alpha);
        est.rate_rx_smooth = smooth_rate(smooth_->rx, inst.rx, cfg_.alpha);
      } else {
        est.rate_tx_smooth = inst.tx;
        est.rate_rx_smooth = inst.rx;
      }
      smooth_ = RatePair{est.rate_tx_smooth, est.rate_rx_smooth};
      est.loss_ratio = loss_ratio(*prev_, curr);
    }
    est.goodput = goodput(est.rate_tx_smooth, est.loss_ratio);
    est.capacity = capacity_proxy(est.goodput, curr.rtt, curr.jitter,
                                  cfg_.kappa, cfg_.lambda);
    prev_ = curr;
    return est;
  }

  void reset() {
    prev_.reset();
    smooth_.reset();
  }

  std::size_t rejected_samples() const { return rejected_; }
  const std::string& last_error() const { return last_error_; }

 private:
  EstimatorConfig cfg_;
  std::optional<CounterSample> prev_;
  std::optional<RatePair> smooth_;
  std::size_t rejected_ = 0;
  std::string last_error_;
};

}  // namespace vcsim
