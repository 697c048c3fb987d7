#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "dualstream/composite.hpp"
#include "dualstream/config.hpp"

namespace dualstream {

// Transport stand-in for the two real networks: a low-latency state channel
// and a bulk AV channel. Everything is deterministic given the seeds.
struct LinkModel {
  double base_latency_ms = 0.0;
  double jitter_ms = 0.0;  // uniform in [-jitter_ms, +jitter_ms]
  double loss_prob = 0.0;
  uint64_t seed = 0;
};

// Keys: base_latency_ms, jitter_ms, loss_prob, seed.
LinkModel link_from_config(const Config& cfg);
void validate_link(const LinkModel& m);  // throws ParseError

// One directed packet path. Per-link FIFO: delivery times are monotone
// non-decreasing over undropped packets. Each packet's draw depends only on
// (model.seed, packet index), so reruns reproduce the same drop pattern.
class Link {
 public:
  explicit Link(const LinkModel& m);

  // Returns the delivery time for a packet sent at `send_time_ms`, or
  // nullopt when the packet is lost. `reliable` packets consume the same
  // RNG draws (keeping the stream aligned) but are never dropped; the
  // session uses this for structural state messages.
  std::optional<double> schedule(double send_time_ms, bool reliable = false);

  const LinkModel& model() const { return model_; }
  uint64_t packets_sent() const { return next_index_; }
  uint64_t packets_dropped() const { return dropped_; }

 private:
  LinkModel model_;
  uint64_t next_index_ = 0;
  uint64_t dropped_ = 0;
  double last_delivery_ms_ = 0.0;
  bool any_delivered_ = false;
};

// Single-threaded discrete-event loop with a virtual millisecond clock.
// Ties are broken by scheduling order.
class EventQueue {
 public:
  void at(double time_ms, std::function<void()> fn);
  bool step();  // runs the earliest event; false when empty
  void run();
  double now_ms() const { return now_; }

 private:
  struct Entry {
    double time_ms;
    uint64_t order;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
      return a.order > b.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  uint64_t next_order_ = 0;
  double now_ = 0.0;
};

enum class ChromaSubsample : uint8_t { kNone = 0, k420 = 1 };

// Proxy for video-compression loss on the AV channel, applied in order:
// chroma subsampling, then quantization, then additive Gaussian noise.
struct DegradationModel {
  ChromaSubsample chroma = ChromaSubsample::kNone;
  double noise_sigma = 0.0;  // per-channel, in 8-bit levels
  int quant_step = 1;        // per-channel uniform quantizer step
};

// Keys: chroma_subsample ("none" | "420"), noise_sigma, quant_step.
DegradationModel degradation_from_config(const Config& cfg);
void validate_degradation(const DegradationModel& m);  // throws ParseError

// Metadata (seq, timestamp, quadrant records) is untouched; only payload
// pixels change. Identity when the model is all-None. Noise depends on
// (seed, frame seq) only.
CompositeFrame degrade(const CompositeFrame& f, const DegradationModel& m, uint64_t seed);
ColorFrame degrade_frame(const ColorFrame& f, const DegradationModel& m, uint64_t stream_seed);

// One line per transport event: "<time_ms> <channel> <event> <size>".
struct LogRecord {
  double time_ms = 0.0;
  std::string channel;
  std::string event;  // send | deliver | drop
  size_t size = 0;
};

std::string format_log_record(const LogRecord& r);
LogRecord parse_log_record(const std::string& line);  // throws ParseError

}  // namespace dualstream
