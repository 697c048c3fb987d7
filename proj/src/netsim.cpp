#include "dualstream/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dualstream/error.hpp"
#include "dualstream/rng.hpp"

namespace dualstream {

LinkModel link_from_config(const Config& cfg) {
  cfg.require_known({"base_latency_ms", "jitter_ms", "loss_prob", "seed"});
  LinkModel m;
  m.base_latency_ms = cfg.get_double("base_latency_ms", m.base_latency_ms);
  m.jitter_ms = cfg.get_double("jitter_ms", m.jitter_ms);
  m.loss_prob = cfg.get_double("loss_prob", m.loss_prob);
  m.seed = static_cast<uint64_t>(cfg.get_int("seed", 0));
  validate_link(m);
  return m;
}

void validate_link(const LinkModel& m) {
  if (!(m.base_latency_ms >= 0) || !std::isfinite(m.base_latency_ms)) {
    throw ParseError("link base_latency_ms must be >= 0");
  }
  if (!(m.jitter_ms >= 0) || !std::isfinite(m.jitter_ms)) {
    throw ParseError("link jitter_ms must be >= 0");
  }
  if (!(m.loss_prob >= 0.0 && m.loss_prob <= 1.0)) {
    throw ParseError("link loss_prob must be in [0,1]");
  }
}

Link::Link(const LinkModel& m) : model_(m) { validate_link(m); }

std::optional<double> Link::schedule(double send_time_ms, bool reliable) {
  const uint64_t index = next_index_++;
  SplitMix64 rng(derive_seed(model_.seed, index));
  const double drop_draw = rng.u01();
  const double jitter_draw = rng.u01();
  if (!reliable && drop_draw < model_.loss_prob) {
    ++dropped_;
    return std::nullopt;
  }
  const double jitter = (2.0 * jitter_draw - 1.0) * model_.jitter_ms;
  double delivery = send_time_ms + std::max(0.0, model_.base_latency_ms + jitter);
  if (any_delivered_) delivery = std::max(delivery, last_delivery_ms_);  // FIFO
  last_delivery_ms_ = delivery;
  any_delivered_ = true;
  return delivery;
}

void EventQueue::at(double time_ms, std::function<void()> fn) {
  queue_.push({std::max(time_ms, now_), next_order_++, std::move(fn)});
}

bool EventQueue::step() {
  if (queue_.empty()) return false;
  Entry e = queue_.top();
  queue_.pop();
  now_ = e.time_ms;
  e.fn();
  return true;
}

void EventQueue::run() {
  while (step()) {
  }
}

DegradationModel degradation_from_config(const Config& cfg) {
  cfg.require_known({"chroma_subsample", "noise_sigma", "quant_step"});
  DegradationModel m;
  const std::string chroma = cfg.get_str("chroma_subsample", "none");
  if (chroma == "none") {
    m.chroma = ChromaSubsample::kNone;
  } else if (chroma == "420") {
    m.chroma = ChromaSubsample::k420;
  } else {
    throw ParseError("chroma_subsample must be 'none' or '420', got '" + chroma + "'");
  }
  m.noise_sigma = cfg.get_double("noise_sigma", m.noise_sigma);
  m.quant_step = static_cast<int>(cfg.get_int("quant_step", m.quant_step));
  validate_degradation(m);
  return m;
}

void validate_degradation(const DegradationModel& m) {
  if (!(m.noise_sigma >= 0) || !std::isfinite(m.noise_sigma)) {
    throw ParseError("noise_sigma must be >= 0");
  }
  if (m.quant_step < 1) throw ParseError("quant_step must be >= 1");
}

namespace {

uint8_t clamp_u8(double v) {
  return static_cast<uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

// BT.601 luma/chroma split with the algebraically exact inverse, so that
// constant-chroma blocks survive 4:2:0 averaging bit-exactly.
void subsample_420(ColorFrame& f) {
  const int w = f.width, h = f.height;
  std::vector<double> yp(static_cast<size_t>(w) * h);
  std::vector<double> cb(yp.size()), cr(yp.size());
  for (size_t i = 0; i < yp.size(); ++i) {
    const double r = f.pixels[3 * i], g = f.pixels[3 * i + 1], b = f.pixels[3 * i + 2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    yp[i] = y;
    cb[i] = (b - y) / 1.772;
    cr[i] = (r - y) / 1.402;
  }
  for (int by = 0; by < h; by += 2) {
    for (int bx = 0; bx < w; bx += 2) {
      double scb = 0, scr = 0;
      int n = 0;
      for (int dy = 0; dy < 2 && by + dy < h; ++dy) {
        for (int dx = 0; dx < 2 && bx + dx < w; ++dx) {
          const size_t i = static_cast<size_t>(by + dy) * w + (bx + dx);
          scb += cb[i];
          scr += cr[i];
          ++n;
        }
      }
      scb /= n;
      scr /= n;
      for (int dy = 0; dy < 2 && by + dy < h; ++dy) {
        for (int dx = 0; dx < 2 && bx + dx < w; ++dx) {
          const size_t i = static_cast<size_t>(by + dy) * w + (bx + dx);
          const double rr = yp[i] + 1.402 * scr;
          const double bb = yp[i] + 1.772 * scb;
          const double gg = (yp[i] - 0.299 * rr - 0.114 * bb) / 0.587;
          f.pixels[3 * i] = clamp_u8(rr);
          f.pixels[3 * i + 1] = clamp_u8(gg);
          f.pixels[3 * i + 2] = clamp_u8(bb);
        }
      }
    }
  }
}

// Mid-rise: every value in [k*step, (k+1)*step) reconstructs to the bucket
// center, like a bitrate-starved encoder's coarse coefficient levels.
void quantize(ColorFrame& f, int step) {
  for (auto& v : f.pixels) {
    v = clamp_u8(double(v / step) * step + step / 2);
  }
}

void add_noise(ColorFrame& f, double sigma, uint64_t seed) {
  SplitMix64 rng(seed);
  for (auto& v : f.pixels) {
    v = clamp_u8(double(v) + sigma * rng.gaussian());
  }
}

}  // namespace

ColorFrame degrade_frame(const ColorFrame& f, const DegradationModel& m, uint64_t stream_seed) {
  validate_degradation(m);
  ColorFrame out = f;
  if (m.chroma == ChromaSubsample::k420) subsample_420(out);
  if (m.quant_step > 1) quantize(out, m.quant_step);
  if (m.noise_sigma > 0) add_noise(out, m.noise_sigma, stream_seed);
  return out;
}

CompositeFrame degrade(const CompositeFrame& f, const DegradationModel& m, uint64_t seed) {
  CompositeFrame out = f;
  out.payload = degrade_frame(f.payload, m, derive_seed(seed, f.seq));
  return out;
}

std::string format_log_record(const LogRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.3f %s %s %zu", r.time_ms, r.channel.c_str(),
                r.event.c_str(), r.size);
  return buf;
}

LogRecord parse_log_record(const std::string& line) {
  LogRecord r;
  char channel[64], event[64];
  unsigned long long size = 0;
  if (std::sscanf(line.c_str(), "%lf %63s %63s %llu", &r.time_ms, channel, event, &size) != 4) {
    throw ParseError("bad event log line: '" + line + "'");
  }
  r.channel = channel;
  r.event = event;
  r.size = static_cast<size_t>(size);
  return r;
}

}  // namespace dualstream
