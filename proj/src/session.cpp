#include "dualstream/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>

#include "dualstream/depth_codec.hpp"
#include "dualstream/error.hpp"
#include "dualstream/hash.hpp"
#include "dualstream/rng.hpp"

namespace dualstream {
namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

[[noreturn]] void fail_at(const std::string& source, int line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, const std::string& source, int line,
                    const char* what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail_at(source, line, std::string("bad ") + what + " '" + s + "'");
  }
}

uint64_t parse_u64(const std::string& s, const std::string& source, int line, const char* what) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail_at(source, line, std::string("bad ") + what + " '" + s + "'");
  }
}

Posed parse_pose7(const std::vector<std::string>& args, size_t i, const std::string& source,
                  int line) {
  if (args.size() < i + 7) fail_at(source, line, "expected 7 pose values: x y z qw qx qy qz");
  double v[7];
  for (size_t j = 0; j < 7; ++j) {
    v[j] = parse_double(args[i + j], source, line, "pose value");
  }
  const Eigen::Quaterniond q(v[3], v[4], v[5], v[6]);
  if (q.norm() < 1e-9) fail_at(source, line, "zero quaternion");
  return make_pose<double>({v[0], v[1], v[2]}, q);
}

Posed parse_pose_csv(const std::string& csv, const std::string& source, int line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 7) fail_at(source, line, "pose must be x,y,z,qw,qx,qy,qz");
  return parse_pose7(parts, 0, source, line);
}

Config args_to_config(const std::vector<std::string>& args, size_t from,
                      const std::string& source, int line) {
  std::string joined;
  for (size_t i = from; i < args.size(); ++i) {
    joined += args[i];
    joined += '\n';
  }
  try {
    return Config::from_string(joined, source + ":" + std::to_string(line));
  } catch (const ParseError&) {
    throw;
  }
}

PeerDef parse_define(uint32_t id, const std::vector<std::string>& args, const std::string& source,
                     int line) {
  const Config cfg = args_to_config(args, 0, source, line);
  cfg.require_known({"anchor", "hfov", "vfov", "width", "height", "fx", "fy", "cx", "cy"});
  PeerDef def;
  def.id = id;
  if (cfg.has("anchor")) {
    def.anchor_pose_local = parse_pose_csv(cfg.get_str("anchor"), source, line);
  }
  const int width = static_cast<int>(cfg.get_int("width", 640));
  const int height = static_cast<int>(cfg.get_int("height", 480));
  try {
    if (cfg.has("fx")) {
      def.intrinsics = {cfg.get_double("fx"), cfg.get_double("fy"), cfg.get_double("cx"),
                        cfg.get_double("cy"), width, height};
      if (!intrinsics_are_valid(def.intrinsics)) {
        fail_at(source, line, "invalid explicit intrinsics");
      }
    } else {
      def.intrinsics = intrinsics_from_fov<double>(cfg.get_double("hfov", 69.0),
                                                   cfg.get_double("vfov", 42.0), width, height);
    }
  } catch (const std::invalid_argument& e) {
    fail_at(source, line, e.what());
  }
  return def;
}

const std::vector<std::string> kGlobalVerbs = {"duration_ms", "fps", "av_link", "state_link",
                                               "degradation"};
const std::vector<std::string> kPeerVerbs = {
    "define",   "join",       "leave",          "pose",       "selfrep",
    "envrep",   "mode",       "scene",          "self_scene", "env_files",
    "self_files", "snapshot", "snapshot_visibility", "snapshot_delete", "pointer",
    "anchor"};

}  // namespace

SessionScript parse_script(std::istream& in, const std::string& source) {
  SessionScript script;
  std::string raw;
  int lineno = 0;
  double last_t = -1.0;
  std::vector<std::string> seen_globals;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    if (tokens.size() < 3) fail_at(source, lineno, "expected: <t_ms> <peer|-> <verb> [args]");

    const double t = parse_double(tokens[0], source, lineno, "timestamp");
    if (t < 0) fail_at(source, lineno, "negative timestamp");
    if (t < last_t) fail_at(source, lineno, "timestamps must be non-decreasing");
    last_t = t;

    const std::string& verb = tokens[2];
    std::vector<std::string> args(tokens.begin() + 3, tokens.end());

    if (tokens[1] == "-") {
      if (std::find(kGlobalVerbs.begin(), kGlobalVerbs.end(), verb) == kGlobalVerbs.end()) {
        fail_at(source, lineno, "unknown global verb '" + verb + "'");
      }
      if (std::find(seen_globals.begin(), seen_globals.end(), verb) != seen_globals.end()) {
        fail_at(source, lineno, "duplicate global verb '" + verb + "'");
      }
      seen_globals.push_back(verb);
      try {
        if (verb == "duration_ms") {
          if (args.size() != 1) fail_at(source, lineno, "duration_ms takes one value");
          script.duration_ms = parse_double(args[0], source, lineno, "duration");
          if (script.duration_ms <= 0) fail_at(source, lineno, "duration_ms must be positive");
        } else if (verb == "fps") {
          if (args.size() != 1) fail_at(source, lineno, "fps takes one value");
          script.fps = parse_double(args[0], source, lineno, "fps");
          if (script.fps <= 0) fail_at(source, lineno, "fps must be positive");
        } else if (verb == "av_link") {
          script.av_link = link_from_config(args_to_config(args, 0, source, lineno));
        } else if (verb == "state_link") {
          script.state_link = link_from_config(args_to_config(args, 0, source, lineno));
        } else if (verb == "degradation") {
          script.degradation = degradation_from_config(args_to_config(args, 0, source, lineno));
        }
      } catch (const ParseError& e) {
        fail_at(source, lineno, e.what());
      }
      continue;
    }

    const uint32_t peer = static_cast<uint32_t>(parse_u64(tokens[1], source, lineno, "peer id"));
    if (std::find(kPeerVerbs.begin(), kPeerVerbs.end(), verb) == kPeerVerbs.end()) {
      fail_at(source, lineno, "unknown verb '" + verb + "'");
    }
    if (verb == "define") {
      if (script.peers.count(peer)) fail_at(source, lineno, "peer already defined");
      if (static_cast<int>(script.peers.size()) >= kMaxPeers) {
        fail_at(source, lineno, "room full: at most " + std::to_string(kMaxPeers) +
                                    " peers per session");
      }
      try {
        script.peers.emplace(peer, parse_define(peer, args, source, lineno));
      } catch (const ParseError& e) {
        const std::string what = e.what();
        if (what.find(source) == 0) throw;
        fail_at(source, lineno, what);
      }
      continue;
    }
    if (!script.peers.count(peer)) {
      fail_at(source, lineno, "peer " + std::to_string(peer) + " used before define");
    }
    script.commands.push_back({t, peer, verb, std::move(args), lineno});
  }
  return script;
}

SessionScript parse_script_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open script " + path.string());
  return parse_script(in, path.string());
}

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  const size_t idx = std::min(n - 1, static_cast<size_t>(std::ceil(0.95 * double(n))) - 1);
  return v[idx];
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string report_to_string(const MetricsReport& r) {
  std::string out;
  out += "duration_ms=" + fmt("%.3f", r.duration_ms) + "\n";
  out += "fps=" + fmt("%.3f", r.fps) + "\n";
  out += "av_sent=" + std::to_string(r.av_sent) + "\n";
  out += "av_delivered=" + std::to_string(r.av_delivered) + "\n";
  out += "av_dropped=" + std::to_string(r.av_dropped) + "\n";
  out += "state_sent=" + std::to_string(r.state_sent) + "\n";
  out += "state_delivered=" + std::to_string(r.state_delivered) + "\n";
  out += "state_dropped=" + std::to_string(r.state_dropped) + "\n";
  out += "state_rejected=" + std::to_string(r.state_rejected) + "\n";
  out += "latency_count=" + std::to_string(r.av_latencies_ms.size()) + "\n";
  if (!r.av_latencies_ms.empty()) {
    const auto [mn, mx] = std::minmax_element(r.av_latencies_ms.begin(), r.av_latencies_ms.end());
    out += "latency_min_ms=" + fmt("%.3f", *mn) + "\n";
    out += "latency_mean_ms=" + fmt("%.3f", mean_of(r.av_latencies_ms)) + "\n";
    out += "latency_p95_ms=" + fmt("%.3f", percentile95(r.av_latencies_ms)) + "\n";
    out += "latency_max_ms=" + fmt("%.3f", *mx) + "\n";
  }
  out += "throughput_fps=" + fmt("%.3f", double(r.av_delivered) / (r.duration_ms / 1000.0)) + "\n";
  out += "env_depth_frames=" + std::to_string(r.env_rmse_m.size()) + "\n";
  if (!r.env_rmse_m.empty()) {
    out += "env_depth_rmse_m=" + fmt("%.9f", mean_of(r.env_rmse_m)) + "\n";
  }
  out += "self_depth_frames=" + std::to_string(r.self_rmse_m.size()) + "\n";
  if (!r.self_rmse_m.empty()) {
    out += "self_depth_rmse_m=" + fmt("%.9f", mean_of(r.self_rmse_m)) + "\n";
  }
  out += "cloud_frames=" + std::to_string(r.cloud_rmse_m.size()) + "\n";
  if (!r.cloud_rmse_m.empty()) {
    out += "cloud_rmse_m=" + fmt("%.9f", mean_of(r.cloud_rmse_m)) + "\n";
  }
  for (const auto& [peer, digest] : r.state_digests) {
    out += "state_digest_peer_" + std::to_string(peer) + "=" + to_hex(digest) + "\n";
  }
  return out;
}

MetricsReport transport_report_from_logs(const std::vector<LogRecord>& logs, double duration_ms,
                                         double fps) {
  MetricsReport r;
  r.duration_ms = duration_ms;
  r.fps = fps;
  std::map<std::string, std::deque<double>> pending;  // per-channel undropped send times
  for (const auto& rec : logs) {
    const bool av = rec.channel.rfind("av:", 0) == 0;
    const bool state = rec.channel.rfind("state:", 0) == 0;
    if (!av && !state) throw ParseError("unknown channel in log: " + rec.channel);
    if (rec.event == "send") {
      (av ? r.av_sent : r.state_sent)++;
      pending[rec.channel].push_back(rec.time_ms);
    } else if (rec.event == "drop") {
      (av ? r.av_dropped : r.state_dropped)++;
      auto& q = pending[rec.channel];
      if (q.empty()) throw ParseError("drop without matching send in log");
      q.pop_back();  // a drop is logged right after its own send
    } else if (rec.event == "deliver") {
      (av ? r.av_delivered : r.state_delivered)++;
      auto& q = pending[rec.channel];
      if (q.empty()) throw ParseError("deliver without matching send in log");
      const double sent = q.front();
      q.pop_front();  // FIFO per channel
      if (av) r.av_latencies_ms.push_back(rec.time_ms - sent);
    } else {
      throw ParseError("unknown event in log: " + rec.event);
    }
  }
  return r;
}

namespace {

struct PeerRuntime {
  PeerDef def;
  Posed device_pose_local;
  Posed anchor_local;
  bool joined = false;
  std::optional<SceneSpec> env_scene, self_scene;
  std::optional<std::pair<ColorFrame, DepthFrame>> env_files, self_files;
  uint64_t next_seq = 1;
  uint64_t next_frame_seq = 0;
  RoomState replica;
};

class Runner {
 public:
  Runner(const SessionScript& script, const RunOptions& opts)
      : script_(script),
        opts_(opts),
        self_lut_(self_profile()),
        env_lut_(env_profile()),
        self_digest_(params_digest(self_profile())),
        env_digest_(params_digest(env_profile())) {
    deg_seed_ = derive_seed(opts_.seed ^ script_.av_link.seed, 0xD15EA5E);
    for (const auto& [id, def] : script_.peers) {
      PeerRuntime rt;
      rt.def = def;
      rt.anchor_local = def.anchor_pose_local;
      peers_.emplace(id, std::move(rt));
    }
  }

  SessionResult run() {
    const auto wall_start = std::chrono::steady_clock::now();
    for (const auto& cmd : script_.commands) {
      q_.at(cmd.t_ms, [this, &cmd] { do_command(cmd); });
    }
    const double period = 1000.0 / script_.fps;
    for (uint64_t k = 0; k * period < script_.duration_ms; ++k) {
      const double t = double(k) * period;
      for (const auto& [id, rt] : peers_) {
        q_.at(t, [this, id = id, t] { do_capture(id, t); });
      }
    }
    q_.run();

    result_.report.duration_ms = script_.duration_ms;
    result_.report.fps = script_.fps;
    for (auto& [id, rt] : peers_) {
      result_.report.state_digests[id] = state_digest(rt.replica);
      result_.replicas[id] = rt.replica;
    }
    result_.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - wall_start)
                          .count();
    result_.processing_wall_ms = processing_wall_ms_;
    return std::move(result_);
  }

 private:
  using LinkKey = std::pair<uint32_t, uint32_t>;

  const SessionScript& script_;
  RunOptions opts_;
  EventQueue q_;
  std::map<uint32_t, PeerRuntime> peers_;
  std::map<LinkKey, Link> av_links_, state_links_;
  SessionResult result_;
  ColorLUT self_lut_, env_lut_;
  uint64_t self_digest_, env_digest_;
  uint64_t deg_seed_ = 0;
  double processing_wall_ms_ = 0;

  Link& link_for(std::map<LinkKey, Link>& links, const LinkModel& model, uint32_t s, uint32_t r) {
    const LinkKey key{s, r};
    auto it = links.find(key);
    if (it == links.end()) {
      LinkModel m = model;
      m.seed = derive_seed(derive_seed(opts_.seed ^ model.seed, s), r);
      it = links.emplace(key, Link(m)).first;
    }
    return it->second;
  }

  void log(double t, const std::string& channel, const char* event, size_t size) {
    result_.events.push_back({t, channel, event, size});
  }

  Posed anchor_rel_pose(const PeerRuntime& rt) const {
    return to_anchor_frame(rt.device_pose_local, AnchorFrame<double>{rt.anchor_local});
  }

  void apply_to_replica(PeerRuntime& rt, const Message& m) {
    try {
      rt.replica = apply(rt.replica, m);
    } catch (const StateError&) {
      ++result_.report.state_rejected;
    }
  }

  // Sends m from its sender to every other defined peer over the state
  // channel and applies it to the sender's own replica immediately.
  void broadcast_state(const Message& m, double t, bool reliable) {
    auto bytes = std::make_shared<const std::vector<uint8_t>>(encode_message(m));
    apply_to_replica(peers_.at(m.sender), m);
    for (auto& [rid, receiver] : peers_) {
      if (rid == m.sender) continue;
      const std::string channel =
          "state:" + std::to_string(m.sender) + ":" + std::to_string(rid);
      Link& link = link_for(state_links_, script_.state_link, m.sender, rid);
      log(t, channel, "send", bytes->size());
      ++result_.report.state_sent;
      const auto delivery = link.schedule(t, reliable);
      if (!delivery) {
        log(t, channel, "drop", bytes->size());
        ++result_.report.state_dropped;
        continue;
      }
      q_.at(*delivery, [this, rid = rid, bytes, channel, t2 = *delivery] {
        log(t2, channel, "deliver", bytes->size());
        ++result_.report.state_delivered;
        apply_to_replica(peers_.at(rid), decode_message(*bytes));
      });
    }
  }

  uint64_t take_seq(PeerRuntime& rt) { return rt.next_seq++; }

  void render_sources(const PeerRuntime& rt, bool self, ColorFrame& color, DepthFrame& depth,
                      bool& have) const {
    const auto& files = self ? rt.self_files : rt.env_files;
    const auto& scene = self ? rt.self_scene : rt.env_scene;
    if (files) {
      color = files->first;
      depth = files->second;
      have = true;
    } else if (scene) {
      color = render_scene_color(*scene, rt.def.intrinsics);
      depth = render_scene_depth(*scene, rt.def.intrinsics);
      have = true;
    } else {
      have = false;
    }
  }

  void do_capture(uint32_t id, double t) {
    PeerRuntime& rt = peers_.at(id);
    if (!rt.joined) return;
    const PeerState* self_state = nullptr;
    const auto it = rt.replica.peers.find(id);
    if (it == rt.replica.peers.end()) return;
    self_state = &it->second;

    ColorFrame self_color, env_color;
    DepthFrame self_depth, env_depth;
    bool have_self = false, have_env = false;
    render_sources(rt, true, self_color, self_depth, have_self);
    render_sources(rt, false, env_color, env_depth, have_env);

    std::optional<ColorFrame> q_self_c, q_self_d, q_env_c, q_env_d;
    std::shared_ptr<const DepthFrame> self_truth, env_truth;
    if (have_self && self_state->self_rep != SelfRep::kOff) {
      q_self_c = self_color;
      if (self_state->self_rep == SelfRep::kHologram3D) {
        q_self_d = encode_depth(self_depth, self_lut_);
        self_truth = std::make_shared<const DepthFrame>(self_depth);
      }
    }
    if (have_env && self_state->env_rep != EnvRep::kOff) {
      q_env_c = env_color;
      if (self_state->env_rep == EnvRep::kHologram) {
        q_env_d = encode_depth(env_depth, env_lut_);
        env_truth = std::make_shared<const DepthFrame>(env_depth);
      }
    }
    if (!q_self_c && !q_self_d && !q_env_c && !q_env_d) return;

    const uint64_t seq = rt.next_frame_seq++;
    const uint64_t ts_us = static_cast<uint64_t>(std::llround(t * 1000.0));
    const CompositeFrame composite =
        pack(q_self_c, q_self_d, q_env_c, q_env_d, ts_us, seq, self_digest_, env_digest_);
    auto bytes = std::make_shared<const std::vector<uint8_t>>(serialize(composite));

    for (auto& [rid, receiver] : peers_) {
      if (rid == id) continue;
      const std::string channel = "av:" + std::to_string(id) + ":" + std::to_string(rid);
      Link& link = link_for(av_links_, script_.av_link, id, rid);
      log(t, channel, "send", bytes->size());
      ++result_.report.av_sent;
      const auto delivery = link.schedule(t);
      if (!delivery) {
        log(t, channel, "drop", bytes->size());
        ++result_.report.av_dropped;
        continue;
      }
      q_.at(*delivery,
            [this, rid = rid, sid = id, bytes, self_truth, env_truth, channel, t,
             t2 = *delivery] {
              log(t2, channel, "deliver", bytes->size());
              deliver_av(rid, sid, *bytes, self_truth.get(), env_truth.get(), t, t2);
            });
    }
  }

  // RMSE between decoded bin centers and ground truth over pixels with
  // valid truth; a decoded invalid counts as depth 0 (full error).
  static double depth_rmse(const std::vector<int>& bins, const ColorLUT& lut,
                           const DepthFrame& truth) {
    double sum = 0;
    size_t n = 0;
    for (size_t i = 0; i < truth.samples.size(); ++i) {
      if (truth.samples[i] == 0) continue;
      const double err = lut.bin_center_m(bins[i]) - truth.samples[i] / 1000.0;
      sum += err * err;
      ++n;
    }
    return n == 0 ? 0.0 : std::sqrt(sum / double(n));
  }

  void deliver_av(uint32_t rid, uint32_t sid, const std::vector<uint8_t>& bytes,
                  const DepthFrame* self_truth, const DepthFrame* env_truth, double sent_t,
                  double t) {
    const auto proc_start = std::chrono::steady_clock::now();
    ++result_.report.av_delivered;
    result_.report.av_latencies_ms.push_back(t - sent_t);

    const CompositeFrame received =
        degrade(parse_composite(bytes), script_.degradation, derive_seed(deg_seed_, sid));
    const UnpackedComposite parts = unpack(received);
    const Intrinsics<double>& k = script_.peers.at(sid).intrinsics;

    if (parts.frames[kSelfDepth] && self_truth) {
      const auto bins = decode_bins(*parts.frames[kSelfDepth], self_lut_);
      result_.report.self_rmse_m.push_back(depth_rmse(bins, self_lut_, *self_truth));
    }
    if (parts.frames[kEnvDepth] && env_truth) {
      const auto bins = decode_bins(*parts.frames[kEnvDepth], env_lut_);
      result_.report.env_rmse_m.push_back(depth_rmse(bins, env_lut_, *env_truth));

      // Cloud RMSE over pixels valid on both sides; rigid pose cancels in
      // the pairwise differences, so camera-frame arithmetic is exact.
      double sum = 0;
      size_t n = 0;
      DepthFrame decoded;
      decoded.width = env_truth->width;
      decoded.height = env_truth->height;
      decoded.samples.resize(env_truth->samples.size());
      for (int v = 0; v < env_truth->height; ++v) {
        for (int u = 0; u < env_truth->width; ++u) {
          const size_t i = static_cast<size_t>(v) * env_truth->width + u;
          const uint16_t dec_mm = env_lut_.depth_mm_for_bin(bins[i]);
          decoded.samples[i] = dec_mm;
          const uint16_t tru_mm = env_truth->samples[i];
          if (tru_mm == 0 || dec_mm == 0) continue;
          const Eigen::Vector3d a = unproject<double>(u, v, tru_mm / 1000.0, k);
          const Eigen::Vector3d b = unproject<double>(u, v, dec_mm / 1000.0, k);
          sum += (a - b).squaredNorm();
          ++n;
        }
      }
      if (n > 0) result_.report.cloud_rmse_m.push_back(std::sqrt(sum / double(n)));

      if (opts_.store_clouds) {
        PeerRuntime& receiver = peers_.at(rid);
        const auto sp = receiver.replica.peers.find(sid);
        if (sp != receiver.replica.peers.end() && parts.frames[kEnvColor]) {
          result_.latest_env_clouds[rid][sid] =
              reconstruct_hologram(*parts.frames[kEnvColor], decoded, k, sp->second.pose);
        }
      }
    }
    processing_wall_ms_ += std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - proc_start)
                               .count();
  }

  void do_command(const ScriptCommand& cmd) {
    PeerRuntime& rt = peers_.at(cmd.peer);
    const std::string& source = "script";
    const auto need_joined = [&] {
      if (!rt.joined) {
        fail_at(source, cmd.line, "'" + cmd.verb + "' requires peer " +
                                      std::to_string(cmd.peer) + " to have joined");
      }
    };
    const auto need_args = [&](size_t n, const char* usage) {
      if (cmd.args.size() != n) fail_at(source, cmd.line, std::string("usage: ") + usage);
    };

    if (cmd.verb == "join") {
      rt.joined = true;
      broadcast_state({cmd.peer, take_seq(rt), Join{}}, cmd.t_ms, true);
    } else if (cmd.verb == "leave") {
      need_joined();
      rt.joined = false;
      broadcast_state({cmd.peer, take_seq(rt), Leave{}}, cmd.t_ms, true);
    } else if (cmd.verb == "pose") {
      rt.device_pose_local = parse_pose7(cmd.args, 0, source, cmd.line);
      if (rt.joined) {
        const uint64_t ts_us = static_cast<uint64_t>(std::llround(cmd.t_ms * 1000.0));
        broadcast_state({cmd.peer, take_seq(rt), PoseUpdate{anchor_rel_pose(rt), ts_us}},
                        cmd.t_ms, false);
      }
    } else if (cmd.verb == "anchor") {
      rt.anchor_local = parse_pose7(cmd.args, 0, source, cmd.line);
      if (rt.joined) {
        broadcast_state({cmd.peer, take_seq(rt), AnchorRepositioned{}}, cmd.t_ms, true);
      }
    } else if (cmd.verb == "selfrep") {
      need_joined();
      need_args(1, "selfrep <Hologram3D|SpatialVideo|SpatialVideoNoBackground|Off>");
      SelfRep rep;
      if (cmd.args[0] == "Hologram3D") rep = SelfRep::kHologram3D;
      else if (cmd.args[0] == "SpatialVideo") rep = SelfRep::kSpatialVideo;
      else if (cmd.args[0] == "SpatialVideoNoBackground") rep = SelfRep::kSpatialVideoNoBackground;
      else if (cmd.args[0] == "Off") rep = SelfRep::kOff;
      else fail_at(source, cmd.line, "unknown self representation '" + cmd.args[0] + "'");
      broadcast_state({cmd.peer, take_seq(rt), SelfRepChange{rep}}, cmd.t_ms, true);
    } else if (cmd.verb == "envrep") {
      need_joined();
      need_args(1, "envrep <Hologram|VideoFeed|Off>");
      EnvRep rep;
      if (cmd.args[0] == "Hologram") rep = EnvRep::kHologram;
      else if (cmd.args[0] == "VideoFeed") rep = EnvRep::kVideoFeed;
      else if (cmd.args[0] == "Off") rep = EnvRep::kOff;
      else fail_at(source, cmd.line, "unknown env representation '" + cmd.args[0] + "'");
      broadcast_state({cmd.peer, take_seq(rt), EnvRepChange{rep}}, cmd.t_ms, true);
    } else if (cmd.verb == "mode") {
      need_joined();
      need_args(1, "mode <AR|Screen>");
      CallMode mode;
      if (cmd.args[0] == "AR") mode = CallMode::kAr;
      else if (cmd.args[0] == "Screen") mode = CallMode::kScreen;
      else fail_at(source, cmd.line, "unknown mode '" + cmd.args[0] + "'");
      broadcast_state({cmd.peer, take_seq(rt), ModeSwitch{mode}}, cmd.t_ms, true);
    } else if (cmd.verb == "scene" || cmd.verb == "self_scene") {
      if (cmd.args.empty()) fail_at(source, cmd.line, "usage: scene <name> [key=value...]");
      try {
        const SceneSpec spec = scene_from_args(
            cmd.args[0], std::vector<std::string>(cmd.args.begin() + 1, cmd.args.end()));
        (cmd.verb == "scene" ? rt.env_scene : rt.self_scene) = spec;
      } catch (const ParseError& e) {
        fail_at(source, cmd.line, e.what());
      }
    } else if (cmd.verb == "env_files" || cmd.verb == "self_files") {
      const Config cfg = args_to_config(cmd.args, 0, source, cmd.line);
      cfg.require_known({"color", "depth"});
      try {
        ColorFrame color = read_ppm(opts_.base_dir / cfg.get_str("color"));
        DepthFrame depth = read_pgm16(opts_.base_dir / cfg.get_str("depth"));
        if (color.width != depth.width || color.height != depth.height) {
          fail_at(source, cmd.line, "color/depth dimensions differ");
        }
        (cmd.verb == "env_files" ? rt.env_files : rt.self_files) =
            std::make_pair(std::move(color), std::move(depth));
      } catch (const ParseError& e) {
        fail_at(source, cmd.line, e.what());
      }
    } else if (cmd.verb == "snapshot") {
      need_joined();
      need_args(2, "snapshot <id> <VideoFrame|Hologram>");
      const uint64_t snap_id = parse_u64(cmd.args[0], source, cmd.line, "snapshot id");
      SnapshotKind kind;
      if (cmd.args[1] == "VideoFrame") kind = SnapshotKind::kVideoFrame;
      else if (cmd.args[1] == "Hologram") kind = SnapshotKind::kHologram;
      else fail_at(source, cmd.line, "unknown snapshot kind '" + cmd.args[1] + "'");

      ColorFrame color;
      DepthFrame depth;
      bool have = false;
      render_sources(rt, false, color, depth, have);
      if (!have) fail_at(source, cmd.line, "snapshot requires an env source");
      const uint64_t latest = rt.next_frame_seq == 0 ? 0 : rt.next_frame_seq - 1;
      const std::string ref =
          "composite:" + std::to_string(cmd.peer) + ":" + std::to_string(latest) + ":env";
      Message msg;
      try {
        msg = take_snapshot(rt.replica, cmd.peer, take_seq(rt), snap_id, kind, ref,
                            anchor_rel_pose(rt), rt.def.intrinsics);
      } catch (const StateError& e) {
        fail_at(source, cmd.line, e.what());
      }
      SnapshotArtifact art;
      art.id = snap_id;
      art.creator = cmd.peer;
      art.kind = kind;
      art.capture_pose = anchor_rel_pose(rt);
      art.k = rt.def.intrinsics;
      art.color = std::move(color);
      if (kind == SnapshotKind::kHologram) {
        art.depth = decode_depth(encode_depth(depth, env_lut_), env_lut_);
      }
      art.payload_ref = ref;
      result_.snapshots.push_back(std::move(art));
      broadcast_state(msg, cmd.t_ms, true);
    } else if (cmd.verb == "snapshot_visibility") {
      need_joined();
      need_args(2, "snapshot_visibility <id> <0|1>");
      const uint64_t snap_id = parse_u64(cmd.args[0], source, cmd.line, "snapshot id");
      const uint64_t vis = parse_u64(cmd.args[1], source, cmd.line, "visibility flag");
      if (vis > 1) fail_at(source, cmd.line, "visibility flag must be 0 or 1");
      broadcast_state({cmd.peer, take_seq(rt), SnapshotVisibility{snap_id, vis == 1}}, cmd.t_ms,
                      true);
    } else if (cmd.verb == "snapshot_delete") {
      need_joined();
      need_args(1, "snapshot_delete <id>");
      const uint64_t snap_id = parse_u64(cmd.args[0], source, cmd.line, "snapshot id");
      broadcast_state({cmd.peer, take_seq(rt), SnapshotDelete{snap_id}}, cmd.t_ms, true);
    } else if (cmd.verb == "pointer") {
      need_joined();
      need_args(3, "pointer <u> <v> <0|1 active>");
      const int u = static_cast<int>(parse_u64(cmd.args[0], source, cmd.line, "pixel u"));
      const int v = static_cast<int>(parse_u64(cmd.args[1], source, cmd.line, "pixel v"));
      const uint64_t active = parse_u64(cmd.args[2], source, cmd.line, "active flag");
      if (active > 1) fail_at(source, cmd.line, "active flag must be 0 or 1");
      Pointer p;
      try {
        p = point_at(u, v, rt.def.intrinsics, anchor_rel_pose(rt));
      } catch (const ParseError& e) {
        fail_at(source, cmd.line, e.what());
      }
      p.active = active == 1;
      broadcast_state({cmd.peer, take_seq(rt), p}, cmd.t_ms, false);
    }
  }
};

}  // namespace

SessionResult run_session(const SessionScript& script, const RunOptions& opts) {
  Runner runner(script, opts);
  return runner.run();
}

}  // namespace dualstream
