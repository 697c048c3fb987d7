// dualstream: codec, composite, reconstruction, session-simulation, and
// benchmark front-end. Exit codes: 0 ok, 1 runtime failure, 2 bad input.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dualstream/bench.hpp"
#include "dualstream/composite.hpp"
#include "dualstream/depth_codec.hpp"
#include "dualstream/error.hpp"
#include "dualstream/image.hpp"
#include "dualstream/log.hpp"
#include "dualstream/pointcloud.hpp"
#include "dualstream/session.hpp"

namespace {

using namespace dualstream;

ColorizationParams params_from_file(const std::string& path, const ColorizationParams& fallback) {
  if (path.empty()) return fallback;
  return params_from_config(Config::from_file(path));
}

std::vector<uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError("short write to " + path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ParseError("short write to " + path.string());
}

Posed pose_from_flag(const std::string& csv) {
  if (csv.empty()) return {};
  double v[7];
  char trailing;
  if (std::sscanf(csv.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf%c", &v[0], &v[1], &v[2], &v[3], &v[4],
                  &v[5], &v[6], &trailing) != 7) {
    throw ParseError("--pose must be x,y,z,qw,qx,qy,qz");
  }
  const Eigen::Quaterniond q(v[3], v[4], v[5], v[6]);
  if (q.norm() < 1e-9) throw ParseError("--pose has a zero quaternion");
  return make_pose<double>({v[0], v[1], v[2]}, q);
}

int cmd_encode(const std::string& input, const std::string& output, const std::string& config) {
  const ColorizationParams params = params_from_file(config, env_profile());
  const DepthFrame depth = read_pgm16(input);
  write_ppm(output, encode_depth(depth, params));
  DS_LOG_INFO << "encoded " << input << " (" << depth.width << "x" << depth.height << ") -> "
              << output;
  return 0;
}

int cmd_decode(const std::string& input, const std::string& output, const std::string& config) {
  const ColorizationParams params = params_from_file(config, env_profile());
  const ColorFrame color = read_ppm(input);
  write_pgm16(output, decode_depth(color, params));
  DS_LOG_INFO << "decoded " << input << " -> " << output;
  return 0;
}

int cmd_pack(const std::string& self_color, const std::string& self_depth,
             const std::string& env_color, const std::string& env_depth, uint64_t timestamp_us,
             uint64_t seq, const std::string& self_params, const std::string& env_params,
             const std::string& output) {
  const auto load = [](const std::string& path) -> std::optional<ColorFrame> {
    if (path.empty()) return std::nullopt;
    return read_ppm(path);
  };
  const CompositeFrame f =
      pack(load(self_color), load(self_depth), load(env_color), load(env_depth), timestamp_us,
           seq, params_digest(params_from_file(self_params, self_profile())),
           params_digest(params_from_file(env_params, env_profile())));
  write_binary(output, serialize(f));
  DS_LOG_INFO << "packed composite seq=" << seq << " cell=" << f.cell_width() << "x"
              << f.cell_height() << " -> " << output;
  return 0;
}

int cmd_unpack(const std::string& input, const std::string& out_dir) {
  const CompositeFrame f = parse_composite(read_binary(input));
  const UnpackedComposite parts = unpack(f);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  static const char* kNames[4] = {"self_color", "self_depth", "env_color", "env_depth"};
  std::cout << "seq=" << parts.seq << "\n";
  std::cout << "timestamp_us=" << parts.timestamp_us << "\n";
  for (int q = 0; q < 4; ++q) {
    if (!parts.frames[q]) {
      std::cout << kNames[q] << "=absent\n";
      continue;
    }
    const auto path = dir / (std::string(kNames[q]) + ".ppm");
    write_ppm(path, *parts.frames[q]);
    std::cout << kNames[q] << "=" << path.string() << " " << parts.frames[q]->width << "x"
              << parts.frames[q]->height;
    if (q == kSelfDepth || q == kEnvDepth) std::cout << " digest=" << to_hex(parts.digests[q]);
    std::cout << "\n";
  }
  return 0;
}

int cmd_reconstruct(const std::string& input, const std::string& output, const std::string& which,
                    const std::string& config, const std::string& pose_csv) {
  const CompositeFrame f = parse_composite(read_binary(input));
  const UnpackedComposite parts = unpack(f);
  const bool env = which == "env";
  const int color_q = env ? kEnvColor : kSelfColor;
  const int depth_q = env ? kEnvDepth : kSelfDepth;
  if (!parts.frames[color_q] || !parts.frames[depth_q]) {
    throw ParseError("composite lacks the " + which + " color+depth quadrants");
  }

  ColorizationParams params = env ? env_profile() : self_profile();
  std::optional<double> hfov, vfov;
  Config cfg;
  if (!config.empty()) {
    cfg = Config::from_file(config);
    cfg.require_known({"scheme", "d_max_m", "lut_bins", "invalid_color", "hfov", "vfov", "fx",
                       "fy", "cx", "cy"});
    Config codec_cfg;
    for (const char* key : {"scheme", "d_max_m", "lut_bins", "invalid_color"}) {
      if (cfg.has(key)) codec_cfg.set(key, cfg.get_str(key));
    }
    params = params_from_config(codec_cfg);
  }
  if (parts.digests[depth_q] != 0 && parts.digests[depth_q] != params_digest(params)) {
    throw ParseError("composite " + which +
                     " depth used different colorization params than the decode config");
  }

  const ColorFrame& color = *parts.frames[color_q];
  const DepthFrame depth = decode_depth(*parts.frames[depth_q], params);
  Intrinsics<double> k;
  if (cfg.has("fx")) {
    k = {cfg.get_double("fx"), cfg.get_double("fy"), cfg.get_double("cx"), cfg.get_double("cy"),
         depth.width, depth.height};
    if (!intrinsics_are_valid(k)) throw ParseError("invalid intrinsics in " + config);
  } else {
    k = intrinsics_from_fov<double>(cfg.get_double("hfov", 69.0), cfg.get_double("vfov", 42.0),
                                    depth.width, depth.height);
  }

  const PointCloud cloud = reconstruct_hologram(color, depth, k, pose_from_flag(pose_csv));
  write_text(output, export_ply(cloud));
  DS_LOG_INFO << "reconstructed " << cloud.points.size() << " points -> " << output;
  return 0;
}

int cmd_simulate(const std::string& script_path, const std::string& out_dir, uint64_t seed) {
  const SessionScript script = parse_script_file(script_path);
  RunOptions opts;
  opts.seed = seed;
  opts.base_dir = std::filesystem::path(script_path).parent_path();
  const SessionResult result = run_session(script, opts);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const std::string report = report_to_string(result.report);
  write_text(dir / "report.txt", report);

  std::string log_text;
  for (const auto& rec : result.events) log_text += format_log_record(rec) + "\n";
  write_text(dir / "events.log", log_text);

  // Wall-clock measurements are real time, not virtual time, so they live
  // apart from the deterministic report.
  char timing[160];
  std::snprintf(timing, sizeof(timing), "wall_ms=%.3f\nprocessing_wall_ms=%.3f\n",
                result.wall_ms, result.processing_wall_ms);
  write_text(dir / "timing.txt", timing);

  for (const auto& snap : result.snapshots) {
    const std::string stem = "snapshot_" + std::to_string(snap.id);
    if (snap.kind == SnapshotKind::kHologram && snap.depth) {
      const PointCloud cloud =
          reconstruct_hologram(snap.color, *snap.depth, snap.k, snap.capture_pose);
      write_text(dir / (stem + ".ply"), export_ply(cloud));
    } else {
      write_ppm(dir / (stem + ".ppm"), snap.color);
    }
  }

  std::cout << report;
  return 0;
}

int cmd_bench(int width, int height, uint64_t iterations) {
  std::cout << bench_to_string(run_bench(width, height, iterations));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DualStream spatial-communication pipeline tools"};
  app.require_subcommand(1);

  std::string input, output, config, out_dir = ".";
  std::string self_color, self_depth, env_color, env_depth, self_params, env_params;
  std::string which = "env", pose_csv;
  uint64_t seed = 0, seq = 0, timestamp_us = 0, iterations = 60;
  int width = 640, height = 480;

  auto* encode = app.add_subcommand("encode", "Colorize a 16-bit PGM depth map into a PPM");
  encode->add_option("input", input, "16-bit PGM depth map")->required();
  encode->add_option("output", output, "PPM destination")->required();
  encode->add_option("--config", config, "colorization params (key=value file)");

  auto* decode = app.add_subcommand("decode", "Recover a 16-bit PGM depth map from a PPM");
  decode->add_option("input", input, "colorized PPM")->required();
  decode->add_option("output", output, "PGM destination")->required();
  decode->add_option("--config", config, "colorization params (key=value file)");

  auto* pack_cmd = app.add_subcommand("pack", "Bundle up to four quadrants into a .dscf file");
  pack_cmd->add_option("output", output, ".dscf destination")->required();
  pack_cmd->add_option("--self-color", self_color, "PPM path");
  pack_cmd->add_option("--self-depth", self_depth, "colorized depth PPM path");
  pack_cmd->add_option("--env-color", env_color, "PPM path");
  pack_cmd->add_option("--env-depth", env_depth, "colorized depth PPM path");
  pack_cmd->add_option("--seq", seq, "composite sequence number");
  pack_cmd->add_option("--timestamp-us", timestamp_us, "capture timestamp (us)");
  pack_cmd->add_option("--self-params", self_params, "self-depth colorization params file");
  pack_cmd->add_option("--env-params", env_params, "env-depth colorization params file");

  auto* unpack_cmd = app.add_subcommand("unpack", "Split a .dscf file back into PPM quadrants");
  unpack_cmd->add_option("input", input, ".dscf file")->required();
  unpack_cmd->add_option("--out-dir", out_dir, "destination directory");

  auto* reconstruct = app.add_subcommand("reconstruct", "Export a hologram point cloud as PLY");
  reconstruct->add_option("input", input, ".dscf file")->required();
  reconstruct->add_option("output", output, "PLY destination")->required();
  reconstruct->add_option("--which", which, "env | self")
      ->check(CLI::IsMember({"env", "self"}));
  reconstruct->add_option("--config", config, "codec + intrinsics params file");
  reconstruct->add_option("--pose", pose_csv, "camera pose x,y,z,qw,qx,qy,qz");

  auto* simulate = app.add_subcommand("simulate", "Run a scripted multi-peer session");
  simulate->add_option("script", input, "session script")->required();
  simulate->add_option("--out-dir", out_dir, "artifact directory");
  simulate->add_option("--seed", seed, "session RNG seed");

  auto* bench = app.add_subcommand("bench", "Measure pipeline throughput on synthetic frames");
  bench->add_option("--width", width, "quadrant width")->check(CLI::PositiveNumber);
  bench->add_option("--height", height, "quadrant height")->check(CLI::PositiveNumber);
  bench->add_option("--iterations", iterations, "frames to push through the loop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (encode->parsed()) return cmd_encode(input, output, config);
    if (decode->parsed()) return cmd_decode(input, output, config);
    if (pack_cmd->parsed()) {
      return cmd_pack(self_color, self_depth, env_color, env_depth, timestamp_us, seq,
                      self_params, env_params, output);
    }
    if (unpack_cmd->parsed()) return cmd_unpack(input, out_dir);
    if (reconstruct->parsed()) return cmd_reconstruct(input, output, which, config, pose_csv);
    if (simulate->parsed()) return cmd_simulate(input, out_dir, seed);
    if (bench->parsed()) return cmd_bench(width, height, iterations);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const WireError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
