// semabr: trace-driven adaptive streaming experiments.
//
//   semabr run --config cfg.json [--seed N] [--out DIR]
//   semabr batch --config cfg.json [--seed N] [--out DIR] [--jobs N]
//   semabr synth-trace --seed N --duration S --states 1:0.3,3:0.8 [--out FILE]
//   semabr synth-manifest --seed N [--chunks K] [--ladder 300,750,...] [--out FILE]
//   semabr latency-report [--config cfg.json]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semabr/error.hpp"
#include "semabr/experiment.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<semabr::MarkovState> parse_states(const std::string& spec) {
  std::vector<semabr::MarkovState> states;
  for (const auto& item : split(spec, ',')) {
    const auto parts = split(item, ':');
    if (parts.empty() || parts.size() > 2)
      throw semabr::ValidationError("--states expects mean[:std] entries, got '" + item + "'");
    semabr::MarkovState st;
    st.mean_mbps = std::stod(parts[0]);
    st.std_mbps = parts.size() == 2 ? std::stod(parts[1]) : 0.0;
    states.push_back(st);
  }
  return states;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

semabr::RunConfig load(const std::string& config, std::optional<std::uint64_t> seed,
                       const std::string& out) {
  auto cfg = semabr::load_config(config);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.out_dir = out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven adaptive bitrate streaming simulator with semantic delivery"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "Simulate one (policy, trace) session");
  run_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run_cmd->add_option("--seed", seed, "Override the configured seed");
  run_cmd->add_option("--out", out, "Output directory");

  auto* batch_cmd = app.add_subcommand("batch", "Simulate every (policy, trace) pair");
  batch_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
  batch_cmd->add_option("--seed", seed, "Override the configured seed");
  batch_cmd->add_option("--out", out, "Output directory");
  batch_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::uint64_t synth_seed = 1;
  double duration = 320.0;
  double step = 1.0;
  double transition = 0.1;
  std::string states = "1.0:0.3,3.0:0.8";
  std::string name = "synth";
  auto* trace_cmd = app.add_subcommand("synth-trace", "Write a synthetic throughput trace");
  trace_cmd->add_option("--seed", synth_seed, "RNG seed");
  trace_cmd->add_option("--duration", duration, "Trace length in seconds");
  trace_cmd->add_option("--step", step, "Sample spacing in seconds");
  trace_cmd->add_option("--transition-prob", transition, "Per-step state switch probability");
  trace_cmd->add_option("--states", states, "Comma list of mean_mbps[:std_mbps]");
  trace_cmd->add_option("--out", out, "Output file (default stdout)");

  std::size_t chunks = 48;
  double chunk_duration = 4.0;
  double noise = 0.1;
  std::string ladder = "300,750,1200,1850,2850,4300";
  semabr::GopStructure gop;
  auto* manifest_cmd = app.add_subcommand("synth-manifest", "Write a synthetic chunk manifest");
  manifest_cmd->add_option("--seed", synth_seed, "RNG seed");
  manifest_cmd->add_option("--chunks", chunks, "Number of chunks");
  manifest_cmd->add_option("--chunk-duration", chunk_duration, "Chunk length in seconds");
  manifest_cmd->add_option("--size-noise", noise, "Per-chunk size jitter fraction");
  manifest_cmd->add_option("--ladder", ladder, "Comma list of bitrates in kbps");
  manifest_cmd->add_option("--pattern", gop.pattern, "GOP pattern over I/P/B");
  manifest_cmd->add_option("--width", gop.width, "Frame width");
  manifest_cmd->add_option("--height", gop.height, "Frame height");
  manifest_cmd->add_option("--fps", gop.fps, "Frames per second");
  manifest_cmd->add_option("--out", out, "Output file (default stdout)");

  auto* latency_cmd = app.add_subcommand("latency-report", "Print latency tables");
  latency_cmd->add_option("--config", config_path, "Run configuration (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto cfg = load(config_path, seed, out);
      const auto a = semabr::run(cfg);
      std::cout << "wrote " << a.session_csv.string() << ", " << a.summary_json.string()
                << ", " << a.cdf_csv.string() << "\n";
      std::cout << "mean QoE per chunk: " << semabr::fmt6(a.outcome.log.mean_qoe()) << "\n";
    } else if (*batch_cmd) {
      const auto cfg = load(config_path, seed, out);
      const auto a = semabr::batch(cfg, jobs);
      std::cout << "wrote " << a.sessions.size() << " sessions, "
                << a.summary_csv.string() << ", " << a.comparison_csv.string() << "\n";
    } else if (*trace_cmd) {
      const auto t = semabr::synth_trace(synth_seed, duration, parse_states(states),
                                         transition, step, name);
      emit("# synthetic trace seed=" + std::to_string(synth_seed) + "\n" + t.to_text(), out);
    } else if (*manifest_cmd) {
      std::vector<int> kbps;
      for (const auto& s : split(ladder, ',')) kbps.push_back(std::stoi(s));
      const auto m = semabr::generate_manifest(synth_seed, semabr::BitrateLadder(kbps),
                                               chunks, chunk_duration, gop, noise);
      emit(m.to_json(), out);
    } else if (*latency_cmd) {
      semabr::LatencyProfile profile = semabr::LatencyProfile::defaults();
      semabr::E2EComparisonConfig e2e;
      if (!config_path.empty()) {
        const auto cfg = semabr::load_config(config_path);
        profile = cfg.semantic.latency;
        e2e = cfg.latency_report;
      }
      std::cout << semabr::latency_report(profile, e2e);
    }
  } catch (const std::exception& e) {
    std::cerr << "semabr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
