#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semabr/abr.hpp"
#include "semabr/latency.hpp"
#include "semabr/media.hpp"
#include "semabr/player.hpp"
#include "semabr/trace.hpp"

namespace semabr {

inline constexpr int kConfigSchemaVersion = 1;

struct ManifestSynthSpec {
  std::vector<int> ladder_kbps = BitrateLadder::standard().kbps();
  std::size_t chunk_count = 48;
  double chunk_duration_s = 4.0;
  double size_noise = 0.1;
  GopStructure gop;
};

struct ManifestSource {
  std::optional<std::filesystem::path> path;
  ManifestSynthSpec synth;
};

struct TraceSynthSpec {
  std::string name = "synth";
  double duration_s = 320.0;
  double step_s = 1.0;
  std::vector<MarkovState> states{{1.0, 0.3}, {3.0, 0.8}};
  double transition_prob = 0.1;
  std::optional<std::uint64_t> seed;  // default: derived from the run seed
};

struct TraceSource {
  std::optional<std::filesystem::path> path;
  std::optional<TraceSynthSpec> synth;
};

struct PolicySpec {
  std::string name;
  std::string label;  // file and table key; defaults to name
  PolicyParams params;
  std::optional<bool> semantic;  // delivery override; ldabs implies semantic
};

struct RunConfig {
  std::uint64_t seed = 0;
  ManifestSource manifest;
  std::vector<TraceSource> traces;
  std::optional<std::filesystem::path> trace_dir;
  std::vector<PolicySpec> policies;
  bool semantic_mode = false;
  SemanticContext semantic;
  QoEWeights weights;
  PlayerConfig player;
  double offline_grid_s = 0.5;
  E2EComparisonConfig latency_report;
  std::filesystem::path out_dir = "out";
};

// Parses the JSON run configuration. Relative paths resolve against
// `base_dir`. Throws ValidationError naming the offending field.
RunConfig parse_config(const std::string& json_text,
                       const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

ChunkManifest resolve_manifest(const RunConfig& cfg);
std::vector<ThroughputTrace> resolve_traces(const RunConfig& cfg);

struct SessionOutcome {
  std::string policy_label;
  SessionLog log;
  double qoe_mean_discretized = 0.0;
  std::optional<GopReconstruction> pipeline;  // semantic sessions only
};

// Seed for a (policy, trace) session: run seed + stable hash of the names.
std::uint64_t session_seed(std::uint64_t seed, const std::string& policy,
                           const std::string& trace);

SessionOutcome simulate(const RunConfig& cfg, const PolicySpec& policy,
                        const ChunkManifest& manifest, const ThroughputTrace& trace);

struct RunArtifacts {
  SessionOutcome outcome;
  std::filesystem::path session_csv;
  std::filesystem::path summary_json;
  std::filesystem::path cdf_csv;
};

// First policy against the first trace; writes session.csv, summary.json and
// cdf.csv (per-chunk QoE) under cfg.out_dir.
RunArtifacts run(const RunConfig& cfg);

struct BatchArtifacts {
  std::vector<SessionOutcome> sessions;  // ordered by (policy label, trace)
  std::filesystem::path summary_csv;
  std::filesystem::path comparison_csv;
  std::vector<std::filesystem::path> session_csvs;
  std::vector<std::filesystem::path> cdf_csvs;
};

// Cross product of policies and traces, run on `jobs` worker threads.
// Outputs do not depend on `jobs`.
BatchArtifacts batch(const RunConfig& cfg, unsigned jobs = 1);

std::string summary_json(const SessionOutcome& s, const ChunkManifest& manifest,
                         const RunConfig& cfg);

// Stage table and end-to-end comparison as plain text.
std::string latency_report(const LatencyProfile& profile,
                           const E2EComparisonConfig& cfg);

}  // namespace semabr
