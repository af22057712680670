#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "semabr/diffusion.hpp"
#include "semabr/latency.hpp"
#include "semabr/media.hpp"
#include "semabr/policy.hpp"
#include "semabr/session.hpp"
#include "semabr/trace.hpp"

namespace semabr {

struct PlayerConfig {
  double buffer_cap_s = 60.0;
  std::size_t history_len = 8;
  std::size_t lookahead = 5;  // rows of upcoming sizes exposed to policies
  void validate(double chunk_duration_s) const;
};

// Parameters of the semantic (latent + metadata) delivery path.
struct SemanticContext {
  SemanticProfile profile;
  ChannelModel channel;
  NoiseSchedule schedule = NoiseSchedule::standard();
  LatencyProfile latency = LatencyProfile::defaults();
  double kappa = 0.5;
  // Per-chunk CSI error drawn uniformly from [-spread, +spread] dB on top of
  // channel.csi_error_db.
  double csi_error_spread_db = 0.0;
  // Diagnostic latent pipeline: forward depth for dependent-frame
  // refinement and latent dimension.
  int refine_steps = 50;
  std::size_t latent_dim = 64;

  void validate() const;
};

// 1 - (1 - abar_r) * kappa, clamped to [0, 1].
double effective_quality(const NoiseSchedule& sched, int r, double kappa);

// What it costs to deliver each (chunk, bitrate) and how good it looks.
// Plain delivery ships the encoded chunk; semantic delivery ships I-frame
// latents plus P/B metadata and pays the per-chunk processing latency.
class DeliveryModel {
 public:
  static DeliveryModel plain(const ChunkManifest& manifest);
  static DeliveryModel semantic(const ChunkManifest& manifest,
                                const SemanticContext& ctx, std::uint64_t seed);

  bool is_semantic() const { return semantic_; }
  std::int64_t bytes(std::size_t k, std::size_t m) const;
  double processing_s() const { return processing_s_; }
  double quality(std::size_t k) const { return quality_.at(k); }
  int denoise_step(std::size_t k) const { return steps_.empty() ? 0 : steps_.at(k); }
  std::optional<double> estimated_snr_db(std::size_t k) const;
  std::int64_t semantic_bytes() const { return semantic_bytes_; }

 private:
  std::vector<std::vector<std::int64_t>> plain_bytes_;
  bool semantic_ = false;
  std::int64_t semantic_bytes_ = 0;
  double processing_s_ = 0.0;
  std::vector<double> quality_;
  std::vector<int> steps_;
  std::vector<double> est_snr_db_;
};

struct HistoryRecord {
  double throughput_mbps;
  double download_time_s;
};

struct PlayerState {
  double wall_time_s = 0.0;
  double buffer_s = 0.0;
  std::size_t next_chunk = 0;
  std::optional<std::size_t> last_bitrate_index;
  std::deque<HistoryRecord> history;  // oldest first, at most history_len
  double last_download_time_s = 0.0;
};

struct BufferUpdate {
  double rebuffer_s;
  double buffer_after_s;
  double wait_s;
};

// Stall is max(0, d - buffer) except on the startup chunk. The buffer gains
// one chunk of playback; overflow beyond the cap is waited out.
BufferUpdate advance_buffer(double buffer_s, double download_s,
                            double chunk_duration_s, double buffer_cap_s,
                            bool startup);

struct StepOutcome {
  PlayerState state;
  ChunkResult result;
};

StepOutcome step(const PlayerState& state, const ChunkManifest& manifest,
                 const ThroughputTrace& trace, std::size_t choice,
                 const DeliveryModel& delivery, const PlayerConfig& cfg);

ObservationState observe(const PlayerState& state, const ChunkManifest& manifest,
                         const DeliveryModel& delivery, const PlayerConfig& cfg);

SessionLog run_session(Policy& policy, const ChunkManifest& manifest,
                       const ThroughputTrace& trace, const DeliveryModel& delivery,
                       const PlayerConfig& cfg, const QoEWeights& weights);

}  // namespace semabr
