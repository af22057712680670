#include "semabr/player.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "semabr/error.hpp"
#include "semabr/rng.hpp"

namespace semabr {

void PlayerConfig::validate(double chunk_duration_s) const {
  if (!(buffer_cap_s >= chunk_duration_s))
    throw ValidationError("buffer cap must be at least one chunk duration");
  if (history_len < 1) throw ValidationError("history length must be >= 1");
  if (lookahead < 1) throw ValidationError("lookahead must be >= 1");
}

void SemanticContext::validate() const {
  profile.validate();
  channel.validate();
  latency.validate();
  if (!(kappa >= 0.0)) throw ValidationError("kappa must be >= 0");
  if (!(csi_error_spread_db >= 0.0))
    throw ValidationError("csi error spread must be >= 0");
  if (refine_steps < 1 || refine_steps > schedule.steps())
    throw ValidationError("refine_steps must be in [1, T]");
  if (latent_dim < 1) throw ValidationError("latent_dim must be >= 1");
}

double effective_quality(const NoiseSchedule& sched, int r, double kappa) {
  const double q = 1.0 - (1.0 - sched.alpha_bar(r)) * kappa;
  return std::clamp(q, 0.0, 1.0);
}

DeliveryModel DeliveryModel::plain(const ChunkManifest& manifest) {
  DeliveryModel d;
  d.plain_bytes_ = manifest.sizes();
  d.quality_.assign(manifest.chunk_count(), 1.0);
  return d;
}

DeliveryModel DeliveryModel::semantic(const ChunkManifest& manifest,
                                      const SemanticContext& ctx,
                                      std::uint64_t seed) {
  ctx.validate();
  DeliveryModel d;
  d.plain_bytes_ = manifest.sizes();
  d.semantic_ = true;
  d.semantic_bytes_ = semantic_chunk_size(manifest.gop(), ctx.profile,
                                          manifest.frames_per_chunk());
  d.processing_s_ =
      total_latency(ctx.latency, resolution_for_height(manifest.gop().height)) /
      1000.0;
  const std::size_t k_total = manifest.chunk_count();
  d.quality_.resize(k_total);
  d.steps_.resize(k_total);
  d.est_snr_db_.resize(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    double est = ctx.channel.estimated_snr_db();
    if (ctx.csi_error_spread_db > 0.0) {
      Rng rng = make_rng(derive_seed(seed, 5000 + k));
      std::uniform_real_distribution<double> u(-ctx.csi_error_spread_db,
                                               ctx.csi_error_spread_db);
      est += u(rng);
    }
    d.est_snr_db_[k] = est;
    d.steps_[k] = match_step(est, ctx.schedule);
    d.quality_[k] = effective_quality(ctx.schedule, d.steps_[k], ctx.kappa);
  }
  return d;
}

std::int64_t DeliveryModel::bytes(std::size_t k, std::size_t m) const {
  const auto& row = plain_bytes_.at(k);
  if (m >= row.size()) throw ValidationError("bitrate index out of range");
  return semantic_ ? semantic_bytes_ : row[m];
}

std::optional<double> DeliveryModel::estimated_snr_db(std::size_t k) const {
  if (!semantic_) return std::nullopt;
  return est_snr_db_.at(k);
}

BufferUpdate advance_buffer(double buffer_s, double download_s,
                            double chunk_duration_s, double buffer_cap_s,
                            bool startup) {
  BufferUpdate u{};
  u.rebuffer_s = startup ? 0.0 : std::max(0.0, download_s - buffer_s);
  double b = std::max(0.0, buffer_s - download_s) + chunk_duration_s;
  if (b > buffer_cap_s) {
    u.wait_s = b - buffer_cap_s;
    b = buffer_cap_s;
  }
  u.buffer_after_s = b;
  return u;
}

StepOutcome step(const PlayerState& state, const ChunkManifest& manifest,
                 const ThroughputTrace& trace, std::size_t choice,
                 const DeliveryModel& delivery, const PlayerConfig& cfg) {
  const std::size_t k = state.next_chunk;
  if (k >= manifest.chunk_count())
    throw StateError("session finished: all " +
                     std::to_string(manifest.chunk_count()) + " chunks played");
  if (choice >= manifest.bitrate_count())
    throw ValidationError("bitrate index " + std::to_string(choice) +
                          " out of range");

  ChunkResult r;
  r.chunk_index = k;
  r.bitrate_index = choice;
  r.bitrate_kbps = manifest.ladder()[choice];
  r.transmitted_bytes = delivery.bytes(k, choice);
  const Download dl = integrate_download(
      trace, state.wall_time_s, static_cast<double>(r.transmitted_bytes) * 8.0 / 1e6);
  r.network_time_s = dl.duration_s;
  r.processing_time_s = delivery.processing_s();
  r.download_time_s = r.network_time_s + r.processing_time_s;
  r.buffer_before_s = state.buffer_s;

  const BufferUpdate bu = advance_buffer(state.buffer_s, r.download_time_s,
                                         manifest.chunk_duration(),
                                         cfg.buffer_cap_s, k == 0);
  r.rebuffer_s = bu.rebuffer_s;
  r.buffer_after_s = bu.buffer_after_s;
  r.wait_s = bu.wait_s;
  r.throughput_mbps = r.download_time_s > 0.0
                          ? static_cast<double>(r.transmitted_bytes) * 8.0 / 1e6 /
                                r.download_time_s
                          : 0.0;
  r.effective_quality = delivery.quality(k);
  r.denoise_step = delivery.denoise_step(k);

  PlayerState next = state;
  next.wall_time_s = state.wall_time_s + r.download_time_s + r.wait_s;
  next.buffer_s = r.buffer_after_s;
  next.next_chunk = k + 1;
  next.last_bitrate_index = choice;
  next.last_download_time_s = r.download_time_s;
  next.history.push_back({r.throughput_mbps, r.download_time_s});
  while (next.history.size() > cfg.history_len) next.history.pop_front();
  return {std::move(next), r};
}

ObservationState observe(const PlayerState& state, const ChunkManifest& manifest,
                         const DeliveryModel& delivery, const PlayerConfig& cfg) {
  const std::size_t k = state.next_chunk;
  if (k >= manifest.chunk_count()) throw StateError("no chunk left to observe");
  ObservationState o;
  o.chunk_index = k;
  o.chunk_count = manifest.chunk_count();
  o.chunk_duration_s = manifest.chunk_duration();
  o.buffer_cap_s = cfg.buffer_cap_s;
  o.ladder_kbps = manifest.ladder().kbps();

  o.past_throughputs_mbps.assign(cfg.history_len, 0.0);
  o.past_download_times_s.assign(cfg.history_len, 0.0);
  const std::size_t offset = cfg.history_len - state.history.size();
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    o.past_throughputs_mbps[offset + i] = state.history[i].throughput_mbps;
    o.past_download_times_s[offset + i] = state.history[i].download_time_s;
  }

  const std::size_t m = manifest.bitrate_count();
  const std::size_t rows = std::min(cfg.lookahead, manifest.chunk_count() - k);
  for (std::size_t j = 0; j < rows; ++j) {
    std::vector<std::int64_t> row(m);
    for (std::size_t i = 0; i < m; ++i) row[i] = delivery.bytes(k + j, i);
    o.upcoming_sizes.push_back(std::move(row));
  }
  o.next_sizes = o.upcoming_sizes.front();
  o.next_quality.resize(m);
  for (std::size_t i = 0; i < m; ++i) o.next_quality[i] = manifest.quality_at(k, i);
  o.last_bitrate_index = state.last_bitrate_index;
  if (k > 0 && state.last_bitrate_index)
    o.last_quality = manifest.quality_at(k - 1, *state.last_bitrate_index);

  o.buffer_s = state.buffer_s;
  o.last_download_time_s = state.last_download_time_s;
  o.remaining_fraction = static_cast<double>(manifest.chunk_count() - k) /
                         static_cast<double>(manifest.chunk_count());
  o.extra_latency_s = delivery.processing_s();
  o.estimated_snr_db = delivery.estimated_snr_db(k);
  return o;
}

SessionLog run_session(Policy& policy, const ChunkManifest& manifest,
                       const ThroughputTrace& trace, const DeliveryModel& delivery,
                       const PlayerConfig& cfg, const QoEWeights& weights) {
  cfg.validate(manifest.chunk_duration());
  weights.validate();
  policy.reset();

  SessionLog log;
  log.policy = policy.name();
  log.trace = trace.name();
  log.semantic = delivery.is_semantic();
  const auto& ladder = manifest.ladder();

  PlayerState state;
  for (std::size_t k = 0; k < manifest.chunk_count(); ++k) {
    const ObservationState obs = observe(state, manifest, delivery, cfg);
    const std::size_t choice = policy.decide(obs, weights);
    if (choice >= manifest.bitrate_count())
      throw SessionError("policy '" + policy.name() + "' returned invalid index " +
                             std::to_string(choice),
                         static_cast<int>(k));
    auto [next, result] = step(state, manifest, trace, choice, delivery, cfg);

    std::optional<int> a_prev;
    std::optional<double> b_prev;
    if (k > 0) {
      a_prev = ladder[*state.last_bitrate_index];
      b_prev = state.buffer_s;
    } else {
      log.startup_delay_s = result.download_time_s;
    }
    const QoEBreakdown q =
        chunk_qoe(result.bitrate_kbps, a_prev, result.download_time_s, b_prev,
                  weights, ladder, result.effective_quality);
    log.qoe.push_back(q);
    log.totals += q;
    log.chunks.push_back(result);
    state = std::move(next);
  }
  log.wall_time_s = state.wall_time_s;
  return log;
}

}  // namespace semabr
