#include "semabr/player.hpp"

#include <gtest/gtest.h>

#include <random>

#include "semabr/abr.hpp"
#include "semabr/error.hpp"

namespace semabr {
namespace {

class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(std::size_t index) : index_(index) {}
  std::string name() const override { return "fixed"; }
  std::size_t decide(const ObservationState&, const QoEWeights&) override { return index_; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<FixedPolicy>(*this); }

 private:
  std::size_t index_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights&) override {
    return std::uniform_int_distribution<std::size_t>(0, obs.bitrate_count() - 1)(rng_);
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<RandomPolicy>(*this); }

 private:
  std::mt19937_64 rng_;
};

ChunkManifest flat_manifest(std::size_t k, std::vector<std::int64_t> row, double L = 4.0,
                            GopStructure gop = {}) {
  std::vector<int> kbps;
  for (std::size_t i = 0; i < row.size(); ++i) kbps.push_back(300 * static_cast<int>(i + 1));
  return ChunkManifest(BitrateLadder(kbps), L, std::vector(k, row), std::nullopt, gop);
}

TEST(AdvanceBuffer, RebufferExample) {
  const auto u = advance_buffer(2.0, 3.0, 4.0, 60.0, false);
  EXPECT_EQ(u.rebuffer_s, 1.0);
  EXPECT_EQ(u.buffer_after_s, 4.0);
  EXPECT_EQ(u.wait_s, 0.0);
}

TEST(AdvanceBuffer, ZeroDownloadAndCap) {
  const auto u = advance_buffer(10.0, 0.0, 4.0, 60.0, false);
  EXPECT_EQ(u.rebuffer_s, 0.0);
  EXPECT_EQ(u.buffer_after_s, 14.0);
  const auto capped = advance_buffer(58.0, 0.0, 4.0, 60.0, false);
  EXPECT_EQ(capped.buffer_after_s, 60.0);
  EXPECT_EQ(capped.wait_s, 2.0);
  EXPECT_EQ(advance_buffer(0.0, 7.0, 4.0, 60.0, true).rebuffer_s, 0.0);
}

TEST(Step, FinishedSessionIsStateError) {
  const auto m = flat_manifest(1, {100, 200});
  const ThroughputTrace t({{0.0, 1.0}});
  PlayerState s;
  s.next_chunk = 1;
  EXPECT_THROW(step(s, m, t, 0, DeliveryModel::plain(m), PlayerConfig{}), StateError);
}

TEST(Step, SemanticDownloadIsScaledNetworkTimePlusProcessing) {
  // 64x64 "I" frames at 1 fps, L = 1: one 256-byte latent per chunk.
  GopStructure gop;
  gop.pattern = "I";
  gop.width = 64;
  gop.height = 64;
  gop.fps = 1.0;
  SemanticContext ctx;
  ctx.profile.downsample_factor = 8;
  ctx.profile.latent_channels = 4;
  ctx.profile.bytes_per_latent_element = 1.0;
  const auto m = flat_manifest(2, {2560, 5120}, 1.0, gop);
  ASSERT_DOUBLE_EQ(compression_ratio(2560, gop, ctx.profile, 1), 0.1);

  const ThroughputTrace t({{0.0, 0.5}});
  const auto plain = step(PlayerState{}, m, t, 0, DeliveryModel::plain(m), PlayerConfig{});
  const auto sem = DeliveryModel::semantic(m, ctx, 1);
  const auto s = step(PlayerState{}, m, t, 0, sem, PlayerConfig{});
  EXPECT_EQ(s.result.transmitted_bytes, 256);
  EXPECT_DOUBLE_EQ(s.result.network_time_s, 0.1 * plain.result.network_time_s);
  EXPECT_DOUBLE_EQ(s.result.processing_time_s, 14.9 / 1000.0);
  EXPECT_DOUBLE_EQ(s.result.download_time_s,
                   0.1 * plain.result.network_time_s + 14.9 / 1000.0);
}

TEST(Observe, FreshSession) {
  const auto m = flat_manifest(4, {100, 200});
  PlayerConfig cfg;
  const auto o = observe(PlayerState{}, m, DeliveryModel::plain(m), cfg);
  EXPECT_EQ(o.past_throughputs_mbps, std::vector<double>(cfg.history_len, 0.0));
  EXPECT_EQ(o.past_download_times_s, std::vector<double>(cfg.history_len, 0.0));
  EXPECT_EQ(o.remaining_fraction, 1.0);
  EXPECT_FALSE(o.last_bitrate_index.has_value());
  EXPECT_EQ(o.next_sizes, (std::vector<std::int64_t>{100, 200}));
  EXPECT_EQ(o.upcoming_sizes.size(), 4u);
}

TEST(Observe, AfterOneChunk) {
  // 150 000 bytes = 1.2 Mb, taking 1.2 s at 1 Mbps.
  const auto m = flat_manifest(3, {150000, 300000});
  const ThroughputTrace t({{0.0, 1.0}});
  PlayerConfig cfg;
  const auto d = DeliveryModel::plain(m);
  const auto s = step(PlayerState{}, m, t, 0, d, cfg).state;
  const auto o = observe(s, m, d, cfg);
  EXPECT_DOUBLE_EQ(o.past_throughputs_mbps.back(), 1.0);
  EXPECT_DOUBLE_EQ(o.past_download_times_s.back(), 1.2);
  EXPECT_EQ(o.past_throughputs_mbps.front(), 0.0);
  EXPECT_EQ(o.last_bitrate_index, 0u);
  EXPECT_DOUBLE_EQ(o.remaining_fraction, 2.0 / 3.0);
}

TEST(Observe, LastChunkPending) {
  const auto m = flat_manifest(5, {100, 200});
  PlayerState s;
  s.next_chunk = 4;
  s.last_bitrate_index = 1;
  const auto o = observe(s, m, DeliveryModel::plain(m), PlayerConfig{});
  EXPECT_DOUBLE_EQ(o.remaining_fraction, 1.0 / 5.0);
  EXPECT_EQ(o.upcoming_sizes.size(), 1u);
}

TEST(RunSession, SingleChunk) {
  const auto m = flat_manifest(1, {100, 200});
  const ThroughputTrace t({{0.0, 1.0}});
  FixedPolicy p(1);
  const auto log = run_session(p, m, t, DeliveryModel::plain(m), PlayerConfig{}, QoEWeights{});
  ASSERT_EQ(log.chunks.size(), 1u);
  EXPECT_EQ(log.totals.total, std::log(2.0));
}

TEST(RunSession, SustainableBitrateNeverStalls) {
  // 1.2 Mb chunks over 2 Mbps take 0.6 s < L.
  const auto m = flat_manifest(30, {150000, 300000});
  const ThroughputTrace t({{0.0, 2.0}});
  FixedPolicy p(0);
  const auto log = run_session(p, m, t, DeliveryModel::plain(m), PlayerConfig{}, QoEWeights{});
  for (std::size_t k = 1; k < log.chunks.size(); ++k) EXPECT_EQ(log.chunks[k].rebuffer_s, 0.0);
  EXPECT_EQ(log.totals.rebuffer, 0.0);
}

TEST(RunSession, DeterministicAndConsistentWithAggregate) {
  const auto m = generate_manifest(3, BitrateLadder::standard(), 40, 4.0, GopStructure{}, 0.3);
  const auto t = synth_trace(4, 300, {{0.8, 0.3}, {2.5, 0.8}}, 0.2, 1.0, "t");
  RobustMpcPolicy p;
  const auto d = DeliveryModel::plain(m);
  const auto a = run_session(p, m, t, d, PlayerConfig{}, QoEWeights{});
  const auto b = run_session(p, m, t, d, PlayerConfig{}, QoEWeights{});
  EXPECT_EQ(session_csv(a), session_csv(b));
  const auto agg = session_aggregate(a.chunks, QoEWeights{}, m.ladder());
  EXPECT_NEAR(agg.totals.total, a.totals.total, 1e-9);
  double sum = 0.0;
  for (const auto& q : a.qoe) sum += q.total;
  EXPECT_NEAR(sum, a.totals.total, 1e-9);
}

TEST(RunSession, InvalidIndexNamesChunk) {
  const auto m = flat_manifest(3, {100, 200});
  const ThroughputTrace t({{0.0, 1.0}});
  FixedPolicy p(7);
  try {
    run_session(p, m, t, DeliveryModel::plain(m), PlayerConfig{}, QoEWeights{});
    FAIL() << "expected SessionError";
  } catch (const SessionError& e) {
    EXPECT_EQ(e.chunk(), 0);
  }
}

TEST(PlayerProperty, RandomizedStepsKeepInvariants) {
  std::mt19937_64 rng(99);
  GopStructure gop;
  gop.width = 640;
  gop.height = 360;
  SemanticContext ctx;
  ctx.profile.downsample_factor = 16;
  ctx.profile.metadata_bytes_p = 64;
  ctx.profile.metadata_bytes_b = 32;
  std::size_t steps = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = generate_manifest(trial, BitrateLadder::standard(), 30, 2.0 + trial % 3,
                                     gop, 0.4);
    const auto t = synth_trace(trial, 200, {{0.4, 0.2}, {3.0, 1.5}, {8.0, 2.0}}, 0.3, 0.5, "p");
    PlayerConfig cfg;
    cfg.buffer_cap_s = 10.0 + trial % 20;
    const bool semantic = trial % 2 == 1;
    const auto d = semantic ? DeliveryModel::semantic(m, ctx, trial)
                            : DeliveryModel::plain(m);
    RandomPolicy p(rng());
    const auto log = run_session(p, m, t, d, cfg, QoEWeights{});
    double prev_buffer = 0.0;
    double waits = 0.0;
    double downloads = 0.0;
    for (std::size_t k = 0; k < log.chunks.size(); ++k, ++steps) {
      const auto& c = log.chunks[k];
      EXPECT_GE(c.buffer_after_s, 0.0);
      EXPECT_LE(c.buffer_after_s, cfg.buffer_cap_s);
      EXPECT_EQ(c.buffer_before_s, prev_buffer);
      const double expected_stall = k == 0 ? 0.0 : std::max(0.0, c.download_time_s - prev_buffer);
      EXPECT_EQ(c.rebuffer_s, expected_stall);
      EXPECT_NEAR(log.qoe[k].rebuffer, 2.66 * c.rebuffer_s, 1e-12);
      EXPECT_EQ(c.transmitted_bytes, semantic ? d.semantic_bytes() : m.size_bytes(k, c.bitrate_index));
      if (semantic) {
        ASSERT_LT(compression_ratio(m.size_bytes(k, c.bitrate_index), gop, ctx.profile,
                                    m.frames_per_chunk()),
                  1.0);
        EXPECT_LT(c.transmitted_bytes, m.size_bytes(k, c.bitrate_index));
      }
      waits += c.wait_s;
      downloads += c.download_time_s;
      prev_buffer = c.buffer_after_s;
    }
    EXPECT_NEAR(log.wall_time_s, downloads + waits, 1e-9);
  }
  EXPECT_GE(steps, 1000u);
}

}  // namespace
}  // namespace semabr
