#include "semabr/trace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "semabr/error.hpp"

namespace semabr {
namespace {

ThroughputTrace two_step(double t1 = 4.0, double r0 = 1.0, double r1 = 2.0) {
  return ThroughputTrace({{0.0, r0}, {t1, r1}}, "two");
}

// Independent restatement of the replay rule for the numeric oracle: the
// period is the last timestamp and only times strictly past it wrap.
double oracle_rate(const std::vector<TraceSample>& s, double t) {
  const double period = s.size() > 1 ? s.back().time_s : 0.0;
  if (period > 0.0 && t > period) t = std::fmod(t, period);
  double r = s.front().mbps;
  for (const auto& x : s)
    if (x.time_s <= t) r = x.mbps;
  return r;
}

// Time-steps the rate until the payload is covered; error is O(dt).
double oracle_duration(const std::vector<TraceSample>& s, double start, double payload,
                       double dt = 1e-5) {
  double t = start;
  double got = 0.0;
  while (got < payload) {
    const double r = oracle_rate(s, t + 0.5 * dt);
    if (got + r * dt >= payload) return t + (payload - got) / r - start;
    got += r * dt;
    t += dt;
  }
  return t - start;
}

TEST(ParseTrace, TwoSamples) {
  const auto t = parse_trace("0 1.0\n4 2.0");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.samples()[0].time_s, 0.0);
  EXPECT_EQ(t.samples()[0].mbps, 1.0);
  EXPECT_EQ(t.samples()[1].time_s, 4.0);
  EXPECT_EQ(t.samples()[1].mbps, 2.0);
}

TEST(ParseTrace, SkipsCommentsAndBlankLines) {
  const auto t = parse_trace("# hdr\n0 3.5\n\n2 1.2");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.samples()[0].mbps, 3.5);
  EXPECT_EQ(t.samples()[1].time_s, 2.0);
  EXPECT_EQ(t.samples()[1].mbps, 1.2);
}

TEST(ParseTrace, RejectsRepeatedTimestamp) {
  EXPECT_THROW(parse_trace("0 1.0\n0 2.0"), ValidationError);
}

TEST(ParseTrace, RejectsNonPositiveThroughput) {
  EXPECT_THROW(parse_trace("0 1.0\n1 0"), ValidationError);
  EXPECT_THROW(parse_trace("0 -1.0"), ValidationError);
}

TEST(ParseTrace, MalformedLineReportsLineNumber) {
  try {
    parse_trace("# header\n0 1.0\n2 abc\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_trace("0 1.0 7"), ParseError);
  EXPECT_THROW(parse_trace("5"), ParseError);
}

TEST(ParseTrace, EmptyInputIsInvalid) {
  EXPECT_THROW(parse_trace("# nothing\n\n"), ValidationError);
}

TEST(ParseTrace, TextRoundTrip) {
  const auto t = synth_trace(3, 20, {{1.0, 0.5}, {4.0, 1.0}}, 0.3, 0.5);
  const auto back = parse_trace(t.to_text());
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.samples()[i].time_s, t.samples()[i].time_s);
    EXPECT_EQ(back.samples()[i].mbps, t.samples()[i].mbps);
  }
}

TEST(SynthTrace, ZeroVarianceSingleState) {
  const auto t = synth_trace(1, 8.0, {{2.0, 0.0}}, 0.5, 4.0);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.samples()[0].time_s, 0.0);
  EXPECT_EQ(t.samples()[0].mbps, 2.0);
  EXPECT_EQ(t.samples()[1].time_s, 4.0);
  EXPECT_EQ(t.samples()[1].mbps, 2.0);
}

TEST(SynthTrace, SameSeedIsBitIdentical) {
  const std::vector<MarkovState> states{{1.0, 0.4}, {3.0, 1.0}, {0.3, 0.2}};
  const auto a = synth_trace(99, 200, states, 0.2, 1.0);
  const auto b = synth_trace(99, 200, states, 0.2, 1.0);
  EXPECT_EQ(a.to_text(), b.to_text());
  const auto c = synth_trace(100, 200, states, 0.2, 1.0);
  EXPECT_NE(a.to_text(), c.to_text());
}

TEST(SynthTrace, ClipsAtFloor) {
  const auto t = synth_trace(5, 500, {{0.02, 1.0}}, 0.0, 1.0);
  for (const auto& s : t.samples()) EXPECT_GE(s.mbps, kSynthFloorMbps);
}

TEST(SynthTrace, EmptyStatesRejected) {
  EXPECT_THROW(synth_trace(1, 10, {}, 0.1, 1.0), ValidationError);
}

TEST(SynthTrace, OccupancyMatchesStationaryDistribution) {
  // Stationary distribution of the "switch uniformly to another state"
  // chain, found by power iteration on its transition matrix.
  const double p = 0.3;
  const std::size_t n_states = 2;
  std::vector<double> pi(n_states, 0.0);
  pi[0] = 1.0;
  for (int it = 0; it < 1000; ++it) {
    std::vector<double> next(n_states, 0.0);
    for (std::size_t i = 0; i < n_states; ++i)
      for (std::size_t j = 0; j < n_states; ++j)
        next[j] += pi[i] * (i == j ? 1.0 - p : p / static_cast<double>(n_states - 1));
    pi = next;
  }

  // Distinct zero-variance means let the state be read back off the trace.
  // Lag-1 correlation 1 - 2p inflates the variance of the occupancy mean by
  // (2 - 2p) / (2p); 20000 samples put 0.02 at about four standard deviations.
  const std::size_t n = 20000;
  const auto t = synth_trace(7, static_cast<double>(n), {{1.0, 0.0}, {3.0, 0.0}}, p, 1.0);
  ASSERT_EQ(t.size(), n);
  double in_first = 0.0;
  for (const auto& s : t.samples()) in_first += s.mbps == 1.0 ? 1.0 : 0.0;
  EXPECT_NEAR(in_first / n, pi[0], 0.02);
  EXPECT_NEAR(1.0 - in_first / n, pi[1], 0.02);

  const auto path = synth_state_path(7, n, 2, p);
  double from_path = 0.0;
  for (auto s : path) from_path += s == 0 ? 1.0 : 0.0;
  EXPECT_EQ(from_path, in_first);
}

TEST(ThroughputAt, PiecewiseConstantAndWrap) {
  const auto t = two_step();
  EXPECT_EQ(throughput_at(t, 2.0), 1.0);
  EXPECT_EQ(throughput_at(t, 4.0), 2.0);
  EXPECT_EQ(throughput_at(t, 9.0), 1.0);  // 9 mod 4 = 1
  EXPECT_EQ(throughput_at(t, 0.0), 1.0);
}

TEST(ThroughputAt, BeforeFirstSampleUsesFirstValue) {
  const ThroughputTrace t({{2.0, 5.0}, {6.0, 1.0}});
  EXPECT_EQ(throughput_at(t, 0.5), 5.0);
  EXPECT_EQ(throughput_at(t, 3.0), 5.0);
}

TEST(IntegrateDownload, ConstantRate) {
  const ThroughputTrace t({{0.0, 1.0}});
  const auto d = integrate_download(t, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(d.duration_s, 0.5);
  EXPECT_DOUBLE_EQ(d.end_time_s, 0.5);
}

TEST(IntegrateDownload, ZeroPayload) {
  const auto t = two_step();
  const auto d = integrate_download(t, 3.0, 0.0);
  EXPECT_EQ(d.duration_s, 0.0);
  EXPECT_EQ(d.end_time_s, 3.0);
}

TEST(IntegrateDownload, WrapMatchesNumericOracle) {
  const std::vector<TraceSample> s{{0.0, 1.0}, {2.0, 4.0}};
  const ThroughputTrace t(s);
  const double oracle = oracle_duration(s, 0.0, 5.0);
  // The loop point is t=2, so the 4 Mbps sample never carries data.
  EXPECT_NEAR(oracle, 5.0, 1e-3);
  EXPECT_NEAR(integrate_download(t, 0.0, 5.0).duration_s, oracle, 1e-3);
}

TEST(IntegrateDownload, MultiSegmentMatchesNumericOracle) {
  const std::vector<TraceSample> s{{0.0, 2.0}, {1.5, 0.5}, {2.0, 3.0}, {3.5, 1.0}};
  const ThroughputTrace t(s);
  for (double start : {0.0, 0.7, 1.5, 3.2, 10.1}) {
    for (double payload : {0.3, 2.0, 7.5}) {
      EXPECT_NEAR(integrate_download(t, start, payload).duration_s,
                  oracle_duration(s, start, payload), 1e-3)
          << "start=" << start << " payload=" << payload;
    }
  }
}

TEST(IntegrateDownload, PropertyAdditiveMonotoneAndExactForConstant) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TraceSample> s;
    double ts = u(rng) < 1.0 ? 0.0 : u(rng);
    const int n = 1 + static_cast<int>(u(rng) * 3);
    for (int i = 0; i < n; ++i) {
      s.push_back({ts, u(rng)});
      ts += u(rng);
    }
    const ThroughputTrace t(s);
    const double start = u(rng) * 3;
    const double a = u(rng) * 4;
    const double b = u(rng) * 4;

    const auto whole = integrate_download(t, start, a + b);
    const auto first = integrate_download(t, start, a);
    const auto second = integrate_download(t, first.end_time_s, b);
    EXPECT_NEAR(whole.end_time_s, second.end_time_s, 1e-9 * (1.0 + whole.end_time_s));

    EXPECT_GT(whole.duration_s, first.duration_s);
    EXPECT_GT(first.duration_s, 0.0);
  }
  const ThroughputTrace flat({{0.0, 2.5}});
  for (double payload : {0.1, 1.0, 17.0}) {
    EXPECT_EQ(integrate_download(flat, 0.0, payload).duration_s, payload / 2.5);
    EXPECT_NEAR(integrate_download(flat, 3.3, payload).duration_s, payload / 2.5, 1e-12);
  }
}

}  // namespace
}  // namespace semabr
