#include "semabr/session.hpp"

#include <cstdio>
#include <sstream>
#include <string>

namespace semabr {

std::vector<std::size_t> SessionLog::plan() const {
  std::vector<std::size_t> p;
  p.reserve(chunks.size());
  for (const auto& c : chunks) p.push_back(c.bitrate_index);
  return p;
}

SessionAggregate session_aggregate(std::span<const ChunkResult> chunks,
                                   const QoEWeights& weights,
                                   const BitrateLadder& ladder,
                                   const std::optional<ChunkResult>& preceding) {
  SessionAggregate agg;
  const ChunkResult* prev = preceding ? &*preceding : nullptr;
  for (const auto& c : chunks) {
    std::optional<int> a_prev;
    std::optional<double> b_prev;
    if (prev) {
      a_prev = ladder[prev->bitrate_index];
      b_prev = prev->buffer_after_s;
    }
    const QoEBreakdown q =
        chunk_qoe(ladder[c.bitrate_index], a_prev, c.download_time_s, b_prev,
                  weights, ladder, c.effective_quality);
    agg.per_chunk.push_back(q);
    agg.totals += q;
    prev = &c;
  }
  if (!chunks.empty()) {
    const double n = static_cast<double>(chunks.size());
    agg.mean = {agg.totals.utility / n, agg.totals.smoothness / n,
                agg.totals.rebuffer / n, agg.totals.total / n};
  }
  return agg;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string session_csv(const SessionLog& log) {
  std::ostringstream os;
  os << kSessionCsvHeader << '\n';
  for (std::size_t i = 0; i < log.chunks.size(); ++i) {
    const auto& c = log.chunks[i];
    const auto& q = log.qoe.at(i);
    os << c.chunk_index << ',' << c.bitrate_kbps << ',' << c.transmitted_bytes
       << ',' << fmt6(c.download_time_s) << ',' << fmt6(c.rebuffer_s) << ','
       << fmt6(c.buffer_after_s) << ',' << fmt6(q.total) << ','
       << fmt6(q.utility) << ',' << fmt6(q.smoothness) << ','
       << fmt6(q.rebuffer) << ',' << fmt6(c.effective_quality) << '\n';
  }
  return os.str();
}

std::string cdf_csv(const std::vector<CdfPoint>& points) {
  std::ostringstream os;
  os << "value,cumulative_fraction\n";
  for (const auto& p : points) os << fmt6(p.value) << ',' << fmt6(p.fraction) << '\n';
  return os.str();
}

}  // namespace semabr
