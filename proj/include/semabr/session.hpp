#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semabr/media.hpp"
#include "semabr/qoe.hpp"

namespace semabr {

struct ChunkResult {
  std::size_t chunk_index = 0;
  std::size_t bitrate_index = 0;
  int bitrate_kbps = 0;
  std::int64_t transmitted_bytes = 0;
  double download_time_s = 0.0;    // d_k: network + processing
  double network_time_s = 0.0;
  double processing_time_s = 0.0;
  double rebuffer_s = 0.0;         // 0 for the startup chunk
  double buffer_before_s = 0.0;
  double buffer_after_s = 0.0;
  double wait_s = 0.0;             // idle time while the buffer was full
  double throughput_mbps = 0.0;
  double effective_quality = 1.0;
  int denoise_step = 0;            // 0 in plain delivery
};

struct SessionLog {
  std::string policy;
  std::string trace;
  bool semantic = false;
  std::vector<ChunkResult> chunks;
  std::vector<QoEBreakdown> qoe;
  QoEBreakdown totals;
  double startup_delay_s = 0.0;
  double wall_time_s = 0.0;

  double mean_qoe() const {
    return chunks.empty() ? 0.0 : totals.total / static_cast<double>(chunks.size());
  }
  std::vector<std::size_t> plan() const;
};

struct SessionAggregate {
  std::vector<QoEBreakdown> per_chunk;
  QoEBreakdown totals;
  QoEBreakdown mean;
};

// Rescores raw chunk results without reading any cached QoE in a log.
// `preceding` bridges the smoothness and stall terms of the first chunk to a
// chunk that came before this slice; without it the first chunk is treated
// as the session's startup chunk.
SessionAggregate session_aggregate(std::span<const ChunkResult> chunks,
                                   const QoEWeights& weights,
                                   const BitrateLadder& ladder,
                                   const std::optional<ChunkResult>& preceding = std::nullopt);

// CSV with one row per chunk.
std::string session_csv(const SessionLog& log);
inline constexpr const char* kSessionCsvHeader =
    "k,bitrate_kbps,bytes,d_k,rebuffer_s,buffer_s,qoe,qoe_utility,qoe_smooth,"
    "qoe_rebuf,effective_quality";

std::string cdf_csv(const std::vector<CdfPoint>& points);

// Fixed 6-decimal formatting used by every CSV artifact.
std::string fmt6(double v);

}  // namespace semabr
