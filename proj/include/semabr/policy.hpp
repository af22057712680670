#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semabr/qoe.hpp"

namespace semabr {

// Everything a bitrate selector may see before requesting chunk k.
struct ObservationState {
  std::size_t chunk_index = 0;
  std::size_t chunk_count = 1;
  double chunk_duration_s = 4.0;
  double buffer_cap_s = 60.0;
  std::vector<int> ladder_kbps;

  // Oldest first, zero-padded at the old end to the history length.
  std::vector<double> past_throughputs_mbps;
  std::vector<double> past_download_times_s;

  std::vector<std::int64_t> next_sizes;                  // bytes per bitrate
  std::vector<std::vector<std::int64_t>> upcoming_sizes; // rows k, k+1, ...
  std::vector<double> next_quality;
  std::optional<double> last_quality;
  std::optional<std::size_t> last_bitrate_index;

  double buffer_s = 0.0;
  double last_download_time_s = 0.0;
  double remaining_fraction = 1.0;

  // Utility multiplier and per-chunk fixed delay of the delivery path.
  double quality_scale = 1.0;
  double extra_latency_s = 0.0;
  // Receiver-side SNR estimate for the upcoming chunk (semantic delivery).
  std::optional<double> estimated_snr_db;

  std::size_t bitrate_count() const { return ladder_kbps.size(); }
  std::size_t remaining_chunks() const { return chunk_count - chunk_index; }
  // Non-zero history entries, oldest first.
  std::vector<double> observed_throughputs() const;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::size_t decide(const ObservationState& obs,
                             const QoEWeights& weights) = 0;
  // Clears per-session state.
  virtual void reset() {}
  virtual std::unique_ptr<Policy> clone() const = 0;
};

}  // namespace semabr
