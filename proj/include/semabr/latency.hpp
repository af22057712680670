#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace semabr {

enum class Resolution { k360p, k720p, k1080p };

Resolution parse_resolution(std::string_view s);
std::string_view to_string(Resolution r);
// Class for a frame height: <= 360 -> 360p, <= 720 -> 720p, else 1080p.
Resolution resolution_for_height(int height);

// Per-chunk processing time of each pipeline stage, milliseconds.
struct StageLatency {
  // transmitter
  double iframe_extraction = 0.0;
  double vae_encoding = 0.0;
  double zframe_compression = 0.0;
  double metadata_generation = 0.0;
  // receiver
  double latent_decoding = 0.0;
  double interpolation = 0.0;
  double iframe_reconstruction = 0.0;

  double transmitter_total() const;
  double receiver_total() const;
  double total() const;
};

struct LatencyProfile {
  std::array<StageLatency, 3> by_resolution{};

  // Measured stage breakdown of the reference implementation.
  static LatencyProfile defaults();
  const StageLatency& at(Resolution r) const {
    return by_resolution[static_cast<std::size_t>(r)];
  }
  StageLatency& at(Resolution r) { return by_resolution[static_cast<std::size_t>(r)]; }
  void validate() const;
};

double total_latency(const LatencyProfile& profile, Resolution r);
double total_latency(const LatencyProfile& profile, std::string_view resolution);

struct LatencyRange {
  double low_ms = 0.0;
  double high_ms = 0.0;
};

struct E2EComparisonConfig {
  Resolution resolution = Resolution::k1080p;
  int chunk_count = 48;
  LatencyRange network_ms{600.0, 1500.0};
  LatencyRange traditional_ms{6000.0, 13000.0};
  LatencyRange pixel_ddpm_ms{5000.0, 8000.0};
};

struct E2ERow {
  std::string method;
  LatencyRange range;
};

// Three rows: traditional broadcasting and pixel-space DDPM echo the
// configured ranges; the semantic pipeline row is chunk_count processing
// totals plus the network/buffering component.
std::vector<E2ERow> e2e_comparison(const LatencyProfile& profile,
                                   const E2EComparisonConfig& cfg);

}  // namespace semabr
