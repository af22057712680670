#include "semabr/latency.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "semabr/error.hpp"

namespace semabr {

Resolution parse_resolution(std::string_view s) {
  if (s == "360p") return Resolution::k360p;
  if (s == "720p") return Resolution::k720p;
  if (s == "1080p") return Resolution::k1080p;
  throw ValidationError("unknown resolution '" + std::string(s) + "'");
}

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::k360p: return "360p";
    case Resolution::k720p: return "720p";
    case Resolution::k1080p: return "1080p";
  }
  return "?";
}

Resolution resolution_for_height(int height) {
  if (height <= 360) return Resolution::k360p;
  if (height <= 720) return Resolution::k720p;
  return Resolution::k1080p;
}

namespace {

// Stage values are summed on an integer nanosecond grid so that totals of
// decimal millisecond inputs come out as the nearest double to the decimal
// sum (1.2 + 3.4 + ... == 14.9 exactly).
constexpr double kTicksPerMs = 1e6;

std::int64_t ticks(double ms) { return std::llround(ms * kTicksPerMs); }

double sum_ms(std::initializer_list<double> stages) {
  std::int64_t acc = 0;
  for (double v : stages) acc += ticks(v);
  return static_cast<double>(acc) / kTicksPerMs;
}

}  // namespace

double StageLatency::transmitter_total() const {
  return sum_ms({iframe_extraction, vae_encoding, zframe_compression,
                 metadata_generation});
}

double StageLatency::receiver_total() const {
  return sum_ms({latent_decoding, interpolation, iframe_reconstruction});
}

double StageLatency::total() const {
  return sum_ms({iframe_extraction, vae_encoding, zframe_compression,
                 metadata_generation, latent_decoding, interpolation,
                 iframe_reconstruction});
}

LatencyProfile LatencyProfile::defaults() {
  LatencyProfile p;
  p.at(Resolution::k360p) = {1.2, 3.4, 1.0, 0.7, 3.6, 2.2, 2.8};
  p.at(Resolution::k720p) = {1.8, 5.1, 1.2, 1.0, 5.5, 3.6, 4.4};
  p.at(Resolution::k1080p) = {2.4, 6.8, 1.6, 1.3, 6.9, 4.5, 5.9};
  return p;
}

void LatencyProfile::validate() const {
  for (const auto& s : by_resolution) {
    for (double v : {s.iframe_extraction, s.vae_encoding, s.zframe_compression,
                     s.metadata_generation, s.latent_decoding, s.interpolation,
                     s.iframe_reconstruction}) {
      if (!(v >= 0.0)) throw ValidationError("stage latencies must be >= 0");
    }
  }
}

double total_latency(const LatencyProfile& profile, Resolution r) {
  return profile.at(r).total();
}

double total_latency(const LatencyProfile& profile, std::string_view resolution) {
  return total_latency(profile, parse_resolution(resolution));
}

std::vector<E2ERow> e2e_comparison(const LatencyProfile& profile,
                                   const E2EComparisonConfig& cfg) {
  for (const auto& r : {cfg.network_ms, cfg.traditional_ms, cfg.pixel_ddpm_ms})
    if (!(r.low_ms <= r.high_ms)) throw ValidationError("latency range low > high");
  if (cfg.chunk_count < 0) throw ValidationError("chunk_count must be >= 0");
  const double processing = cfg.chunk_count * total_latency(profile, cfg.resolution);
  return {
      {"Traditional Broadcasting", cfg.traditional_ms},
      {"Pixel-Space DDPM", cfg.pixel_ddpm_ms},
      {"LD-ABS", {processing + cfg.network_ms.low_ms, processing + cfg.network_ms.high_ms}},
  };
}

}  // namespace semabr
