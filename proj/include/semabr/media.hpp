#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semabr {

class BitrateLadder {
 public:
  // Strictly ascending, all > 0, at least two rungs.
  explicit BitrateLadder(std::vector<int> kbps);

  static BitrateLadder standard();  // 300/750/1200/1850/2850/4300 kbps

  const std::vector<int>& kbps() const { return kbps_; }
  std::size_t size() const { return kbps_.size(); }
  int operator[](std::size_t i) const { return kbps_.at(i); }
  int min_kbps() const { return kbps_.front(); }
  int max_kbps() const { return kbps_.back(); }
  std::optional<std::size_t> index_of(int kbps) const;

 private:
  std::vector<int> kbps_;
};

enum class FrameType : char { kI = 'I', kP = 'P', kB = 'B' };

struct GopStructure {
  std::string pattern = "IBBPBBPBBPBB";
  int width = 1920;
  int height = 1080;
  double fps = 30.0;

  void validate() const;
  FrameType frame(std::size_t i) const {
    return static_cast<FrameType>(pattern[i % pattern.size()]);
  }
};

struct FrameCounts {
  std::int64_t i = 0;
  std::int64_t p = 0;
  std::int64_t b = 0;
  std::int64_t total() const { return i + p + b; }
};

FrameCounts count_frames(const GopStructure& gop, std::int64_t frames);

// Frames in a chunk of `chunk_duration_s`, rounded to nearest, at least 1.
std::int64_t frames_per_chunk(const GopStructure& gop, double chunk_duration_s);

// Latent geometry and side-information sizing for the semantic encoding.
struct SemanticProfile {
  int downsample_factor = 8;
  int latent_channels = 4;
  double bytes_per_latent_element = 1.0;
  double metadata_bytes_p = 2048.0;
  double metadata_bytes_b = 1024.0;
  double frame_weight_i = 8.0;
  double frame_weight_p = 2.0;
  double frame_weight_b = 1.0;

  void validate() const;
  double weight(FrameType t) const;
};

class ChunkManifest {
 public:
  ChunkManifest(BitrateLadder ladder, double chunk_duration_s,
                std::vector<std::vector<std::int64_t>> sizes_bytes,
                std::optional<std::vector<std::vector<double>>> quality,
                GopStructure gop);

  const BitrateLadder& ladder() const { return ladder_; }
  double chunk_duration() const { return chunk_duration_s_; }
  std::size_t chunk_count() const { return sizes_.size(); }
  std::size_t bitrate_count() const { return ladder_.size(); }
  std::int64_t size_bytes(std::size_t k, std::size_t m) const {
    return sizes_.at(k).at(m);
  }
  const std::vector<std::int64_t>& chunk_sizes(std::size_t k) const {
    return sizes_.at(k);
  }
  const std::vector<std::vector<std::int64_t>>& sizes() const { return sizes_; }
  const std::optional<std::vector<std::vector<double>>>& quality() const {
    return quality_;
  }
  // Perceptual score, falling back to ln(a_m / a_1) when none was supplied.
  double quality_at(std::size_t k, std::size_t m) const;
  const GopStructure& gop() const { return gop_; }
  std::int64_t frames_per_chunk() const;

  // JSON document with keys ladder_kbps, chunk_duration_s, sizes_bytes,
  // quality (optional), gop {pattern,width,height,fps}.
  std::string to_json() const;
  static ChunkManifest from_json(const std::string& text);

 private:
  BitrateLadder ladder_;
  double chunk_duration_s_;
  std::vector<std::vector<std::int64_t>> sizes_;
  std::optional<std::vector<std::vector<double>>> quality_;
  GopStructure gop_;
};

ChunkManifest load_manifest(const std::string& path);

ChunkManifest generate_manifest(std::uint64_t seed, const BitrateLadder& ladder,
                                std::size_t chunk_count,
                                double chunk_duration_s,
                                const GopStructure& gop, double size_noise);

struct FrameBytes {
  FrameType type;
  std::int64_t bytes;
  bool operator==(const FrameBytes&) const = default;
};

// Splits a chunk's bytes over `frames` frames proportionally to the per-type
// weights, using largest-remainder rounding so the total is conserved.
std::vector<FrameBytes> frame_sizes(std::int64_t chunk_bytes,
                                    const GopStructure& gop,
                                    const SemanticProfile& profile,
                                    std::int64_t frames);

// Bytes of one I-frame latent.
std::int64_t latent_size(const GopStructure& gop, const SemanticProfile& profile);

// Latents for every I-frame plus metadata for every P/B frame.
std::int64_t semantic_chunk_size(const GopStructure& gop,
                                 const SemanticProfile& profile,
                                 std::int64_t frames);

double compression_ratio(std::int64_t chunk_bytes, const GopStructure& gop,
                         const SemanticProfile& profile, std::int64_t frames);

}  // namespace semabr
