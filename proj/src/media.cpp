#include "semabr/media.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "semabr/error.hpp"
#include "semabr/rng.hpp"

namespace semabr {

using nlohmann::json;

BitrateLadder::BitrateLadder(std::vector<int> kbps) : kbps_(std::move(kbps)) {
  if (kbps_.size() < 2) throw ValidationError("ladder needs at least 2 bitrates");
  for (std::size_t i = 0; i < kbps_.size(); ++i) {
    if (kbps_[i] <= 0) throw ValidationError("ladder bitrates must be > 0");
    if (i > 0 && kbps_[i] <= kbps_[i - 1])
      throw ValidationError("ladder must be strictly ascending");
  }
}

BitrateLadder BitrateLadder::standard() {
  return BitrateLadder({300, 750, 1200, 1850, 2850, 4300});
}

std::optional<std::size_t> BitrateLadder::index_of(int kbps) const {
  auto it = std::lower_bound(kbps_.begin(), kbps_.end(), kbps);
  if (it == kbps_.end() || *it != kbps) return std::nullopt;
  return static_cast<std::size_t>(it - kbps_.begin());
}

void GopStructure::validate() const {
  if (pattern.empty() || pattern.front() != 'I')
    throw ValidationError("GOP pattern must be non-empty and start with 'I'");
  for (char c : pattern)
    if (c != 'I' && c != 'P' && c != 'B')
      throw ValidationError(std::string("invalid GOP symbol '") + c + "'");
  if (width <= 0 || height <= 0 || !(fps > 0.0))
    throw ValidationError("GOP width, height and fps must be > 0");
}

FrameCounts count_frames(const GopStructure& gop, std::int64_t frames) {
  FrameCounts c;
  const auto n = static_cast<std::int64_t>(gop.pattern.size());
  for (std::int64_t i = 0; i < std::min(frames, n); ++i) {
    // Each pattern slot repeats once per full cycle, plus once more if it
    // falls inside the trailing partial cycle.
    const std::int64_t reps = frames / n + (i < frames % n ? 1 : 0);
    switch (gop.frame(static_cast<std::size_t>(i))) {
      case FrameType::kI: c.i += reps; break;
      case FrameType::kP: c.p += reps; break;
      case FrameType::kB: c.b += reps; break;
    }
  }
  return c;
}

std::int64_t frames_per_chunk(const GopStructure& gop, double chunk_duration_s) {
  return std::max<std::int64_t>(1, std::llround(gop.fps * chunk_duration_s));
}

void SemanticProfile::validate() const {
  if (downsample_factor < 1) throw ValidationError("downsample_factor must be >= 1");
  if (latent_channels < 1) throw ValidationError("latent_channels must be >= 1");
  if (!(bytes_per_latent_element > 0.0) || !(metadata_bytes_p > 0.0) ||
      !(metadata_bytes_b > 0.0))
    throw ValidationError("semantic byte quantities must be > 0");
  if (!(frame_weight_i > 0.0) || !(frame_weight_p > 0.0) || !(frame_weight_b > 0.0))
    throw ValidationError("frame weights must be > 0");
}

double SemanticProfile::weight(FrameType t) const {
  switch (t) {
    case FrameType::kI: return frame_weight_i;
    case FrameType::kP: return frame_weight_p;
    case FrameType::kB: return frame_weight_b;
  }
  return 0.0;
}

ChunkManifest::ChunkManifest(BitrateLadder ladder, double chunk_duration_s,
                             std::vector<std::vector<std::int64_t>> sizes_bytes,
                             std::optional<std::vector<std::vector<double>>> quality,
                             GopStructure gop)
    : ladder_(std::move(ladder)),
      chunk_duration_s_(chunk_duration_s),
      sizes_(std::move(sizes_bytes)),
      quality_(std::move(quality)),
      gop_(std::move(gop)) {
  gop_.validate();
  if (!(chunk_duration_s_ > 0.0)) throw ValidationError("chunk duration must be > 0");
  if (sizes_.empty()) throw ValidationError("manifest needs at least one chunk");
  const std::size_t m = ladder_.size();
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    const auto& row = sizes_[k];
    if (row.size() != m)
      throw ValidationError("sizes row " + std::to_string(k) + " has wrong width");
    for (std::size_t j = 0; j < m; ++j) {
      if (row[j] <= 0) throw ValidationError("chunk sizes must be > 0");
      if (j > 0 && row[j] <= row[j - 1])
        throw ValidationError("sizes of chunk " + std::to_string(k) +
                              " not strictly increasing across bitrates");
    }
  }
  if (quality_) {
    if (quality_->size() != sizes_.size())
      throw ValidationError("quality matrix has wrong chunk count");
    for (const auto& row : *quality_) {
      if (row.size() != m) throw ValidationError("quality row has wrong width");
      for (std::size_t j = 1; j < m; ++j)
        if (row[j] < row[j - 1])
          throw ValidationError("quality must be non-decreasing across bitrates");
    }
  }
}

double ChunkManifest::quality_at(std::size_t k, std::size_t m) const {
  if (quality_) return quality_->at(k).at(m);
  return std::log(static_cast<double>(ladder_[m]) / ladder_.min_kbps());
}

std::int64_t ChunkManifest::frames_per_chunk() const {
  return semabr::frames_per_chunk(gop_, chunk_duration_s_);
}

std::string ChunkManifest::to_json() const {
  json doc;
  doc["ladder_kbps"] = ladder_.kbps();
  doc["chunk_duration_s"] = chunk_duration_s_;
  doc["sizes_bytes"] = sizes_;
  if (quality_) doc["quality"] = *quality_;
  doc["gop"] = {{"pattern", gop_.pattern},
                {"width", gop_.width},
                {"height", gop_.height},
                {"fps", gop_.fps}};
  return doc.dump(2) + "\n";
}

ChunkManifest ChunkManifest::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
    GopStructure gop;
    if (doc.contains("gop")) {
      const auto& g = doc.at("gop");
      gop.pattern = g.value("pattern", gop.pattern);
      gop.width = g.value("width", gop.width);
      gop.height = g.value("height", gop.height);
      gop.fps = g.value("fps", gop.fps);
    }
    std::optional<std::vector<std::vector<double>>> quality;
    if (doc.contains("quality") && !doc.at("quality").is_null())
      quality = doc.at("quality").get<std::vector<std::vector<double>>>();
    return ChunkManifest(
        BitrateLadder(doc.at("ladder_kbps").get<std::vector<int>>()),
        doc.at("chunk_duration_s").get<double>(),
        doc.at("sizes_bytes").get<std::vector<std::vector<std::int64_t>>>(),
        std::move(quality), std::move(gop));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

ChunkManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ChunkManifest::from_json(buf.str());
}

ChunkManifest generate_manifest(std::uint64_t seed, const BitrateLadder& ladder,
                                std::size_t chunk_count,
                                double chunk_duration_s,
                                const GopStructure& gop, double size_noise) {
  if (chunk_count < 1) throw ValidationError("chunk_count must be >= 1");
  if (!(size_noise >= 0.0 && size_noise < 0.5))
    throw ValidationError("size_noise must be in [0, 0.5)");
  Rng rng = make_rng(derive_seed(seed, 3));
  std::uniform_real_distribution<double> factor(1.0 - size_noise,
                                                1.0 + size_noise);
  const std::size_t m = ladder.size();
  std::vector<std::vector<std::int64_t>> sizes(chunk_count,
                                               std::vector<std::int64_t>(m));
  std::vector<std::vector<double>> quality(chunk_count, std::vector<double>(m));
  for (std::size_t k = 0; k < chunk_count; ++k) {
    const double f = size_noise > 0.0 ? factor(rng) : 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double bits = ladder[j] * 1000.0 * chunk_duration_s * f;
      sizes[k][j] = std::max<std::int64_t>(1, std::llround(bits / 8.0));
      quality[k][j] = std::log(static_cast<double>(ladder[j]) / ladder.min_kbps());
    }
  }
  return ChunkManifest(ladder, chunk_duration_s, std::move(sizes),
                       std::move(quality), gop);
}

std::vector<FrameBytes> frame_sizes(std::int64_t chunk_bytes,
                                    const GopStructure& gop,
                                    const SemanticProfile& profile,
                                    std::int64_t frames) {
  gop.validate();
  profile.validate();
  if (chunk_bytes <= 0) throw ValidationError("chunk_bytes must be > 0");
  if (frames < 1) throw ValidationError("frame count must be >= 1");

  const auto n = static_cast<std::size_t>(frames);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = profile.weight(gop.frame(i));
  const double total_w = std::accumulate(w.begin(), w.end(), 0.0);

  std::vector<FrameBytes> out(n);
  std::vector<std::pair<double, std::size_t>> remainders(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = static_cast<double>(chunk_bytes) * w[i] / total_w;
    const auto whole = static_cast<std::int64_t>(std::floor(exact));
    out[i] = {gop.frame(i), whole};
    assigned += whole;
    remainders[i] = {exact - static_cast<double>(whole), i};
  }
  // Largest remainders first; earlier frames win ties.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::int64_t leftover = chunk_bytes - assigned;
  for (std::size_t r = 0; leftover > 0; r = (r + 1) % n, --leftover)
    ++out[remainders[r].second].bytes;
  return out;
}

std::int64_t latent_size(const GopStructure& gop, const SemanticProfile& profile) {
  gop.validate();
  profile.validate();
  const std::int64_t f = profile.downsample_factor;
  const std::int64_t h = (gop.height + f - 1) / f;
  const std::int64_t w = (gop.width + f - 1) / f;
  const double bytes = static_cast<double>(h * w * profile.latent_channels) *
                       profile.bytes_per_latent_element;
  return static_cast<std::int64_t>(std::ceil(bytes - 1e-9));
}

std::int64_t semantic_chunk_size(const GopStructure& gop,
                                 const SemanticProfile& profile,
                                 std::int64_t frames) {
  const FrameCounts c = count_frames(gop, frames);
  const double meta = static_cast<double>(c.p) * profile.metadata_bytes_p +
                      static_cast<double>(c.b) * profile.metadata_bytes_b;
  return c.i * latent_size(gop, profile) +
         static_cast<std::int64_t>(std::ceil(meta - 1e-9));
}

double compression_ratio(std::int64_t chunk_bytes, const GopStructure& gop,
                         const SemanticProfile& profile, std::int64_t frames) {
  if (chunk_bytes <= 0) throw ValidationError("chunk_bytes must be > 0");
  return static_cast<double>(semantic_chunk_size(gop, profile, frames)) /
         static_cast<double>(chunk_bytes);
}

}  // namespace semabr
