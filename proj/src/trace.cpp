#include "semabr/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "semabr/error.hpp"
#include "semabr/rng.hpp"

namespace semabr {

ThroughputTrace::ThroughputTrace(std::vector<TraceSample> samples,
                                 std::string name)
    : samples_(std::move(samples)), name_(std::move(name)) {
  if (samples_.empty()) throw ValidationError("trace has no samples");
  if (!(samples_.front().time_s >= 0.0))
    throw ValidationError("first timestamp must be >= 0");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.time_s) || !std::isfinite(s.mbps))
      throw ValidationError("non-finite sample at index " + std::to_string(i));
    if (!(s.mbps > 0.0))
      throw ValidationError("non-positive throughput at index " +
                            std::to_string(i));
    if (i > 0 && !(s.time_s > samples_[i - 1].time_s))
      throw ValidationError("non-increasing timestamp at index " +
                            std::to_string(i));
  }
  if (samples_.size() > 1) period_ = samples_.back().time_s;
}

double ThroughputTrace::mean_mbps() const {
  if (period_ <= 0.0) return samples_.front().mbps;
  // Time-weighted over one loop period.
  double acc = 0.0;
  double prev_t = 0.0;
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
    const double seg_end = samples_[i + 1].time_s;
    acc += samples_[i].mbps * (seg_end - prev_t);
    prev_t = seg_end;
  }
  return acc / period_;
}

std::string ThroughputTrace::to_text() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& s : samples_) os << s.time_s << ' ' << s.mbps << '\n';
  return os.str();
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

ThroughputTrace parse_trace(std::string_view text, std::string name) {
  std::vector<TraceSample> samples;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) fields.push_back(line.substr(i, j - i));
      i = j;
    }
    TraceSample s;
    if (fields.size() != 2 || !parse_double(fields[0], s.time_s) ||
        !parse_double(fields[1], s.mbps)) {
      throw ParseError("expected two numeric fields \"timestamp_s throughput_mbps\"",
                       line_no);
    }
    samples.push_back(s);
  }
  return ThroughputTrace(std::move(samples), std::move(name));
}

ThroughputTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0)
    name = name.substr(0, dot);
  return parse_trace(buf.str(), name);
}

std::vector<std::size_t> synth_state_path(std::uint64_t seed,
                                          std::size_t n_steps,
                                          std::size_t n_states,
                                          double transition_prob) {
  if (n_states == 0) throw ValidationError("state list is empty");
  if (!(transition_prob >= 0.0 && transition_prob <= 1.0))
    throw ValidationError("transition_prob must be in [0, 1]");
  Rng rng = make_rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n_states - 1);

  std::vector<std::size_t> path;
  path.reserve(n_steps);
  std::size_t state = pick(rng);
  for (std::size_t i = 0; i < n_steps; ++i) {
    if (i > 0 && n_states > 1 && u01(rng) < transition_prob) {
      // Uniform over the other states.
      std::uniform_int_distribution<std::size_t> other(0, n_states - 2);
      const std::size_t o = other(rng);
      state = o >= state ? o + 1 : o;
    }
    path.push_back(state);
  }
  return path;
}

ThroughputTrace synth_trace(std::uint64_t seed, double duration_s,
                            const std::vector<MarkovState>& states,
                            double transition_prob, double step_s,
                            std::string name) {
  if (states.empty()) throw ValidationError("state list is empty");
  if (!(duration_s > 0.0)) throw ValidationError("duration must be > 0");
  if (!(step_s > 0.0)) throw ValidationError("step must be > 0");
  for (const auto& s : states) {
    if (!(s.mean_mbps > 0.0)) throw ValidationError("state mean must be > 0");
    if (!(s.std_mbps >= 0.0)) throw ValidationError("state std must be >= 0");
  }
  const auto n = static_cast<std::size_t>(std::ceil(duration_s / step_s - 1e-9));
  const auto path = synth_state_path(seed, std::max<std::size_t>(n, 1),
                                     states.size(), transition_prob);

  Rng rng = make_rng(derive_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<TraceSample> samples;
  samples.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& st = states[path[i]];
    const double z = gauss(rng);
    const double v = st.std_mbps > 0.0 ? st.mean_mbps + st.std_mbps * z
                                       : st.mean_mbps;
    samples.push_back({static_cast<double>(i) * step_s,
                       std::max(v, kSynthFloorMbps)});
  }
  return ThroughputTrace(std::move(samples), std::move(name));
}

namespace {

// Position of absolute time t as (loop cycle, sample index). The first
// sample's rate also covers [0, first timestamp); the last sample only marks
// the loop point.
struct Cursor {
  double cycle;
  std::size_t idx;
};

Cursor locate(const ThroughputTrace& trace, double t) {
  const auto& s = trace.samples();
  const double period = trace.period();
  double cycle = t >= period ? std::floor(t / period) : 0.0;
  double local = t - cycle * period;
  if (local >= period) {
    cycle += 1.0;
    local = 0.0;
  }
  auto it = std::upper_bound(
      s.begin(), s.end(), local,
      [](double v, const TraceSample& x) { return v < x.time_s; });
  std::size_t idx = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  if (idx + 1 >= s.size()) {
    cycle += 1.0;
    idx = 0;
  }
  return {cycle, idx};
}

}  // namespace

double throughput_at(const ThroughputTrace& trace, double time_s) {
  const auto& s = trace.samples();
  const double period = trace.period();
  double t = std::max(time_s, 0.0);
  if (period > 0.0 && t > period) t = std::fmod(t, period);
  auto it = std::upper_bound(
      s.begin(), s.end(), t,
      [](double v, const TraceSample& x) { return v < x.time_s; });
  if (it == s.begin()) return s.front().mbps;
  return std::prev(it)->mbps;
}

Download integrate_download(const ThroughputTrace& trace, double start_s,
                            double payload_mb) {
  if (!(payload_mb > 0.0)) return {start_s, 0.0};
  const auto& s = trace.samples();
  const double period = trace.period();
  if (period <= 0.0) {
    const double end = start_s + payload_mb / s.front().mbps;
    return {end, end - start_s};
  }
  Cursor c = locate(trace, std::max(start_s, 0.0));
  double t = start_s;
  double remaining = payload_mb;
  for (;;) {
    const double seg_end = c.cycle * period + s[c.idx + 1].time_s;
    const double mbps = s[c.idx].mbps;
    const double capacity = mbps * std::max(seg_end - t, 0.0);
    if (capacity >= remaining) {
      const double end = t + remaining / mbps;
      return {end, end - start_s};
    }
    remaining -= capacity;
    t = std::max(t, seg_end);
    if (++c.idx + 1 >= s.size()) {
      c.idx = 0;
      c.cycle += 1.0;
    }
  }
}

}  // namespace semabr
