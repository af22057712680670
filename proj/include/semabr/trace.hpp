#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semabr {

struct TraceSample {
  double time_s = 0.0;
  double mbps = 0.0;
};

// Piecewise-constant throughput log. A sample's rate holds from its timestamp
// until the next sample. Replay past the last timestamp wraps modulo that
// timestamp, so the final sample marks the loop point.
class ThroughputTrace {
 public:
  // Throws ValidationError unless timestamps are strictly increasing from
  // >= 0 and every throughput is > 0.
  explicit ThroughputTrace(std::vector<TraceSample> samples,
                           std::string name = "");

  const std::vector<TraceSample>& samples() const { return samples_; }
  const std::string& name() const { return name_; }
  std::size_t size() const { return samples_.size(); }

  // Wrap period in seconds; 0 for a single-sample (constant) trace.
  double period() const { return period_; }

  double mean_mbps() const;

  // Text form accepted by parse_trace.
  std::string to_text() const;

 private:
  std::vector<TraceSample> samples_;
  std::string name_;
  double period_ = 0.0;
};

struct MarkovState {
  double mean_mbps = 1.0;
  double std_mbps = 0.0;
};

struct Download {
  double end_time_s = 0.0;
  double duration_s = 0.0;
};

inline constexpr double kSynthFloorMbps = 0.01;

// Lines of "timestamp_s throughput_mbps"; '#' comments and blank lines are
// skipped. Throws ParseError (with line number) or ValidationError.
ThroughputTrace parse_trace(std::string_view text, std::string name = "");

ThroughputTrace load_trace(const std::string& path);

// Markov-modulated Gaussian trace sampled every `step_s` over [0, duration_s).
ThroughputTrace synth_trace(std::uint64_t seed, double duration_s,
                            const std::vector<MarkovState>& states,
                            double transition_prob, double step_s,
                            std::string name = "synth");

// State index visited at each step by synth_trace for the same arguments.
std::vector<std::size_t> synth_state_path(std::uint64_t seed,
                                          std::size_t n_steps,
                                          std::size_t n_states,
                                          double transition_prob);

double throughput_at(const ThroughputTrace& trace, double time_s);

// Exact end time of a `payload_mb` megabit transfer started at `start_s`.
Download integrate_download(const ThroughputTrace& trace, double start_s,
                            double payload_mb);

}  // namespace semabr
