#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semabr/player.hpp"
#include "semabr/policy.hpp"

namespace semabr {

// n / sum(1/x). Throws ValidationError on empty or non-positive input.
double harmonic_mean(std::span<const double> xs);

// Harmonic mean of the newest `window` non-zero throughputs, if any.
std::optional<double> predict_throughput(const ObservationState& obs,
                                         std::size_t window = 5);

std::size_t rate_based_decide(const ObservationState& obs, double safety = 0.9,
                              std::size_t window = 5);

std::size_t buffer_based_decide(const ObservationState& obs, double reservoir_s,
                                double cushion_s);

// BOLA-BASIC with Q = buffer / L and v_m = ln(a_m / a_1).
std::size_t bola_decide(const ObservationState& obs, double V, double gamma_p);
double bola_default_v(const ObservationState& obs, double gamma_p);

// Exhaustive horizon search under a constant throughput prediction. Depth is
// min(horizon, remaining chunks, available size rows).
std::size_t mpc_search(const ObservationState& obs, const QoEWeights& weights,
                       double predicted_mbps, std::size_t horizon);

// Robust variant: harmonic-mean prediction discounted by 1 + max recent
// relative error. Falls back to the lowest bitrate with no history.
std::size_t robustmpc_decide(const ObservationState& obs, const QoEWeights& weights,
                             std::size_t horizon, double max_recent_error);

// Delivery parameters the semantic selector substitutes into an observation.
struct SemanticView {
  std::int64_t chunk_bytes = 0;
  double processing_s = 0.0;
  double quality = 1.0;
};

ObservationState apply_semantic_view(const ObservationState& obs,
                                     const SemanticView& view);

std::size_t ldabs_decide(const ObservationState& obs, const QoEWeights& weights,
                         Policy& inner, const SemanticView& view);

class RateBasedPolicy final : public Policy {
 public:
  explicit RateBasedPolicy(double safety = 0.9, std::size_t window = 5)
      : safety_(safety), window_(window) {}
  std::string name() const override { return "rate"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights&) override {
    return rate_based_decide(obs, safety_, window_);
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RateBasedPolicy>(*this);
  }

 private:
  double safety_;
  std::size_t window_;
};

class BufferBasedPolicy final : public Policy {
 public:
  explicit BufferBasedPolicy(double reservoir_s = 5.0, double cushion_s = 10.0);
  std::string name() const override { return "buffer"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights&) override {
    return buffer_based_decide(obs, reservoir_s_, cushion_s_);
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<BufferBasedPolicy>(*this);
  }

 private:
  double reservoir_s_;
  double cushion_s_;
};

class BolaPolicy final : public Policy {
 public:
  // V defaults to (cap/L - 1) / (v_M + gamma_p) computed per observation.
  explicit BolaPolicy(std::optional<double> v = std::nullopt, double gamma_p = 5.0);
  std::string name() const override { return "bola"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights&) override;
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<BolaPolicy>(*this);
  }

 private:
  std::optional<double> v_;
  double gamma_p_;
};

class RobustMpcPolicy final : public Policy {
 public:
  explicit RobustMpcPolicy(std::size_t horizon = 5, std::size_t error_window = 5);
  std::string name() const override { return "robustmpc"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights& weights) override;
  void reset() override;
  std::unique_ptr<Policy> clone() const override;

  double max_recent_error() const;

 private:
  std::size_t horizon_;
  std::size_t error_window_;
  std::deque<double> errors_;
  std::optional<double> last_prediction_;
  std::optional<std::size_t> last_chunk_;
};

// Semantic-aware selector: feeds the inner policy semantic chunk sizes,
// processing delay and the quality proxy for the current SNR estimate.
class LdabsPolicy final : public Policy {
 public:
  // `base` carries the chunk bytes and processing delay; its quality is
  // recomputed from each observation's SNR estimate.
  LdabsPolicy(std::unique_ptr<Policy> inner, SemanticContext ctx,
              SemanticView base);
  std::string name() const override { return "ldabs"; }
  std::size_t decide(const ObservationState& obs, const QoEWeights& weights) override;
  void reset() override { inner_->reset(); }
  std::unique_ptr<Policy> clone() const override;

  SemanticView view_for(const ObservationState& obs) const;

 private:
  std::unique_ptr<Policy> inner_;
  SemanticContext ctx_;
  SemanticView base_;
};

// Replays a fixed per-chunk plan.
class PlanPolicy final : public Policy {
 public:
  PlanPolicy(std::vector<std::size_t> plan, std::string name = "offline")
      : plan_(std::move(plan)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::size_t decide(const ObservationState& obs, const QoEWeights&) override {
    return plan_.at(obs.chunk_index);
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<PlanPolicy>(*this);
  }

 private:
  std::vector<std::size_t> plan_;
  std::string name_;
};

// Session dynamics with buffer level and wall clock rounded to a grid after
// every chunk. The offline planner is exact for this model.
struct DiscreteSimConfig {
  double grid_s = 0.5;
  double buffer_cap_s = 60.0;
};

struct OfflinePlan {
  std::vector<std::size_t> plan;
  double total_qoe = 0.0;
};

double evaluate_plan_discretized(std::span<const std::size_t> plan,
                                 const ChunkManifest& manifest,
                                 const ThroughputTrace& trace,
                                 const DeliveryModel& delivery,
                                 const QoEWeights& weights,
                                 const DiscreteSimConfig& cfg);

OfflinePlan offline_optimal(const ChunkManifest& manifest,
                            const ThroughputTrace& trace,
                            const DeliveryModel& delivery,
                            const QoEWeights& weights,
                            const DiscreteSimConfig& cfg);

using PolicyParams = std::map<std::string, double>;

// Names: rate, buffer, bola, robustmpc, ldabs. "ldabs" needs `semantic` and
// `view`; its inner policy is robustmpc configured from the same params.
// "offline" is built by the experiment runner from a plan.
std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const PolicyParams& params,
                                    const SemanticContext* semantic = nullptr,
                                    const SemanticView* view = nullptr);

SemanticView semantic_view_for(const ChunkManifest& manifest,
                               const SemanticContext& ctx);

}  // namespace semabr
