#include "semabr/abr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "semabr/error.hpp"

namespace semabr {

std::vector<double> ObservationState::observed_throughputs() const {
  std::vector<double> out;
  for (double x : past_throughputs_mbps)
    if (x > 0.0) out.push_back(x);
  return out;
}

double harmonic_mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("harmonic mean of an empty list");
  double inv = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) throw ValidationError("harmonic mean needs positive values");
    inv += 1.0 / x;
  }
  return static_cast<double>(xs.size()) / inv;
}

std::optional<double> predict_throughput(const ObservationState& obs,
                                         std::size_t window) {
  const auto seen = obs.observed_throughputs();
  if (seen.empty() || window == 0) return std::nullopt;
  const std::size_t n = std::min(window, seen.size());
  return harmonic_mean(std::span<const double>(seen).last(n));
}

namespace {

std::vector<double> log_utilities(const std::vector<int>& ladder) {
  std::vector<double> u(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i)
    u[i] = std::log(static_cast<double>(ladder[i]) / ladder.front());
  return u;
}

void require_ladder(const ObservationState& obs) {
  if (obs.bitrate_count() == 0 || obs.next_sizes.size() != obs.bitrate_count())
    throw ValidationError("observation has inconsistent ladder and sizes");
}

}  // namespace

std::size_t rate_based_decide(const ObservationState& obs, double safety,
                              std::size_t window) {
  require_ladder(obs);
  const auto pred = predict_throughput(obs, window);
  if (!pred) return 0;
  for (std::size_t m = obs.bitrate_count(); m-- > 0;) {
    const double d = static_cast<double>(obs.next_sizes[m]) * 8.0 / (*pred * 1e6);
    if (d <= safety * obs.chunk_duration_s) return m;
  }
  return 0;
}

std::size_t buffer_based_decide(const ObservationState& obs, double reservoir_s,
                                double cushion_s) {
  require_ladder(obs);
  if (!(reservoir_s >= 0.0) || !(cushion_s > 0.0))
    throw ValidationError("buffer-based needs reservoir >= 0 and cushion > 0");
  const std::size_t top = obs.bitrate_count() - 1;
  if (obs.buffer_s <= reservoir_s) return 0;
  if (obs.buffer_s >= reservoir_s + cushion_s) return top;
  const double pos = (obs.buffer_s - reservoir_s) / cushion_s * static_cast<double>(top);
  const auto idx = static_cast<std::size_t>(std::floor(pos + 0.5));
  return std::min(idx, top);
}

double bola_default_v(const ObservationState& obs, double gamma_p) {
  const auto u = log_utilities(obs.ladder_kbps);
  return (obs.buffer_cap_s / obs.chunk_duration_s - 1.0) / (u.back() + gamma_p);
}

std::size_t bola_decide(const ObservationState& obs, double V, double gamma_p) {
  require_ladder(obs);
  if (!(V > 0.0)) throw ValidationError("BOLA needs V > 0");
  const auto u = log_utilities(obs.ladder_kbps);
  const double q = obs.buffer_s / obs.chunk_duration_s;
  std::size_t best = 0;
  double best_score = 0.0;
  bool any = false;
  for (std::size_t m = 0; m < u.size(); ++m) {
    const double score =
        (V * (u[m] + gamma_p) - q) / static_cast<double>(obs.next_sizes[m]);
    if (score > 0.0 && (!any || score > best_score)) {
      best = m;
      best_score = score;
      any = true;
    }
  }
  return best;
}

namespace {

struct MpcSearch {
  const ObservationState& obs;
  const QoEWeights& w;
  std::vector<double> util;
  double mbps;
  std::size_t depth;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_first = 0;

  void run(std::size_t j, double buffer, std::optional<std::size_t> prev,
           double acc, std::size_t first) {
    if (j == depth) {
      if (acc > best) {
        best = acc;
        best_first = first;
      }
      return;
    }
    const bool startup = obs.chunk_index == 0 && j == 0;
    for (std::size_t m = 0; m < util.size(); ++m) {
      const double d =
          static_cast<double>(obs.upcoming_sizes[j][m]) * 8.0 / (mbps * 1e6) +
          obs.extra_latency_s;
      const BufferUpdate bu = advance_buffer(buffer, d, obs.chunk_duration_s,
                                             obs.buffer_cap_s, startup);
      const double u = obs.quality_scale * util[m];
      const double s = w.alpha * std::abs(util[m] - util[prev.value_or(m)]);
      const double r = w.beta * bu.rebuffer_s;
      run(j + 1, bu.buffer_after_s, m, acc + (u - s - r), j == 0 ? m : first);
    }
  }
};

}  // namespace

std::size_t mpc_search(const ObservationState& obs, const QoEWeights& weights,
                       double predicted_mbps, std::size_t horizon) {
  require_ladder(obs);
  if (horizon < 1) throw ValidationError("MPC horizon must be >= 1");
  if (!(predicted_mbps > 0.0)) throw ValidationError("MPC needs a positive prediction");
  const std::size_t depth =
      std::min({horizon, obs.remaining_chunks(), obs.upcoming_sizes.size()});
  if (depth == 0) return 0;
  MpcSearch search{obs, weights, log_utilities(obs.ladder_kbps), predicted_mbps, depth};
  search.run(0, obs.buffer_s, obs.last_bitrate_index, 0.0, 0);
  return search.best_first;
}

std::size_t robustmpc_decide(const ObservationState& obs, const QoEWeights& weights,
                             std::size_t horizon, double max_recent_error) {
  const auto pred = predict_throughput(obs, 5);
  if (!pred) return 0;
  return mpc_search(obs, weights, *pred / (1.0 + max_recent_error), horizon);
}

SemanticView semantic_view_for(const ChunkManifest& manifest,
                               const SemanticContext& ctx) {
  SemanticView v;
  v.chunk_bytes =
      semantic_chunk_size(manifest.gop(), ctx.profile, manifest.frames_per_chunk());
  v.processing_s =
      total_latency(ctx.latency, resolution_for_height(manifest.gop().height)) / 1000.0;
  v.quality = effective_quality(
      ctx.schedule, match_step(ctx.channel.estimated_snr_db(), ctx.schedule), ctx.kappa);
  return v;
}

ObservationState apply_semantic_view(const ObservationState& obs,
                                     const SemanticView& view) {
  ObservationState o = obs;
  std::fill(o.next_sizes.begin(), o.next_sizes.end(), view.chunk_bytes);
  for (auto& row : o.upcoming_sizes) std::fill(row.begin(), row.end(), view.chunk_bytes);
  o.extra_latency_s = view.processing_s;
  o.quality_scale = view.quality;
  return o;
}

std::size_t ldabs_decide(const ObservationState& obs, const QoEWeights& weights,
                         Policy& inner, const SemanticView& view) {
  if (!(view.quality > 0.0)) return 0;
  return inner.decide(apply_semantic_view(obs, view), weights);
}

BufferBasedPolicy::BufferBasedPolicy(double reservoir_s, double cushion_s)
    : reservoir_s_(reservoir_s), cushion_s_(cushion_s) {
  if (!(reservoir_s >= 0.0) || !(cushion_s > 0.0))
    throw ValidationError("buffer-based needs reservoir >= 0 and cushion > 0");
}

BolaPolicy::BolaPolicy(std::optional<double> v, double gamma_p)
    : v_(v), gamma_p_(gamma_p) {
  if (v_ && !(*v_ > 0.0)) throw ValidationError("BOLA needs V > 0");
}

std::size_t BolaPolicy::decide(const ObservationState& obs, const QoEWeights&) {
  return bola_decide(obs, v_.value_or(bola_default_v(obs, gamma_p_)), gamma_p_);
}

RobustMpcPolicy::RobustMpcPolicy(std::size_t horizon, std::size_t error_window)
    : horizon_(horizon), error_window_(error_window) {
  if (horizon_ < 1) throw ValidationError("MPC horizon must be >= 1");
}

void RobustMpcPolicy::reset() {
  errors_.clear();
  last_prediction_.reset();
  last_chunk_.reset();
}

std::unique_ptr<Policy> RobustMpcPolicy::clone() const {
  auto p = std::make_unique<RobustMpcPolicy>(horizon_, error_window_);
  return p;
}

double RobustMpcPolicy::max_recent_error() const {
  double m = 0.0;
  for (double e : errors_) m = std::max(m, e);
  return m;
}

std::size_t RobustMpcPolicy::decide(const ObservationState& obs,
                                    const QoEWeights& weights) {
  // Score the previous prediction against the download that just finished.
  if (last_prediction_ && last_chunk_ && obs.chunk_index == *last_chunk_ + 1 &&
      !obs.past_throughputs_mbps.empty()) {
    const double actual = obs.past_throughputs_mbps.back();
    if (actual > 0.0) {
      errors_.push_back(std::abs(*last_prediction_ - actual) / actual);
      while (errors_.size() > error_window_) errors_.pop_front();
    }
  }
  last_chunk_ = obs.chunk_index;
  last_prediction_ = predict_throughput(obs, 5);
  if (!last_prediction_) return 0;
  return mpc_search(obs, weights, *last_prediction_ / (1.0 + max_recent_error()),
                    horizon_);
}

LdabsPolicy::LdabsPolicy(std::unique_ptr<Policy> inner, SemanticContext ctx,
                         SemanticView base)
    : inner_(std::move(inner)), ctx_(std::move(ctx)), base_(base) {
  if (!inner_) throw ValidationError("ldabs needs an inner policy");
  ctx_.validate();
}

SemanticView LdabsPolicy::view_for(const ObservationState& obs) const {
  const double est = obs.estimated_snr_db.value_or(ctx_.channel.estimated_snr_db());
  SemanticView v = base_;
  v.quality = effective_quality(ctx_.schedule, match_step(est, ctx_.schedule),
                                ctx_.kappa);
  return v;
}

std::size_t LdabsPolicy::decide(const ObservationState& obs,
                                const QoEWeights& weights) {
  return ldabs_decide(obs, weights, *inner_, view_for(obs));
}

std::unique_ptr<Policy> LdabsPolicy::clone() const {
  return std::make_unique<LdabsPolicy>(inner_->clone(), ctx_, base_);
}

namespace {

struct Transition {
  double qoe;
  double buffer_after_s;
  double wall_after_s;
};

class DiscreteModel {
 public:
  DiscreteModel(const ChunkManifest& manifest, const ThroughputTrace& trace,
                const DeliveryModel& delivery, const QoEWeights& weights,
                const DiscreteSimConfig& cfg)
      : manifest_(manifest),
        trace_(trace),
        delivery_(delivery),
        weights_(weights),
        cfg_(cfg),
        util_(log_utilities(manifest.ladder().kbps())) {
    if (!(cfg.grid_s > 0.0)) throw ValidationError("buffer grid must be > 0");
    if (!(cfg.buffer_cap_s >= manifest.chunk_duration()))
      throw ValidationError("buffer cap must be at least one chunk duration");
    weights.validate();
  }

  double download_s(std::size_t k, std::size_t m, double wall_s) const {
    const double mb = static_cast<double>(delivery_.bytes(k, m)) * 8.0 / 1e6;
    return integrate_download(trace_, wall_s, mb).duration_s + delivery_.processing_s();
  }

  Transition apply(std::size_t k, std::size_t m, std::optional<std::size_t> prev,
                   double buffer_s, double wall_s, double d) const {
    const bool startup = k == 0;
    const BufferUpdate bu = advance_buffer(buffer_s, d, manifest_.chunk_duration(),
                                           cfg_.buffer_cap_s, startup);
    const double u = delivery_.quality(k) * util_[m];
    const double s = weights_.alpha * std::abs(util_[m] - util_[prev.value_or(m)]);
    const double r = weights_.beta * bu.rebuffer_s;
    return {u - s - r, bu.buffer_after_s, wall_s + d + bu.wait_s};
  }

  std::int64_t quantize(double x) const { return std::llround(x / cfg_.grid_s); }
  double level(std::int64_t idx) const { return static_cast<double>(idx) * cfg_.grid_s; }

 private:
  const ChunkManifest& manifest_;
  const ThroughputTrace& trace_;
  const DeliveryModel& delivery_;
  const QoEWeights& weights_;
  DiscreteSimConfig cfg_;
  std::vector<double> util_;
};

}  // namespace

double evaluate_plan_discretized(std::span<const std::size_t> plan,
                                 const ChunkManifest& manifest,
                                 const ThroughputTrace& trace,
                                 const DeliveryModel& delivery,
                                 const QoEWeights& weights,
                                 const DiscreteSimConfig& cfg) {
  if (plan.size() != manifest.chunk_count())
    throw ValidationError("plan length must equal the chunk count");
  const DiscreteModel model(manifest, trace, delivery, weights, cfg);
  std::int64_t b_idx = 0;
  std::int64_t w_idx = 0;
  std::optional<std::size_t> prev;
  double acc = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const std::size_t m = plan[k];
    if (m >= manifest.bitrate_count()) throw ValidationError("plan index out of range");
    const double wall = model.level(w_idx);
    const Transition t =
        model.apply(k, m, prev, model.level(b_idx), wall, model.download_s(k, m, wall));
    acc += t.qoe;
    b_idx = model.quantize(t.buffer_after_s);
    w_idx = model.quantize(t.wall_after_s);
    prev = m;
  }
  return acc;
}

OfflinePlan offline_optimal(const ChunkManifest& manifest,
                            const ThroughputTrace& trace,
                            const DeliveryModel& delivery,
                            const QoEWeights& weights,
                            const DiscreteSimConfig& cfg) {
  const DiscreteModel model(manifest, trace, delivery, weights, cfg);
  const std::size_t n_chunks = manifest.chunk_count();
  const std::size_t n_rates = manifest.bitrate_count();

  struct Node {
    double value;
    std::int64_t b_idx;
    std::int64_t w_idx;
    std::size_t m;
    std::size_t parent;  // index into the previous stage
  };
  auto key = [](std::size_t m, std::int64_t b, std::int64_t w) {
    return (static_cast<std::uint64_t>(m) << 56) ^
           (static_cast<std::uint64_t>(b) << 36) ^ static_cast<std::uint64_t>(w);
  };

  std::vector<std::vector<Node>> stages(n_chunks);
  for (std::size_t k = 0; k < n_chunks; ++k) {
    std::vector<Node>& cur = stages[k];
    std::unordered_map<std::uint64_t, std::size_t> index;
    // Download times depend only on (m, wall clock) within a stage.
    std::unordered_map<std::int64_t, std::vector<double>> dl_cache;

    auto expand = [&](double value, std::int64_t b_idx, std::int64_t w_idx,
                      std::optional<std::size_t> prev, std::size_t parent) {
      auto [it, fresh] = dl_cache.try_emplace(w_idx);
      if (fresh) {
        it->second.resize(n_rates);
        for (std::size_t m = 0; m < n_rates; ++m)
          it->second[m] = model.download_s(k, m, model.level(w_idx));
      }
      const std::vector<double>& dls = it->second;
      for (std::size_t m = 0; m < n_rates; ++m) {
        const Transition t =
            model.apply(k, m, prev, model.level(b_idx), model.level(w_idx), dls[m]);
        const double v = value + t.qoe;
        const std::int64_t nb = model.quantize(t.buffer_after_s);
        const std::int64_t nw = model.quantize(t.wall_after_s);
        auto [slot, inserted] = index.try_emplace(key(m, nb, nw), cur.size());
        if (inserted) {
          cur.push_back({v, nb, nw, m, parent});
        } else if (v > cur[slot->second].value) {
          cur[slot->second].value = v;
          cur[slot->second].parent = parent;
        }
      }
    };

    if (k == 0) {
      expand(0.0, 0, 0, std::nullopt, 0);
    } else {
      const std::vector<Node>& prev_stage = stages[k - 1];
      for (std::size_t i = 0; i < prev_stage.size(); ++i) {
        const Node& n = prev_stage[i];
        expand(n.value, n.b_idx, n.w_idx, n.m, i);
      }
    }
  }

  const std::vector<Node>& last = stages.back();
  std::size_t best = 0;
  for (std::size_t i = 1; i < last.size(); ++i)
    if (last[i].value > last[best].value) best = i;

  OfflinePlan out;
  out.total_qoe = last[best].value;
  out.plan.resize(n_chunks);
  std::size_t idx = best;
  for (std::size_t k = n_chunks; k-- > 0;) {
    out.plan[k] = stages[k][idx].m;
    idx = stages[k][idx].parent;
  }
  return out;
}

namespace {

double param(const PolicyParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void require_known(const std::string& policy, const PolicyParams& p,
                   std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok)
      throw ValidationError("policy '" + policy + "': unknown parameter '" + k + "'");
  }
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v))
    throw ValidationError(std::string(what) + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const PolicyParams& params,
                                    const SemanticContext* semantic,
                                    const SemanticView* view) {
  if (name == "rate") {
    require_known(name, params, {"safety", "window"});
    return std::make_unique<RateBasedPolicy>(
        param(params, "safety", 0.9), as_count(param(params, "window", 5), "window"));
  }
  if (name == "buffer") {
    require_known(name, params, {"reservoir_s", "cushion_s"});
    return std::make_unique<BufferBasedPolicy>(param(params, "reservoir_s", 5.0),
                                               param(params, "cushion_s", 10.0));
  }
  if (name == "bola") {
    require_known(name, params, {"V", "gamma_p"});
    std::optional<double> v;
    if (auto it = params.find("V"); it != params.end()) v = it->second;
    return std::make_unique<BolaPolicy>(v, param(params, "gamma_p", 5.0));
  }
  if (name == "robustmpc" || name == "ldabs") {
    require_known(name, params, {"horizon", "error_window"});
    auto mpc = std::make_unique<RobustMpcPolicy>(
        as_count(param(params, "horizon", 5), "horizon"),
        as_count(param(params, "error_window", 5), "error_window"));
    if (name == "robustmpc") return mpc;
    if (!semantic || !view)
      throw ValidationError("policy 'ldabs' requires semantic delivery settings");
    return std::make_unique<LdabsPolicy>(std::move(mpc), *semantic, *view);
  }
  throw ValidationError("unknown policy '" + name + "'");
}

}  // namespace semabr
