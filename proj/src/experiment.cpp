#include "semabr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "semabr/error.hpp"
#include "semabr/rng.hpp"

namespace semabr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to a JSON object that reports the dotted field path on error
// and rejects keys it was not asked about.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ValidationError("config field '" + join(key) + "': " + what);
  }

  std::string join(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(key, "missing");
    return obj_.at(key);
  }

  Fields child(const std::string& key) { return Fields(raw(key), join(key)); }

  template <typename T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail(key, "expected a number");
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k)) fail(k, "unknown field");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

GopStructure read_gop(Fields f) {
  GopStructure g;
  g.pattern = f.get<std::string>("pattern", g.pattern);
  g.width = f.get<int>("width", g.width);
  g.height = f.get<int>("height", g.height);
  g.fps = f.number("fps", g.fps);
  f.finish();
  try {
    g.validate();
  } catch (const ValidationError& e) {
    f.fail("", e.what());
  }
  return g;
}

SemanticProfile read_profile(Fields f) {
  SemanticProfile p;
  p.downsample_factor = f.get<int>("downsample_factor", p.downsample_factor);
  p.latent_channels = f.get<int>("latent_channels", p.latent_channels);
  p.bytes_per_latent_element = f.number("bytes_per_latent_element", p.bytes_per_latent_element);
  p.metadata_bytes_p = f.number("metadata_bytes_p", p.metadata_bytes_p);
  p.metadata_bytes_b = f.number("metadata_bytes_b", p.metadata_bytes_b);
  p.frame_weight_i = f.number("frame_weight_i", p.frame_weight_i);
  p.frame_weight_p = f.number("frame_weight_p", p.frame_weight_p);
  p.frame_weight_b = f.number("frame_weight_b", p.frame_weight_b);
  f.finish();
  try {
    p.validate();
  } catch (const ValidationError& e) {
    f.fail("", e.what());
  }
  return p;
}

StageLatency read_stages(Fields f, StageLatency s) {
  s.iframe_extraction = f.number("iframe_extraction", s.iframe_extraction);
  s.vae_encoding = f.number("vae_encoding", s.vae_encoding);
  s.zframe_compression = f.number("zframe_compression", s.zframe_compression);
  s.metadata_generation = f.number("metadata_generation", s.metadata_generation);
  s.latent_decoding = f.number("latent_decoding", s.latent_decoding);
  s.interpolation = f.number("interpolation", s.interpolation);
  s.iframe_reconstruction = f.number("iframe_reconstruction", s.iframe_reconstruction);
  f.finish();
  return s;
}

LatencyProfile read_latency(Fields f) {
  LatencyProfile p = LatencyProfile::defaults();
  for (Resolution r : {Resolution::k360p, Resolution::k720p, Resolution::k1080p}) {
    const std::string key(to_string(r));
    if (f.has(key)) p.at(r) = read_stages(f.child(key), p.at(r));
  }
  f.finish();
  try {
    p.validate();
  } catch (const ValidationError& e) {
    f.fail("", e.what());
  }
  return p;
}

LatencyRange read_range(Fields& f, const std::string& key, LatencyRange fallback) {
  if (!f.has(key)) return fallback;
  const auto v = f.get<std::vector<double>>(key);
  if (v.size() != 2 || !(v[0] <= v[1])) f.fail(key, "expected [low, high] with low <= high");
  return {v[0], v[1]};
}

SemanticContext read_semantic(Fields f) {
  SemanticContext s;
  if (f.has("profile")) s.profile = read_profile(f.child("profile"));
  s.channel.snr_db = f.number("snr_db", s.channel.snr_db);
  s.channel.gain = f.number("gain", s.channel.gain);
  s.channel.csi_error_db = f.number("csi_error_db", s.channel.csi_error_db);
  s.csi_error_spread_db = f.number("csi_error_spread_db", s.csi_error_spread_db);
  s.kappa = f.number("kappa", s.kappa);
  s.refine_steps = f.get<int>("refine_steps", s.refine_steps);
  s.latent_dim = f.get<std::size_t>("latent_dim", s.latent_dim);
  if (f.has("schedule")) {
    Fields sf = f.child("schedule");
    const int steps = sf.get<int>("T", 1000);
    const double b0 = sf.number("beta_start", 1e-4);
    const double b1 = sf.number("beta_end", 0.02);
    sf.finish();
    try {
      s.schedule = build_schedule(steps, b0, b1);
    } catch (const ValidationError& e) {
      sf.fail("", e.what());
    }
  }
  if (f.has("latency")) s.latency = read_latency(f.child("latency"));
  f.finish();
  try {
    s.validate();
  } catch (const ValidationError& e) {
    f.fail("", e.what());
  }
  return s;
}

PolicySpec read_policy(Fields f) {
  PolicySpec p;
  p.name = f.get<std::string>("name");
  p.label = f.get<std::string>("label", p.name);
  if (f.has("params")) {
    const json& params = f.raw("params");
    if (!params.is_object()) f.fail("params", "expected an object");
    for (const auto& [k, v] : params.items()) {
      if (!v.is_number()) f.fail("params." + k, "expected a number");
      p.params[k] = v.get<double>();
    }
  }
  if (f.has("mode")) {
    const auto mode = f.get<std::string>("mode");
    if (mode != "plain" && mode != "semantic") f.fail("mode", "expected plain|semantic");
    p.semantic = mode == "semantic";
  }
  f.finish();
  static const std::set<std::string> known{"rate", "buffer", "bola", "robustmpc",
                                           "offline", "ldabs"};
  if (!known.count(p.name)) f.fail("name", "unknown policy '" + p.name + "'");
  if (p.name == "ldabs" && p.semantic == false)
    f.fail("mode", "policy 'ldabs' requires semantic delivery");
  if (p.name == "offline") {
    for (const auto& [k, v] : p.params)
      if (k != "grid_s") f.fail("params." + k, "unknown parameter");
  } else {
    try {
      SemanticContext ctx;
      SemanticView view;
      make_policy(p.name, p.params, &ctx, &view);
    } catch (const ValidationError& e) {
      f.fail("params", e.what());
    }
  }
  return p;
}

TraceSynthSpec read_trace_synth(Fields f) {
  TraceSynthSpec s;
  s.name = f.get<std::string>("name", s.name);
  s.duration_s = f.number("duration_s", s.duration_s);
  s.step_s = f.number("step_s", s.step_s);
  s.transition_prob = f.number("transition_prob", s.transition_prob);
  if (f.has("seed")) s.seed = f.get<std::uint64_t>("seed");
  if (f.has("states")) {
    const auto states = f.get<std::vector<std::vector<double>>>("states");
    if (states.empty()) f.fail("states", "state list is empty");
    s.states.clear();
    for (const auto& st : states) {
      if (st.size() != 2) f.fail("states", "expected [mean_mbps, std_mbps] pairs");
      s.states.push_back({st[0], st[1]});
    }
  }
  f.finish();
  return s;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  Fields f(doc, "");
  RunConfig cfg;

  const int version = f.get<int>("schema_version");
  if (version != kConfigSchemaVersion)
    f.fail("schema_version", "unsupported version " + std::to_string(version));
  if (!f.has("seed")) f.fail("seed", "missing (runs are always explicitly seeded)");
  cfg.seed = f.get<std::uint64_t>("seed");
  cfg.out_dir = resolve(base_dir, f.get<std::string>("out_dir", "out"));

  if (f.has("manifest")) {
    Fields mf = f.child("manifest");
    if (mf.has("path")) cfg.manifest.path = resolve(base_dir, mf.get<std::string>("path"));
    if (mf.has("synth")) {
      Fields sf = mf.child("synth");
      auto& s = cfg.manifest.synth;
      s.ladder_kbps = sf.get<std::vector<int>>("ladder_kbps", s.ladder_kbps);
      s.chunk_count = sf.get<std::size_t>("chunk_count", s.chunk_count);
      s.chunk_duration_s = sf.number("chunk_duration_s", s.chunk_duration_s);
      s.size_noise = sf.number("size_noise", s.size_noise);
      if (sf.has("gop")) s.gop = read_gop(sf.child("gop"));
      sf.finish();
      try {
        BitrateLadder ladder(s.ladder_kbps);
      } catch (const ValidationError& e) {
        sf.fail("ladder_kbps", e.what());
      }
      if (s.chunk_count < 1) sf.fail("chunk_count", "must be >= 1");
      if (!(s.chunk_duration_s > 0.0)) sf.fail("chunk_duration_s", "must be > 0");
      if (!(s.size_noise >= 0.0 && s.size_noise < 0.5)) sf.fail("size_noise", "must be in [0, 0.5)");
    }
    mf.finish();
  }

  if (f.has("traces")) {
    const json& arr = f.raw("traces");
    if (!arr.is_array()) f.fail("traces", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields tf(arr[i], "traces[" + std::to_string(i) + "]");
      TraceSource src;
      if (tf.has("path")) src.path = resolve(base_dir, tf.get<std::string>("path"));
      if (tf.has("synth")) src.synth = read_trace_synth(tf.child("synth"));
      tf.finish();
      if (!src.path && !src.synth) tf.fail("", "needs 'path' or 'synth'");
      cfg.traces.push_back(std::move(src));
    }
  }
  if (f.has("trace_dir")) cfg.trace_dir = resolve(base_dir, f.get<std::string>("trace_dir"));
  if (cfg.traces.empty() && !cfg.trace_dir) f.fail("traces", "at least one trace is required");

  if (f.has("policy")) cfg.policies.push_back(read_policy(f.child("policy")));
  if (f.has("policies")) {
    const json& arr = f.raw("policies");
    if (!arr.is_array()) f.fail("policies", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.policies.push_back(read_policy(Fields(arr[i], "policies[" + std::to_string(i) + "]")));
  }
  if (cfg.policies.empty()) f.fail("policy", "at least one policy is required");
  {
    std::set<std::string> labels;
    for (const auto& p : cfg.policies)
      if (!labels.insert(p.label).second) f.fail("policies", "duplicate label '" + p.label + "'");
  }

  const auto mode = f.get<std::string>("mode", "plain");
  if (mode != "plain" && mode != "semantic") f.fail("mode", "expected plain|semantic");
  cfg.semantic_mode = mode == "semantic";
  if (f.has("semantic")) cfg.semantic = read_semantic(f.child("semantic"));

  if (f.has("qoe")) {
    Fields qf = f.child("qoe");
    cfg.weights.alpha = qf.number("alpha", cfg.weights.alpha);
    cfg.weights.beta = qf.number("beta", cfg.weights.beta);
    qf.finish();
    if (!(cfg.weights.alpha >= 0.0 && cfg.weights.beta >= 0.0))
      qf.fail("", "weights must be >= 0");
  }
  if (f.has("player")) {
    Fields pf = f.child("player");
    cfg.player.buffer_cap_s = pf.number("buffer_cap_s", cfg.player.buffer_cap_s);
    cfg.player.history_len = pf.get<std::size_t>("history_len", cfg.player.history_len);
    cfg.player.lookahead = pf.get<std::size_t>("lookahead", cfg.player.lookahead);
    pf.finish();
    if (cfg.player.history_len < 1) pf.fail("history_len", "must be >= 1");
    if (cfg.player.lookahead < 1) pf.fail("lookahead", "must be >= 1");
  }
  if (f.has("offline")) {
    Fields of = f.child("offline");
    cfg.offline_grid_s = of.number("grid_s", cfg.offline_grid_s);
    of.finish();
    if (!(cfg.offline_grid_s > 0.0)) of.fail("grid_s", "must be > 0");
  }
  if (f.has("latency_report")) {
    Fields lf = f.child("latency_report");
    auto& l = cfg.latency_report;
    if (lf.has("resolution")) {
      try {
        l.resolution = parse_resolution(lf.get<std::string>("resolution"));
      } catch (const ValidationError& e) {
        lf.fail("resolution", e.what());
      }
    }
    l.chunk_count = lf.get<int>("chunk_count", l.chunk_count);
    l.network_ms = read_range(lf, "network_ms", l.network_ms);
    l.traditional_ms = read_range(lf, "traditional_ms", l.traditional_ms);
    l.pixel_ddpm_ms = read_range(lf, "pixel_ddpm_ms", l.pixel_ddpm_ms);
    lf.finish();
  }
  f.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path))
    throw ValidationError("config file not found: " + path.string());
  return parse_config(read_file(path), path.has_parent_path() ? path.parent_path() : ".");
}

ChunkManifest resolve_manifest(const RunConfig& cfg) {
  if (cfg.manifest.path) {
    if (!fs::exists(*cfg.manifest.path))
      throw ValidationError("manifest path does not exist: " + cfg.manifest.path->string());
    return ChunkManifest::from_json(read_file(*cfg.manifest.path));
  }
  const auto& s = cfg.manifest.synth;
  return generate_manifest(derive_seed(cfg.seed, 0x6d616e), BitrateLadder(s.ladder_kbps),
                           s.chunk_count, s.chunk_duration_s, s.gop, s.size_noise);
}

std::vector<ThroughputTrace> resolve_traces(const RunConfig& cfg) {
  std::vector<ThroughputTrace> out;
  for (std::size_t i = 0; i < cfg.traces.size(); ++i) {
    const auto& src = cfg.traces[i];
    if (src.path) {
      if (!fs::exists(*src.path))
        throw ValidationError("trace path does not exist: " + src.path->string());
      out.push_back(load_trace(src.path->string()));
    } else {
      const auto& s = *src.synth;
      const std::uint64_t seed = s.seed.value_or(derive_seed(cfg.seed, 0x7472 + i));
      out.push_back(synth_trace(seed, s.duration_s, s.states, s.transition_prob,
                                s.step_s, s.name));
    }
  }
  if (cfg.trace_dir) {
    if (!fs::is_directory(*cfg.trace_dir))
      throw ValidationError("trace_dir does not exist: " + cfg.trace_dir->string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(*cfg.trace_dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) out.push_back(load_trace(p.string()));
  }
  std::set<std::string> names;
  for (const auto& t : out)
    if (!names.insert(t.name()).second)
      throw ValidationError("duplicate trace name '" + t.name() + "'");
  return out;
}

std::uint64_t session_seed(std::uint64_t seed, const std::string& policy,
                           const std::string& trace) {
  return seed + stable_hash(policy + "\x1f" + trace);
}

SessionOutcome simulate(const RunConfig& cfg, const PolicySpec& spec,
                        const ChunkManifest& manifest, const ThroughputTrace& trace) {
  const bool semantic =
      spec.name == "ldabs" || spec.semantic.value_or(cfg.semantic_mode);
  const std::uint64_t seed = session_seed(cfg.seed, spec.label, trace.name());
  const DeliveryModel delivery = semantic
                                     ? DeliveryModel::semantic(manifest, cfg.semantic, seed)
                                     : DeliveryModel::plain(manifest);
  DiscreteSimConfig disc;
  disc.buffer_cap_s = cfg.player.buffer_cap_s;
  disc.grid_s = cfg.offline_grid_s;

  std::unique_ptr<Policy> policy;
  if (spec.name == "offline") {
    if (auto it = spec.params.find("grid_s"); it != spec.params.end()) disc.grid_s = it->second;
    OfflinePlan plan = offline_optimal(manifest, trace, delivery, cfg.weights, disc);
    policy = std::make_unique<PlanPolicy>(std::move(plan.plan), "offline");
  } else {
    const SemanticView view = semantic_view_for(manifest, cfg.semantic);
    policy = make_policy(spec.name, spec.params, &cfg.semantic, &view);
  }

  SessionOutcome out;
  out.policy_label = spec.label;
  out.log = run_session(*policy, manifest, trace, delivery, cfg.player, cfg.weights);
  const auto plan = out.log.plan();
  out.qoe_mean_discretized =
      evaluate_plan_discretized(plan, manifest, trace, delivery, cfg.weights, disc) /
      static_cast<double>(manifest.chunk_count());

  if (semantic) {
    const std::uint64_t pseed = derive_seed(seed, 0x706970);
    const Latent iframe = Latent::standard_normal(cfg.semantic.latent_dim, pseed);
    std::vector<Latent> deltas;
    const auto& pattern = manifest.gop().pattern;
    for (std::size_t j = 1; j < pattern.size(); ++j) {
      const Latent unit = Latent::standard_normal(cfg.semantic.latent_dim, derive_seed(pseed, j));
      std::vector<double> v(unit.values().begin(), unit.values().end());
      for (double& x : v) x *= 0.1;
      deltas.emplace_back(std::move(v));
    }
    out.pipeline = reconstruct_gop(iframe, deltas, cfg.semantic.channel,
                                   cfg.semantic.schedule, GaussianPriorDenoiser{},
                                   cfg.semantic.refine_steps, derive_seed(pseed, 0));
  }
  return out;
}

std::string summary_json(const SessionOutcome& s, const ChunkManifest& manifest,
                         const RunConfig& cfg) {
  const SessionLog& log = s.log;
  const auto agg = session_aggregate(log.chunks, cfg.weights, manifest.ladder());
  double rebuf_s = 0.0;
  double kbps = 0.0;
  std::int64_t bytes = 0;
  for (const auto& c : log.chunks) {
    rebuf_s += c.rebuffer_s;
    kbps += c.bitrate_kbps;
    bytes += c.transmitted_bytes;
  }
  const double n = static_cast<double>(log.chunks.size());
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["policy"] = s.policy_label;
  doc["trace"] = log.trace;
  doc["mode"] = log.semantic ? "semantic" : "plain";
  doc["seed"] = cfg.seed;
  doc["chunks"] = log.chunks.size();
  doc["qoe_aggregation"] = "mean per chunk";
  doc["qoe_mean"] = agg.mean.total;
  doc["qoe_total"] = agg.totals.total;
  doc["utility_mean"] = agg.mean.utility;
  doc["smoothness_mean"] = agg.mean.smoothness;
  doc["rebuffer_penalty_mean"] = agg.mean.rebuffer;
  doc["qoe_mean_discretized"] = s.qoe_mean_discretized;
  doc["rebuffer_s_total"] = rebuf_s;
  doc["startup_delay_s"] = log.startup_delay_s;
  doc["wall_time_s"] = log.wall_time_s;
  doc["bitrate_kbps_mean"] = kbps / n;
  doc["transmitted_bytes_total"] = bytes;
  if (s.pipeline) {
    doc["pipeline"] = {{"denoise_step", s.pipeline->denoise_step},
                       {"iframe_latent_mse", s.pipeline->iframe_mse},
                       {"dependent_latent_mse", s.pipeline->dependent_mse},
                       {"latent_dim", cfg.semantic.latent_dim}};
  }
  return doc.dump(2) + "\n";
}

RunArtifacts run(const RunConfig& cfg) {
  const ChunkManifest manifest = resolve_manifest(cfg);
  const auto traces = resolve_traces(cfg);
  if (traces.empty()) throw ValidationError("config field 'traces': no traces found");
  RunArtifacts a;
  a.outcome = simulate(cfg, cfg.policies.front(), manifest, traces.front());

  a.session_csv = cfg.out_dir / "session.csv";
  a.summary_json = cfg.out_dir / "summary.json";
  a.cdf_csv = cfg.out_dir / "cdf.csv";
  std::vector<double> per_chunk;
  for (const auto& q : a.outcome.log.qoe) per_chunk.push_back(q.total);
  write_file(a.session_csv, session_csv(a.outcome.log));
  write_file(a.summary_json, summary_json(a.outcome, manifest, cfg));
  write_file(a.cdf_csv, cdf_csv(cdf(per_chunk)));
  return a;
}

BatchArtifacts batch(const RunConfig& cfg, unsigned jobs) {
  const ChunkManifest manifest = resolve_manifest(cfg);
  const auto traces = resolve_traces(cfg);
  if (traces.empty()) throw ValidationError("config field 'traces': no traces found");

  std::vector<const PolicySpec*> policies;
  for (const auto& p : cfg.policies) policies.push_back(&p);
  std::sort(policies.begin(), policies.end(),
            [](const PolicySpec* a, const PolicySpec* b) { return a->label < b->label; });
  std::vector<const ThroughputTrace*> order;
  for (const auto& t : traces) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const ThroughputTrace* a, const ThroughputTrace* b) {
    return a->name() < b->name();
  });

  struct Job {
    const PolicySpec* policy;
    const ThroughputTrace* trace;
  };
  std::vector<Job> work;
  for (const auto* p : policies)
    for (const auto* t : order) work.push_back({p, t});

  std::vector<std::optional<SessionOutcome>> results(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      try {
        results[i] = simulate(cfg, *work[i].policy, manifest, *work[i].trace);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!errors[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      what = e.what();
    }
    throw std::runtime_error("session (" + work[i].policy->label + ", " +
                             work[i].trace->name() + ") failed: " + what);
  }

  BatchArtifacts a;
  std::ostringstream summary;
  summary << "policy,trace,mode,chunks,qoe_mean,utility_mean,smooth_mean,rebuf_mean,"
             "rebuffer_s,bitrate_kbps_mean,qoe_mean_discretized\n";
  struct PolicyAcc {
    std::vector<double> qoe, util, smooth, rebuf, disc;
  };
  std::map<std::string, PolicyAcc> per_policy;

  for (std::size_t i = 0; i < work.size(); ++i) {
    SessionOutcome& s = *results[i];
    const auto path = cfg.out_dir / "sessions" / (s.policy_label + "__" + s.log.trace + ".csv");
    write_file(path, session_csv(s.log));
    write_file(cfg.out_dir / "summaries" / (s.policy_label + "__" + s.log.trace + ".json"),
               summary_json(s, manifest, cfg));
    a.session_csvs.push_back(path);

    const auto agg = session_aggregate(s.log.chunks, cfg.weights, manifest.ladder());
    double rebuf_s = 0.0;
    double kbps = 0.0;
    for (const auto& c : s.log.chunks) {
      rebuf_s += c.rebuffer_s;
      kbps += c.bitrate_kbps;
    }
    summary << s.policy_label << ',' << s.log.trace << ','
            << (s.log.semantic ? "semantic" : "plain") << ',' << s.log.chunks.size()
            << ',' << fmt6(agg.mean.total) << ',' << fmt6(agg.mean.utility) << ','
            << fmt6(agg.mean.smoothness) << ',' << fmt6(agg.mean.rebuffer) << ','
            << fmt6(rebuf_s) << ','
            << fmt6(kbps / static_cast<double>(s.log.chunks.size())) << ','
            << fmt6(s.qoe_mean_discretized) << '\n';
    auto& acc = per_policy[s.policy_label];
    acc.qoe.push_back(agg.mean.total);
    acc.util.push_back(agg.mean.utility);
    acc.smooth.push_back(agg.mean.smoothness);
    acc.rebuf.push_back(agg.mean.rebuffer);
    acc.disc.push_back(s.qoe_mean_discretized);
    a.sessions.push_back(std::move(s));
  }
  a.summary_csv = cfg.out_dir / "summary.csv";
  write_file(a.summary_csv, summary.str());

  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  std::ostringstream cmp;
  cmp << "policy,traces,qoe_mean,utility_mean,smooth_mean,rebuf_mean,qoe_mean_discretized\n";
  for (const auto& [label, acc] : per_policy) {
    cmp << label << ',' << acc.qoe.size() << ',' << fmt6(mean(acc.qoe)) << ','
        << fmt6(mean(acc.util)) << ',' << fmt6(mean(acc.smooth)) << ','
        << fmt6(mean(acc.rebuf)) << ',' << fmt6(mean(acc.disc)) << '\n';
    const auto path = cfg.out_dir / ("cdf_" + label + ".csv");
    write_file(path, cdf_csv(cdf(acc.qoe)));
    a.cdf_csvs.push_back(path);
  }
  a.comparison_csv = cfg.out_dir / "comparison.csv";
  write_file(a.comparison_csv, cmp.str());
  return a;
}

std::string latency_report(const LatencyProfile& profile,
                           const E2EComparisonConfig& cfg) {
  std::ostringstream os;
  char line[160];
  const auto& lo = profile.at(Resolution::k360p);
  const auto& mid = profile.at(Resolution::k720p);
  const auto& hi = profile.at(Resolution::k1080p);
  auto row = [&](const char* name, double a, double b, double c) {
    std::snprintf(line, sizeof line, "%-24s %8.1f %8.1f %8.1f\n", name, a, b, c);
    os << line;
  };
  os << "Per-chunk processing latency (ms)\n";
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s\n", "Component", "360p", "720p", "1080p");
  os << line;
  os << "-- transmitter --\n";
  row("I-frame extraction", lo.iframe_extraction, mid.iframe_extraction, hi.iframe_extraction);
  row("VAE encoding", lo.vae_encoding, mid.vae_encoding, hi.vae_encoding);
  row("Z-frame compression", lo.zframe_compression, mid.zframe_compression, hi.zframe_compression);
  row("Metadata generation", lo.metadata_generation, mid.metadata_generation, hi.metadata_generation);
  os << "-- receiver --\n";
  row("Latent decoding", lo.latent_decoding, mid.latent_decoding, hi.latent_decoding);
  row("Interpolation", lo.interpolation, mid.interpolation, hi.interpolation);
  row("I-frame reconstruction", lo.iframe_reconstruction, mid.iframe_reconstruction, hi.iframe_reconstruction);
  row("Total", lo.total(), mid.total(), hi.total());
  os << "\nEnd-to-end streaming latency (ms), " << cfg.chunk_count << " chunks at "
     << to_string(cfg.resolution) << "\n";
  for (const auto& r : e2e_comparison(profile, cfg)) {
    std::snprintf(line, sizeof line, "%-26s %10.1f - %10.1f\n", r.method.c_str(),
                  r.range.low_ms, r.range.high_ms);
    os << line;
  }
  return os.str();
}

}  // namespace semabr
