#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "semabr/error.hpp"
#include "semabr/experiment.hpp"
#include "semabr/qoe.hpp"

namespace py = pybind11;
using namespace semabr;

namespace {

py::dict breakdown(const QoEBreakdown& q) {
  py::dict d;
  d["utility"] = q.utility;
  d["smoothness"] = q.smoothness;
  d["rebuffer"] = q.rebuffer;
  d["total"] = q.total;
  return d;
}

py::dict outcome_dict(const SessionOutcome& s) {
  py::list chunks;
  for (std::size_t k = 0; k < s.log.chunks.size(); ++k) {
    const auto& c = s.log.chunks[k];
    py::dict row;
    row["chunk"] = c.chunk_index;
    row["bitrate_index"] = c.bitrate_index;
    row["bitrate_kbps"] = c.bitrate_kbps;
    row["bytes"] = c.transmitted_bytes;
    row["download_s"] = c.download_time_s;
    row["rebuffer_s"] = c.rebuffer_s;
    row["buffer_s"] = c.buffer_after_s;
    row["quality"] = c.effective_quality;
    row["denoise_step"] = c.denoise_step;
    row["qoe"] = s.log.qoe[k].total;
    chunks.append(row);
  }
  py::dict d;
  d["policy"] = s.policy_label;
  d["trace"] = s.log.trace;
  d["semantic"] = s.log.semantic;
  d["mean_qoe"] = s.log.mean_qoe();
  d["totals"] = breakdown(s.log.totals);
  d["chunks"] = chunks;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "semabr simulator core";
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def(
      "chunk_qoe",
      [](int a_kbps, std::optional<int> prev_kbps, double download_s,
         std::optional<double> buffer_prev_s, std::vector<int> ladder_kbps, double alpha,
         double beta, double quality_scale) {
        return breakdown(chunk_qoe(a_kbps, prev_kbps, download_s, buffer_prev_s,
                                   QoEWeights{alpha, beta}, BitrateLadder(std::move(ladder_kbps)),
                                   quality_scale));
      },
      py::arg("a_kbps"), py::arg("prev_kbps"), py::arg("download_s"), py::arg("buffer_prev_s"),
      py::arg("ladder_kbps") = BitrateLadder::standard().kbps(), py::arg("alpha") = 1.0,
      py::arg("beta") = 2.66, py::arg("quality_scale") = 1.0);

  m.def(
      "total_latency",
      [](const std::string& resolution) {
        return total_latency(LatencyProfile::defaults(), resolution);
      },
      py::arg("resolution"), "Summed stage latency in ms for 360p, 720p or 1080p.");

  m.def(
      "e2e_comparison",
      [](int chunk_count) {
        E2EComparisonConfig cfg;
        cfg.chunk_count = chunk_count;
        std::vector<std::tuple<std::string, double, double>> rows;
        for (const auto& r : e2e_comparison(LatencyProfile::defaults(), cfg))
          rows.emplace_back(r.method, r.range.low_ms, r.range.high_ms);
        return rows;
      },
      py::arg("chunk_count") = 48);

  m.def("latency_report",
        [] { return latency_report(LatencyProfile::defaults(), E2EComparisonConfig{}); });

  m.def(
      "match_step",
      [](double snr_db) { return match_step(snr_db, NoiseSchedule::standard()); },
      py::arg("snr_db"), "Reverse-process start step for an estimated SNR (dB).");

  m.def(
      "noise_level", [](int t) { return NoiseSchedule::standard().noise_level(t); },
      py::arg("t"));

  m.def(
      "synth_trace",
      [](std::uint64_t seed, double duration_s, std::vector<std::pair<double, double>> states,
         double transition_prob, double step_s) {
        std::vector<MarkovState> ms;
        for (const auto& [mean, sd] : states) ms.push_back({mean, sd});
        const auto t = synth_trace(seed, duration_s, ms, transition_prob, step_s);
        std::vector<std::pair<double, double>> out;
        for (const auto& s : t.samples()) out.emplace_back(s.time_s, s.mbps);
        return out;
      },
      py::arg("seed"), py::arg("duration_s"),
      py::arg("states") = std::vector<std::pair<double, double>>{{1.0, 0.3}, {3.0, 0.8}},
      py::arg("transition_prob") = 0.1, py::arg("step_s") = 1.0);

  m.def(
      "simulate",
      [](const std::string& config_json, std::size_t policy, std::size_t trace) {
        const auto cfg = parse_config(config_json);
        const auto manifest = resolve_manifest(cfg);
        const auto traces = resolve_traces(cfg);
        SessionOutcome s;
        {
          py::gil_scoped_release release;
          s = semabr::simulate(cfg, cfg.policies.at(policy), manifest, traces.at(trace));
        }
        return outcome_dict(s);
      },
      py::arg("config_json"), py::arg("policy") = 0, py::arg("trace") = 0,
      "One session for the given policy and trace indices of a JSON config.");

  m.def(
      "batch",
      [](const std::string& config_json, unsigned jobs) {
        const auto cfg = parse_config(config_json);
        BatchArtifacts a;
        {
          py::gil_scoped_release release;
          a = semabr::batch(cfg, jobs);
        }
        py::list sessions;
        for (const auto& s : a.sessions) sessions.append(outcome_dict(s));
        py::dict d;
        d["sessions"] = sessions;
        d["summary_csv"] = a.summary_csv;
        d["comparison_csv"] = a.comparison_csv;
        return d;
      },
      py::arg("config_json"), py::arg("jobs") = 1,
      "Every policy against every trace; writes CSV artifacts under out_dir.");
}
