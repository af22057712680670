#include "semabr/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semabr/error.hpp"

namespace fs = std::filesystem;

namespace semabr {
namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("semabr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string toy_config(const fs::path& out, const std::string& policies,
                       const std::string& traces, int chunks = 4) {
  return R"({
    "schema_version": 1,
    "seed": 7,
    "out_dir": ")" + out.string() + R"(",
    "manifest": {"synth": {"chunk_count": )" + std::to_string(chunks) + R"(,
                           "gop": {"width": 640, "height": 360}}},
    "traces": )" + traces + R"(,
    "policies": )" + policies + R"(,
    "offline": {"grid_s": 1.0}
  })";
}

const char* kTwoTraces =
    R"([{"synth": {"name": "b", "duration_s": 60, "states": [[1.0, 0.3]]}},
        {"synth": {"name": "a", "duration_s": 60, "states": [[3.0, 0.5]]}}])";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseConfig, ErrorsNameTheField) {
  EXPECT_NE(config_error(R"({"schema_version": 1, "traces": [{"synth": {}}],
                             "policy": {"name": "rate"}})")
                .find("'seed'"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"schema_version": 2, "seed": 1})").find("'schema_version'"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"schema_version": 1, "seed": 1, "traces": [{"synth": {}}],
                             "policy": {"name": "rate"}, "qoe": {"alpah": 1}})")
                .find("'qoe.alpah'"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"schema_version": 1, "seed": 1, "traces": [{"synth": {}}],
                             "policy": {"name": "rate"}, "semantic": {"snr_db": "loud"}})")
                .find("'semantic.snr_db'"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"schema_version": 1, "seed": 1, "traces": [{"synth": {}}],
                             "policies": [{"name": "zzz"}]})")
                .find("'policies[0].name'"),
            std::string::npos);
}

TEST(ParseConfig, DefaultsAndInfiniteSnr) {
  const auto cfg = parse_config(R"({"schema_version": 1, "seed": 3,
      "traces": [{"synth": {"name": "x"}}], "policy": {"name": "bola"},
      "semantic": {"snr_db": "inf"}})");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.policies.at(0).label, "bola");
  EXPECT_TRUE(std::isinf(cfg.semantic.channel.snr_db));
  EXPECT_EQ(cfg.weights.beta, 2.66);
}

TEST(ParseConfig, ShippedDefaultConfigLoads) {
  const auto cfg = load_config(fs::path(SEMABR_SOURCE_DIR) / "configs" / "default.json");
  EXPECT_EQ(cfg.policies.size(), 6u);
  EXPECT_EQ(resolve_traces(cfg).size(), 2u);
}

TEST(Run, MissingTracePathIsNamed) {
  const auto out = scratch("missing");
  const auto cfg = parse_config(toy_config(out, R"([{"name": "rate"}])",
                                           R"([{"path": "/no/such/trace.txt"}])"));
  try {
    run(cfg);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/trace.txt"), std::string::npos);
  }
}

TEST(Run, ToyManifestSmokeAndDeterminism) {
  const auto out = scratch("run");
  const auto cfg = parse_config(toy_config(out, R"([{"name": "robustmpc"}])", kTwoTraces));
  const auto a = run(cfg);
  const auto rows = read_csv(a.session_csv);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].size(), 11u);
  EXPECT_TRUE(fs::exists(a.summary_json));
  EXPECT_TRUE(fs::exists(a.cdf_csv));
  const auto first = slurp(a.session_csv);
  const auto first_cdf = slurp(a.cdf_csv);
  run(cfg);
  EXPECT_EQ(slurp(a.session_csv), first);
  EXPECT_EQ(slurp(a.cdf_csv), first_cdf);
}

TEST(Batch, CountsAndComparisonConsistency) {
  const auto out = scratch("batch");
  const auto cfg = parse_config(toy_config(
      out, R"([{"name": "bola"}, {"name": "rate"}, {"name": "offline"}])", kTwoTraces, 6));
  const auto a = batch(cfg, 2);
  ASSERT_EQ(a.sessions.size(), 6u);
  EXPECT_EQ(a.session_csvs.size(), 6u);
  EXPECT_EQ(a.sessions[0].policy_label, "bola");
  EXPECT_EQ(a.sessions[0].log.trace, "a");
  EXPECT_EQ(a.sessions[1].log.trace, "b");

  // Recompute the comparison table from the per-session CSVs.
  std::map<std::string, std::vector<double>> means;
  for (const auto& p : a.session_csvs) {
    const auto rows = read_csv(p);
    double sum = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) sum += std::stod(rows[i][6]);
    const auto stem = p.stem().string();
    means[stem.substr(0, stem.find("__"))].push_back(sum / static_cast<double>(rows.size() - 1));
  }
  const auto cmp = read_csv(a.comparison_csv);
  ASSERT_EQ(cmp.size(), 4u);
  for (std::size_t i = 1; i < cmp.size(); ++i) {
    const auto& v = means.at(cmp[i][0]);
    EXPECT_EQ(std::stoul(cmp[i][1]), v.size());
    EXPECT_NEAR(std::stod(cmp[i][2]), (v[0] + v[1]) / 2.0, 2e-6) << cmp[i][0];
  }

  // Offline dominates every policy per trace under matched discretization.
  const auto summary = read_csv(a.summary_csv);
  std::map<std::string, double> offline;
  for (const auto& r : summary)
    if (r[0] == "offline") offline[r[1]] = std::stod(r[10]);
  for (std::size_t i = 1; i < summary.size(); ++i)
    EXPECT_LE(std::stod(summary[i][10]), offline.at(summary[i][1]) + 1e-6) << summary[i][0];
}

TEST(Batch, IndependentOfJobs) {
  const auto one = scratch("jobs1");
  const auto many = scratch("jobs8");
  const std::string policies = R"([{"name": "buffer"}, {"name": "ldabs"}, {"name": "robustmpc"}])";
  batch(parse_config(toy_config(one, policies, kTwoTraces, 8)), 1);
  batch(parse_config(toy_config(many, policies, kTwoTraces, 8)), 8);
  for (const auto& e : fs::recursive_directory_iterator(one)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const auto rel = fs::relative(e.path(), one);
    EXPECT_EQ(slurp(e.path()), slurp(many / rel)) << rel;
  }
}

TEST(SessionSeed, DependsOnNames) {
  EXPECT_EQ(session_seed(1, "a", "b"), session_seed(1, "a", "b"));
  EXPECT_NE(session_seed(1, "a", "b"), session_seed(1, "b", "a"));
  EXPECT_NE(session_seed(1, "ab", "c"), session_seed(1, "a", "bc"));
}

TEST(LatencyReport, ContainsStageTotals) {
  const auto text = latency_report(LatencyProfile::defaults(), E2EComparisonConfig{});
  EXPECT_NE(text.find("14.9"), std::string::npos);
  EXPECT_NE(text.find("22.6"), std::string::npos);
  EXPECT_NE(text.find("29.4"), std::string::npos);
  EXPECT_NE(text.find("LD-ABS"), std::string::npos);
}

TEST(Cli, SubcommandsRun) {
  const auto dir = scratch("cli");
  const std::string cli = SEMABR_CLI_PATH;
  const auto trace = dir / "t.txt";
  const auto manifest = dir / "m.json";
  EXPECT_EQ(std::system((cli + " synth-trace --seed 3 --duration 20 --out " + trace.string()).c_str()), 0);
  EXPECT_EQ(std::system((cli + " synth-manifest --seed 3 --chunks 3 --out " + manifest.string()).c_str()), 0);
  EXPECT_NO_THROW(load_trace(trace.string()));
  EXPECT_EQ(load_manifest(manifest.string()).chunk_count(), 3u);

  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"schema_version": 1, "seed": 1, "out_dir": "out",
      "manifest": {"path": "m.json"}, "traces": [{"path": "t.txt"}],
      "policies": [{"name": "rate"}, {"name": "bola"}]})";
  EXPECT_EQ(std::system((cli + " run --config " + cfg.string()).c_str()), 0);
  EXPECT_EQ(read_csv(dir / "out" / "session.csv").size(), 4u);
  EXPECT_EQ(std::system((cli + " batch --config " + cfg.string() + " --jobs 2 --seed 5 --out " +
                         (dir / "b").string()).c_str()),
            0);
  EXPECT_TRUE(fs::exists(dir / "b" / "comparison.csv"));
  EXPECT_EQ(std::system((cli + " latency-report > " + (dir / "lat.txt").string()).c_str()), 0);
  EXPECT_NE(slurp(dir / "lat.txt").find("29.4"), std::string::npos);

  std::ofstream(dir / "bad.json") << R"({"schema_version": 1})";
  EXPECT_NE(std::system((cli + " run --config " + (dir / "bad.json").string() + " 2> " +
                         (dir / "err.txt").string()).c_str()),
            0);
  EXPECT_NE(slurp(dir / "err.txt").find("seed"), std::string::npos);
}

}  // namespace
}  // namespace semabr
