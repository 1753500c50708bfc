#include <sstream>

#include "fixtures.hpp"
#include "shapeval/cli.hpp"

namespace shapeval {
namespace {

using testing::Dataset;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "shapeval");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void fill_paired(Dataset& ds) {
  std::mt19937_64 rng(1);
  testing::add_paired_classes(ds, rng, {"chair", "plane"}, 3, 40);
  ds.write_manifest();
}

TEST(Cli, InstanceWritesReportAndPrintsConfig) {
  Dataset ds;
  fill_paired(ds);
  const auto out = (ds / "inst.csv").string();
  const auto r = run({"instance", "--manifest", (ds / "manifest.jsonl").string(), "--out", out, "--seed", "5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto first_line = r.out.substr(0, r.out.find('\n'));
  const auto j = nlohmann::json::parse(first_line);
  EXPECT_EQ(j["command"], "instance");
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["config"]["fscore_tau"], 0.01);
  const auto report = read_report(out, ReportFormat::Csv);
  report.validate();
  EXPECT_TRUE(testing::find_row(report, "Mean", "F1"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"instance", "--out", "x.csv"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"sample", "--mesh", "m.off", "--out", "x", "--threads", "zero"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"set", "--manifest", "m", "--out", "x", "--format", "xml"}).code, cli::kExitUsage);
}

TEST(Cli, EvaluationErrorsExitOne) {
  testing::TempDir dir;
  const auto r = run({"instance", "--manifest", (dir / "missing.jsonl").string(), "--out", (dir / "o.csv").string()});
  EXPECT_EQ(r.code, cli::kExitEvalError);
  EXPECT_NE(r.err.find("IoFailure"), std::string::npos) << r.err;
  dir.write("bad.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  const auto q = run({"sample", "--mesh", (dir / "bad.off").string(), "--out", (dir / "s.tnsr").string()});
  EXPECT_EQ(q.code, cli::kExitEvalError);
  EXPECT_NE(q.err.find("NonTriangleFace"), std::string::npos) << q.err;
}

TEST(Cli, SampleAndFps) {
  testing::TempDir dir;
  dir.write("cube.off", testing::off_text(testing::unit_cube()));
  const auto pts = (dir / "pts.tnsr").string();
  ASSERT_EQ(run({"sample", "--mesh", (dir / "cube.off").string(), "--out", pts, "--n", "500", "--normals"}).code, 0);
  const auto t = read_tensor(pts);
  EXPECT_EQ(t.shape, (std::vector<std::uint64_t>{500, 6}));
  const auto sub = (dir / "sub.tnsr").string();
  ASSERT_EQ(run({"fps", "--in", pts, "--out", sub, "--k", "32", "--fps-start", "0"}).code, 0);
  const auto s = cloud_from_tensor(read_tensor(sub));
  EXPECT_EQ(s.size(), 32u);
  EXPECT_EQ(s.points[0], cloud_from_tensor(t).points[0]);
  EXPECT_EQ(run({"fps", "--in", pts, "--out", sub, "--k", "501"}).code, cli::kExitEvalError);
}

TEST(Cli, MatrixCacheMatchesFreshSetRun) {
  Dataset ds;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 4; ++i) {
    ds.add_points("g" + std::to_string(i), "chair", "generated", testing::random_cloud(rng, 30));
    ds.add_points("r" + std::to_string(i), "chair", "reference", testing::random_cloud(rng, 30));
  }
  const auto manifest = ds.write_manifest().string();
  const auto matrix = (ds / "m.tnsr").string();
  ASSERT_EQ(run({"matrix", "--manifest", manifest, "--out", matrix}).code, 0);
  EXPECT_EQ(read_tensor(matrix).shape, (std::vector<std::uint64_t>{8, 8}));
  ASSERT_EQ(run({"set", "--manifest", manifest, "--out", (ds / "fresh.json").string()}).code, 0);
  ASSERT_EQ(run({"set", "--manifest", manifest, "--out", (ds / "cached.json").string(), "--cache-matrix", matrix})
                .code,
            0);
  EXPECT_EQ(testing::slurp(ds / "fresh.json"), testing::slurp(ds / "cached.json"));
}

TEST(Cli, FeatureAndAggregate) {
  testing::TempDir dir;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> a(30 * 4), b(30 * 4);
  for (auto& x : a) x = g(rng);
  for (auto& x : b) x = g(rng) + 0.5;
  write_tensor(TensorFile::from_f64({30, 4}, a), dir / "real.tnsr");
  write_tensor(TensorFile::from_f64({30, 4}, b), dir / "gen.tnsr");
  const auto out = (dir / "feat.csv").string();
  ASSERT_EQ(run({"feature", "--real", (dir / "real.tnsr").string(), "--gen", (dir / "gen.tnsr").string(), "--out", out,
                 "--class", "chair"})
                .code,
            0);
  const auto report = read_report(out, ReportFormat::Csv);
  EXPECT_TRUE(testing::find_row(report, "chair", "FPD"));
  EXPECT_GT(testing::find_row(report, "chair", "FPD")->value, 0.0);

  dir.write("rows.csv", "scope,metric,value,count\nA,X,1,1\nB,X,4,1\nMean,X,99,2\n");
  const auto agg = (dir / "agg.csv").string();
  ASSERT_EQ(run({"aggregate", "--in", (dir / "rows.csv").string(), "--out", agg}).code, 0);
  EXPECT_EQ(testing::find_row(read_report(agg, ReportFormat::Csv), "Mean", "X")->value, 2.5);
}

TEST(Cli, RerunsAreBitIdentical) {
  Dataset ds;
  fill_paired(ds);
  const auto manifest = (ds / "manifest.jsonl").string();
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(run({"instance", "--manifest", manifest, "--out", (ds / name).string(), "--threads", "2"}).code, 0);
  }
  EXPECT_EQ(testing::slurp(ds / "a.json"), testing::slurp(ds / "b.json"));
}

}  // namespace
}  // namespace shapeval
