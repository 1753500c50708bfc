#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapeval/harness.hpp"

namespace shapeval {

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvalError = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Options shared by every subcommand; the flags mirror EvalConfig.
struct CommonOptions {
  EvalConfig cfg;
  std::uint64_t seed = 0;
  std::string threads;  // integer or "auto"; empty falls back to SHAPEVAL_THREADS
  std::optional<std::size_t> fps_start;
  bool raw_frame = false;
  std::string out;
  std::string format;
};

inline void add_common(CLI::App& sub, CommonOptions& o) {
  auto& c = o.cfg;
  sub.add_option("--seed", o.seed, "Global seed")->capture_default_str();
  sub.add_option("--threads", o.threads, "Worker threads (integer or auto; env SHAPEVAL_THREADS)");
  sub.add_option("--surface-samples", c.surface_samples, "Surface samples per mesh")->capture_default_str();
  sub.add_option("--fps-points", c.fps_points, "Farthest-point samples for set metrics")->capture_default_str();
  sub.add_option("--fscore-tau", c.fscore_tau, "F-score distance threshold")->capture_default_str();
  sub.add_option("--iou-queries", c.iou_queries, "Volumetric IoU query count")->capture_default_str();
  sub.add_option("--iou-padding", c.iou_padding, "Total padding of the IoU sampling cube")->capture_default_str();
  sub.add_option("--best-of-n", c.best_of_n, "Completions per input; the best F1 is kept")->capture_default_str();
  sub.add_option("--knn-pr-k", c.knn_pr_k, "k for feature precision/recall")->capture_default_str();
  sub.add_option("--knn-dc-k", c.knn_dc_k, "k for density/coverage")->capture_default_str();
  sub.add_option("--kernel-degree", c.kernel.degree, "Polynomial kernel degree")->capture_default_str();
  sub.add_option("--kernel-scale", c.kernel.scale, "Polynomial kernel scale (0: 1/d)")->capture_default_str();
  sub.add_option("--kernel-offset", c.kernel.offset, "Polynomial kernel offset")->capture_default_str();
  sub.add_option("--kernel-block-size", c.kernel.block_size, "Kernel estimator block size (0: single block)")
      ->capture_default_str();
  sub.add_option("--fps-start", o.fps_start, "Pin the first farthest-point index");
  sub.add_flag("--raw-frame", o.raw_frame, "Scale Chamfer-L1 by the ground truth's bounding box");
  sub.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

inline unsigned resolve_threads(const std::string& flag) {
  std::string value = flag;
  if (value.empty()) {
    if (const char* env = std::getenv("SHAPEVAL_THREADS")) value = env;
  }
  if (value.empty() || value == "auto") return hardware_threads();
  const auto n = text::parse_int<unsigned>(value);
  if (!n || *n == 0) throw UsageError("--threads must be a positive integer or 'auto'");
  return *n;
}

inline void finalize(CommonOptions& o) {
  o.cfg.seed = Seed{o.seed};
  o.cfg.threads = resolve_threads(o.threads);
  o.cfg.fps_start = o.fps_start;
  o.cfg.frame = o.raw_frame ? ChamferFrame::Raw : ChamferFrame::Normalized;
}

inline ReportFormat format_for(const std::string& explicit_format, const std::filesystem::path& path) {
  if (explicit_format == "json") return ReportFormat::Json;
  if (explicit_format == "csv") return ReportFormat::Csv;
  return path.extension() == ".json" ? ReportFormat::Json : ReportFormat::Csv;
}

inline void print_config(std::ostream& out, const std::string& command, const EvalConfig& cfg) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = cfg.seed.value;
  j["config"] = cfg.to_json();
  out << j.dump() << "\n";
}

inline std::filesystem::path base_dir(const std::filesystem::path& manifest) {
  auto parent = manifest.parent_path();
  return parent.empty() ? std::filesystem::path(".") : parent;
}

}  // namespace cli

/// Entry point of the `shapeval` tool. Returns 0 on success, 1 on
/// evaluation errors and 2 on usage errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli;
  CLI::App app{"Evaluation metrics for 3D shape generation and completion", "shapeval"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string manifest, cache_matrix, in_path, mesh_path, real_path, gen_path, class_label = "features";
  std::size_t k = 0, n = 0;
  bool normals = false, want_iou = false, feature_metrics = false;

  auto* instance = app.add_subcommand("instance", "Instance-level metrics over a paired manifest");
  auto* set = app.add_subcommand("set", "Set-level metrics over a manifest");
  auto* feature = app.add_subcommand("feature", "Feature-space distances between two feature tensors");
  auto* fps = app.add_subcommand("fps", "Farthest-point sample a point tensor");
  auto* sample = app.add_subcommand("sample", "Sample points from a mesh surface");
  auto* matrix = app.add_subcommand("matrix", "Compute and store the pairwise Chamfer matrix");
  auto* aggregate = app.add_subcommand("aggregate", "Recompute class Mean rows of a report");

  for (auto* sub : {instance, set, feature, fps, sample, matrix, aggregate}) add_common(*sub, common);
  for (auto* sub : {instance, set, feature, aggregate}) sub->add_option("--out", common.out, "Report path")->required();
  for (auto* sub : {fps, sample, matrix}) sub->add_option("--out", common.out, "Tensor path")->required();
  for (auto* sub : {instance, set, matrix}) sub->add_option("--manifest", manifest, "JSON-lines manifest")->required();

  instance->add_flag("--iou", want_iou, "Also compute volumetric IoU (watertight meshes only)");
  set->add_option("--cache-matrix", cache_matrix, "Reuse or store the pairwise Chamfer matrix");
  set->add_flag("--feature-metrics", feature_metrics, "Fail unless feature files are listed");
  feature->add_option("--real", real_path, "Reference feature tensor [n, d]")->required();
  feature->add_option("--gen", gen_path, "Generated feature tensor [n, d]")->required();
  feature->add_option("--class", class_label, "Scope label of the feature rows")->capture_default_str();
  fps->add_option("--in", in_path, "Point tensor [n, 3] or [n, 6]")->required();
  fps->add_option("--k", k, "Points to keep (default: --fps-points)");
  sample->add_option("--mesh", mesh_path, "OFF or OBJ mesh")->required();
  sample->add_option("--n", n, "Points to sample (default: --surface-samples)");
  sample->add_flag("--normals", normals, "Store unit normals as columns 3..5");
  aggregate->add_option("--in", in_path, "Report with class rows (csv or json)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    finalize(common);
    auto& cfg = common.cfg;
    cfg.compute_iou = want_iou;
    cfg.require_features = feature_metrics;
    cfg.cache_matrix = cache_matrix;
    const std::string command = app.get_subcommands().front()->get_name();
    print_config(out, command, cfg);
    cfg.validate();
    const std::filesystem::path out_path = common.out;
    const Exec exec{cfg.threads};

    if (command == "instance") {
      const auto entries = read_manifest(manifest);
      const auto pairing = pair_entries(entries, cfg);
      for (const auto& u : pairing.unmatched) err << "warning: unmatched entry " << u << "\n";
      auto report = evaluate_instances(pairing.tasks, cfg, base_dir(manifest));
      report.metadata["unmatched"] = pairing.unmatched;
      write_report(report, out_path, format_for(common.format, out_path));
    } else if (command == "set") {
      const auto report = evaluate_sets(collect_set_inputs(read_manifest(manifest)), cfg, base_dir(manifest));
      write_report(report, out_path, format_for(common.format, out_path));
    } else if (command == "feature") {
      const auto real = FeatureMatrix::from_tensor(read_tensor(real_path));
      const auto gen = FeatureMatrix::from_tensor(read_tensor(gen_path));
      if (class_label == kMeanScope || class_label == kAllScope) throw UsageError("--class label is reserved");
      const auto count = static_cast<std::int64_t>(real.n + gen.n);
      const auto pr = knn_precision_recall(real, gen, KnnParams{cfg.knn_pr_k}, exec);
      const auto dc = density_coverage(real, gen, KnnParams{cfg.knn_dc_k}, exec);
      std::vector<ReportRow> rows{
          {class_label, metric::kFpd, frechet_distance(gen, real), count},
          {class_label, metric::kKpd, kernel_distance(gen, real, cfg.kernel, exec), count},
          {class_label, metric::kFeatPrecision, pr.precision, count},
          {class_label, metric::kFeatRecall, pr.recall, count},
          {class_label, metric::kDensity, dc.density, count},
          {class_label, metric::kCoverage, dc.coverage, count}};
      MetricReport report;
      report.rows = with_class_means(rows);
      report.metadata = detail::base_metadata(cfg, "feature");
      write_report(report, out_path, format_for(common.format, out_path));
    } else if (command == "fps") {
      const auto pc = cloud_from_tensor(read_tensor(in_path));
      const auto result = farthest_point_sample(pc, k == 0 ? cfg.fps_points : k, cfg.seed, FpsOptions{cfg.fps_start});
      write_tensor(tensor_from_cloud(result), out_path);
    } else if (command == "sample") {
      const auto mesh = read_mesh(mesh_path);
      if (mesh.dropped_degenerate > 0) {
        err << "warning: dropped " << mesh.dropped_degenerate << " degenerate triangles\n";
      }
      const auto pc = sample_surface(mesh, n == 0 ? cfg.surface_samples : n, cfg.seed, normals, exec);
      write_tensor(tensor_from_cloud(pc), out_path);
    } else if (command == "matrix") {
      const auto layout = set_layout(collect_set_inputs(read_manifest(manifest)));
      if (layout.shapes.empty()) throw Error(ErrorCode::InvalidArgument, "manifest lists no geometry");
      write_tensor(matrix_to_tensor(merged_cd_matrix(layout, cfg, base_dir(manifest))), out_path);
    } else if (command == "aggregate") {
      const std::filesystem::path in = in_path;
      auto report = read_report(in, format_for("", in));
      std::erase_if(report.rows, [](const ReportRow& r) { return r.scope == kMeanScope; });
      report.rows = with_class_means(report.rows);
      if (!report.metadata.is_object()) report.metadata = nlohmann::json::object();
      report.metadata["aggregated_by"] = std::string(kToolVersion);
      write_report(report, out_path, format_for(common.format, out_path));
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvalError;
  }
  return kExitOk;
}

inline int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace shapeval
