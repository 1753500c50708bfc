#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapeval/feature_metrics.hpp"
#include "shapeval/geometry/sampling.hpp"
#include "shapeval/instance_metrics.hpp"
#include "shapeval/manifest.hpp"
#include "shapeval/mesh_io.hpp"
#include "shapeval/report.hpp"
#include "shapeval/set_metrics.hpp"
#include "shapeval/tensor_io.hpp"

namespace shapeval {

struct EvalConfig {
  Seed seed{0};
  std::size_t surface_samples = 100000;
  std::size_t fps_points = 2048;
  double fscore_tau = 0.01;
  std::size_t iou_queries = 100000;
  double iou_padding = 0.1;
  std::size_t best_of_n = 1;
  std::size_t knn_pr_k = 3;
  std::size_t knn_dc_k = 5;
  KernelParams kernel;
  unsigned threads = 1;

  bool compute_iou = false;
  ChamferFrame frame = ChamferFrame::Normalized;
  std::optional<std::size_t> fps_start;
  bool require_features = false;
  std::filesystem::path cache_matrix;  // empty: no cache

  void validate() const {
    if (surface_samples == 0 || fps_points == 0 || iou_queries == 0 || best_of_n == 0 || knn_pr_k == 0 ||
        knn_dc_k == 0 || threads == 0) {
      fail(ErrorCode::InvalidArgument, "all counts must be at least 1");
    }
    if (!(fscore_tau > 0)) fail(ErrorCode::InvalidArgument, "fscore tau must be positive");
    if (!(iou_padding >= 0)) fail(ErrorCode::InvalidArgument, "IoU padding must be non-negative");
    if (kernel.degree < 1 || kernel.scale < 0) fail(ErrorCode::InvalidArgument, "bad kernel parameters");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed.value;
    j["surface_samples"] = surface_samples;
    j["fps_points"] = fps_points;
    j["fscore_tau"] = fscore_tau;
    j["iou_queries"] = iou_queries;
    j["iou_padding"] = iou_padding;
    j["best_of_n"] = best_of_n;
    j["knn_pr_k"] = knn_pr_k;
    j["knn_dc_k"] = knn_dc_k;
    j["kernel"] = {{"degree", kernel.degree}, {"scale", kernel.scale}, {"offset", kernel.offset},
                   {"block_size", kernel.block_size}};
    j["threads"] = threads;
    j["iou"] = compute_iou;
    j["raw_frame"] = frame == ChamferFrame::Raw;
    j["fps_start"] = fps_start ? nlohmann::json(*fps_start) : nlohmann::json(nullptr);
    return j;
  }
};

struct PairedTask {
  std::string id;
  std::string class_label;
  std::vector<ManifestEntry> generated;  // 1..N candidates
  ManifestEntry reference;
  std::optional<ManifestEntry> partial;
};

struct Pairing {
  std::vector<PairedTask> tasks;
  std::vector<std::string> unmatched;  // "role:id" of entries without a reference
};

/// Metric names used in reports.
namespace metric {
inline constexpr const char* kChamferL1 = "CD-L1";
inline constexpr const char* kChamferL2 = "CD-L2";
inline constexpr const char* kF1 = "F1";
inline constexpr const char* kPrecision = "Precision";
inline constexpr const char* kRecall = "Recall";
inline constexpr const char* kIou = "IoU";
inline constexpr const char* kNormalConsistency = "NC";
inline constexpr const char* kOneNna = "1-NNA";
inline constexpr const char* kCov = "COV";
inline constexpr const char* kMmd = "MMD";  // x1e3
inline constexpr const char* kTmd = "TMD";
inline constexpr const char* kUhd = "UHD";
inline constexpr const char* kFpd = "FPD";
inline constexpr const char* kKpd = "KPD";
inline constexpr const char* kFeatPrecision = "FPD-Precision";
inline constexpr const char* kFeatRecall = "FPD-Recall";
inline constexpr const char* kDensity = "Density";
inline constexpr const char* kCoverage = "Coverage";
}  // namespace metric

inline constexpr double kMmdReportScale = 1e3;

/// Matches every reference to its generated entry (same id) or its
/// completion group (group == reference id). Completion groups keep
/// manifest order and are truncated to cfg.best_of_n.
inline Pairing pair_entries(const std::vector<ManifestEntry>& manifest, const EvalConfig& cfg) {
  std::map<std::string, ManifestEntry> refs;
  std::map<std::string, ManifestEntry> gens, partials;
  std::map<std::string, std::vector<ManifestEntry>> groups;
  std::vector<std::string> order;
  for (const auto& e : manifest) {
    if (e.kind == Kind::Features) continue;
    switch (e.role) {
      case Role::Reference:
        if (!refs.emplace(e.id, e).second) fail(ErrorCode::DuplicateEntry, "reference '" + e.id + "' listed twice");
        break;
      case Role::Generated:
        if (!gens.emplace(e.id, e).second) fail(ErrorCode::DuplicateEntry, "generated '" + e.id + "' listed twice");
        break;
      case Role::Partial:
        if (!partials.emplace(e.id, e).second) fail(ErrorCode::DuplicateEntry, "partial '" + e.id + "' listed twice");
        break;
      case Role::Completion: groups[e.group].push_back(e); break;
    }
  }

  Pairing out;
  for (const auto& [id, ref] : refs) {
    PairedTask t;
    t.id = id;
    t.class_label = ref.class_label;
    t.reference = ref;
    if (auto g = groups.find(id); g != groups.end()) {
      if (g->second.size() < cfg.best_of_n) {
        fail(ErrorCode::MissingCompletionGroup, "reference '" + id + "' has " + std::to_string(g->second.size()) +
                                                    " completions, best-of-" + std::to_string(cfg.best_of_n) +
                                                    " requested");
      }
      t.generated.assign(g->second.begin(), g->second.begin() + static_cast<std::ptrdiff_t>(cfg.best_of_n));
    } else if (auto it = gens.find(id); it != gens.end()) {
      if (cfg.best_of_n > 1) {
        fail(ErrorCode::MissingCompletionGroup,
             "reference '" + id + "' has no completion group for best-of-" + std::to_string(cfg.best_of_n));
      }
      t.generated = {it->second};
    } else {
      fail(ErrorCode::UnmatchedReference, "reference '" + id + "' has no generated or completion entry");
    }
    if (auto p = partials.find(id); p != partials.end()) t.partial = p->second;
    out.tasks.push_back(std::move(t));
  }
  for (const auto& [id, e] : gens)
    if (!refs.contains(id) && !groups.contains(id)) out.unmatched.push_back("generated:" + id);
  for (const auto& [group, list] : groups)
    if (!refs.contains(group)) out.unmatched.push_back("completion group:" + group);
  for (const auto& [id, e] : partials)
    if (!refs.contains(id)) out.unmatched.push_back("partial:" + id);

  std::stable_sort(out.tasks.begin(), out.tasks.end(), [](const PairedTask& a, const PairedTask& b) {
    return std::tie(a.class_label, a.id) < std::tie(b.class_label, b.id);
  });
  return out;
}

/// Shapes loaded for evaluation, with the bookkeeping reported in metadata.
struct LoadedShape {
  PointCloud cloud;
  std::optional<TriangleMesh> mesh;
};

/// Deterministic key for per-shape seeds.
inline std::string shape_key(const ManifestEntry& e) {
  return std::string(to_string(e.role)) + "/" + e.group + "/" + e.id;
}

inline PointCloud cloud_from_tensor(const TensorFile& t) {
  if (t.shape.size() != 2 || (t.shape[1] != 3 && t.shape[1] != 6)) {
    fail(ErrorCode::InvalidArgument, "point tensor must have shape [n, 3] or [n, 6]");
  }
  const auto v = t.as_f64();
  const std::size_t n = t.shape[0], w = t.shape[1];
  PointCloud pc;
  pc.points.resize(n);
  if (w == 6) pc.normals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc.points[i] = {v[i * w], v[i * w + 1], v[i * w + 2]};
    if (w == 6) pc.normals[i] = {v[i * w + 3], v[i * w + 4], v[i * w + 5]};
  }
  pc.validate();
  return pc;
}

inline TensorFile tensor_from_cloud(const PointCloud& pc) {
  const bool normals = pc.has_normals();
  const std::size_t w = normals ? 6 : 3;
  std::vector<double> v;
  v.reserve(pc.size() * w);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) v.push_back(pc.points[i][a]);
    if (normals)
      for (std::size_t a = 0; a < 3; ++a) v.push_back(pc.normals[i][a]);
  }
  return TensorFile::from_f64({pc.size(), w}, std::move(v));
}

/// Mesh entries are surface-sampled (with normals) using a seed derived
/// from the shape key; point entries are read as-is.
inline LoadedShape load_shape(const ManifestEntry& e, const std::filesystem::path& base, std::size_t samples,
                              Seed seed) {
  const auto path = base / e.path;
  LoadedShape s;
  switch (e.kind) {
    case Kind::Mesh: {
      s.mesh = read_mesh(path);
      s.cloud = sample_surface(*s.mesh, samples, derive_seed(seed, "surface/" + shape_key(e)), true);
      break;
    }
    case Kind::Points: s.cloud = cloud_from_tensor(read_tensor(path)); break;
    case Kind::Features: fail(ErrorCode::InvalidArgument, "entry '" + e.id + "' holds features, not geometry");
  }
  return s;
}

/// Down-samples to cfg.fps_points by FPS (seeded per shape); clouds that
/// already have at most that many points are kept whole.
inline PointCloud prepare_set_cloud(const ManifestEntry& e, const std::filesystem::path& base,
                                    const EvalConfig& cfg, std::size_t* dropped = nullptr) {
  auto s = load_shape(e, base, std::max(cfg.surface_samples, cfg.fps_points), cfg.seed);
  if (dropped && s.mesh) *dropped += s.mesh->dropped_degenerate;
  if (s.cloud.size() <= cfg.fps_points) return s.cloud;
  return farthest_point_sample(s.cloud, cfg.fps_points, derive_seed(cfg.seed, "fps/" + shape_key(e)),
                               FpsOptions{cfg.fps_start});
}

namespace detail {

template <typename Fn>
auto with_task_context(const std::string& id, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "task '" + id + "': " + e.message());
  }
}

struct Accumulator {
  std::map<std::string, std::map<std::string, std::pair<double, std::int64_t>>> per_metric;  // metric -> class
  std::vector<std::string> metric_order;

  void add(const std::string& metric, const std::string& cls, double value, std::int64_t count = 1) {
    if (!per_metric.contains(metric)) metric_order.push_back(metric);
    auto& cell = per_metric[metric][cls];
    cell.first += value;
    cell.second += count;
  }
};

inline nlohmann::json base_metadata(const EvalConfig& cfg, const char* mode) {
  nlohmann::json m;
  m["mode"] = mode;
  m["seed"] = cfg.seed.value;
  m["tool_version"] = std::string(kToolVersion);
  m["config"] = cfg.to_json();
  return m;
}

inline void check_class_label(const std::string& label) {
  if (label == kMeanScope || label == kAllScope) {
    fail(ErrorCode::InvalidArgument, "class label '" + label + "' is reserved");
  }
}

}  // namespace detail

/// Per-task instance metrics, averaged per class (unweighted over
/// instances) with a class-average "Mean" row.
inline MetricReport evaluate_instances(const std::vector<PairedTask>& tasks, const EvalConfig& cfg,
                                       const std::filesystem::path& base = ".") {
  cfg.validate();
  if (tasks.empty()) fail(ErrorCode::InvalidArgument, "no tasks to evaluate");
  struct Outcome {
    InstanceResult result;
    std::size_t winner = 0;
    std::size_t dropped = 0;
  };
  std::vector<Outcome> outcomes(tasks.size());
  const InstanceOptions opt{FscoreParams{cfg.fscore_tau}, cfg.frame};

  parallel_for(tasks.size(), Exec{cfg.threads}, [&](std::size_t ti) {
    const auto& task = tasks[ti];
    detail::with_task_context(task.id, [&] {
      detail::check_class_label(task.class_label);
      Outcome& o = outcomes[ti];
      auto gt = load_shape(task.reference, base, cfg.surface_samples, cfg.seed);
      if (gt.mesh) o.dropped += gt.mesh->dropped_degenerate;
      std::vector<LoadedShape> preds;
      std::vector<PointCloud> clouds;
      for (const auto& g : task.generated) {
        preds.push_back(load_shape(g, base, cfg.surface_samples, cfg.seed));
        if (preds.back().mesh) o.dropped += preds.back().mesh->dropped_degenerate;
        clouds.push_back(preds.back().cloud);
      }
      const auto best = best_of_n(clouds, gt.cloud, opt);
      o.result = best.result;
      o.winner = best.index;
      if (cfg.compute_iou) {
        const auto& winner = preds[best.index];
        if (!winner.mesh || !gt.mesh) fail(ErrorCode::InvalidArgument, "IoU needs mesh entries on both sides");
        o.result.iou = volumetric_iou(*winner.mesh, *gt.mesh, IouParams{cfg.iou_queries, cfg.iou_padding},
                                      derive_seed(cfg.seed, "iou/" + task.id));
      }
      return 0;
    });
  });

  bool all_nc = true;
  for (const auto& o : outcomes) all_nc = all_nc && o.result.normal_consistency.has_value();

  detail::Accumulator acc;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& r = outcomes[i].result;
    const auto& cls = tasks[i].class_label;
    dropped += outcomes[i].dropped;
    acc.add(metric::kChamferL1, cls, r.chamfer_l1);
    acc.add(metric::kChamferL2, cls, r.chamfer_l2);
    acc.add(metric::kF1, cls, r.f1);
    acc.add(metric::kPrecision, cls, r.precision);
    acc.add(metric::kRecall, cls, r.recall);
    if (r.iou) acc.add(metric::kIou, cls, *r.iou);
    if (all_nc) acc.add(metric::kNormalConsistency, cls, *r.normal_consistency);
  }

  std::vector<ReportRow> rows;
  for (const auto& m : acc.metric_order) {
    for (const auto& [cls, cell] : acc.per_metric[m]) {
      rows.push_back({cls, m, cell.first / static_cast<double>(cell.second), cell.second});
    }
  }
  MetricReport report;
  report.rows = with_class_means(rows);
  report.metadata = detail::base_metadata(cfg, "instance");
  report.metadata["tasks"] = tasks.size();
  report.metadata["dropped_degenerate_triangles"] = dropped;
  nlohmann::json winners = nlohmann::json::object();
  for (std::size_t i = 0; i < tasks.size(); ++i) winners[tasks[i].id] = outcomes[i].winner;
  if (cfg.best_of_n > 1) report.metadata["best_of_n_winners"] = winners;
  return report;
}

/// Inputs of the set-level battery, grouped by class.
struct SetInputs {
  struct ClassSets {
    std::vector<ManifestEntry> generated, reference;
    std::vector<ManifestEntry> generated_features, reference_features;
    std::map<std::string, std::vector<ManifestEntry>> completion_groups;
    std::map<std::string, ManifestEntry> partials;  // by group
  };
  std::map<std::string, ClassSets> classes;
};

/// Builds set inputs from a manifest. Generation sets need no pairing. A
/// completion group contributes its first completion to the generated set
/// and all of its members to TMD/UHD.
inline SetInputs collect_set_inputs(const std::vector<ManifestEntry>& manifest) {
  SetInputs in;
  std::map<std::string, ManifestEntry> partial_by_id;
  for (const auto& e : manifest) {
    auto& c = in.classes[e.class_label];
    if (e.kind == Kind::Features) {
      if (e.role == Role::Generated || e.role == Role::Completion) c.generated_features.push_back(e);
      else if (e.role == Role::Reference) c.reference_features.push_back(e);
      continue;
    }
    switch (e.role) {
      case Role::Generated: c.generated.push_back(e); break;
      case Role::Reference: c.reference.push_back(e); break;
      case Role::Completion: c.completion_groups[e.group].push_back(e); break;
      case Role::Partial: partial_by_id.emplace(e.id, e); break;
    }
  }
  for (auto& [label, c] : in.classes) {
    for (const auto& [group, list] : c.completion_groups) {
      c.generated.push_back(list.front());
      if (auto p = partial_by_id.find(group); p != partial_by_id.end()) c.partials.emplace(group, p->second);
    }
    auto by_id = [](const ManifestEntry& a, const ManifestEntry& b) {
      return std::tie(a.id, a.group) < std::tie(b.id, b.group);
    };
    std::sort(c.generated.begin(), c.generated.end(), by_id);
    std::sort(c.reference.begin(), c.reference.end(), by_id);
    std::sort(c.generated_features.begin(), c.generated_features.end(), by_id);
    std::sort(c.reference_features.begin(), c.reference_features.end(), by_id);
  }
  std::erase_if(in.classes, [](const auto& kv) {
    const auto& c = kv.second;
    return c.generated.empty() && c.reference.empty() && c.generated_features.empty() &&
           c.reference_features.empty();
  });
  return in;
}

/// Task-based view: one generated shape (the first candidate) per task.
inline SetInputs collect_set_inputs(const std::vector<PairedTask>& tasks) {
  std::vector<ManifestEntry> flat;
  for (const auto& t : tasks) {
    flat.push_back(t.reference);
    ManifestEntry g = t.generated.front();
    g.role = Role::Generated;
    g.group.clear();
    g.id = t.id;
    flat.push_back(std::move(g));
  }
  return collect_set_inputs(flat);
}

/// Geometric set order used by the merged matrix: all generated shapes
/// (class-sorted) followed by all reference shapes.
struct SetLayout {
  std::vector<ManifestEntry> shapes;
  std::size_t n_generated = 0;
  std::map<std::string, std::vector<std::size_t>> gen_rows, ref_rows;  // class -> merged indices
};

inline SetLayout set_layout(const SetInputs& in) {
  SetLayout l;
  for (const auto& [label, c] : in.classes) {
    for (const auto& e : c.generated) {
      l.gen_rows[label].push_back(l.shapes.size());
      l.shapes.push_back(e);
    }
  }
  l.n_generated = l.shapes.size();
  for (const auto& [label, c] : in.classes) {
    for (const auto& e : c.reference) {
      l.ref_rows[label].push_back(l.shapes.size());
      l.shapes.push_back(e);
    }
  }
  return l;
}

/// Square Chamfer-L2 matrix over the layout's merged shape list.
inline DistanceMatrix merged_cd_matrix(const SetLayout& layout, const EvalConfig& cfg,
                                       const std::filesystem::path& base, std::size_t* dropped = nullptr) {
  std::vector<PointCloud> clouds(layout.shapes.size());
  std::vector<std::size_t> drops(layout.shapes.size(), 0);
  parallel_for(layout.shapes.size(), Exec{cfg.threads}, [&](std::size_t i) {
    detail::with_task_context(layout.shapes[i].id, [&] {
      clouds[i] = prepare_set_cloud(layout.shapes[i], base, cfg, &drops[i]);
      return 0;
    });
  });
  if (dropped)
    for (auto d : drops) *dropped += d;
  return self_cd_matrix(clouds, Exec{cfg.threads});
}

inline TensorFile matrix_to_tensor(const DistanceMatrix& d) {
  return TensorFile::from_f64({d.rows, d.cols}, d.values);
}

inline DistanceMatrix matrix_from_tensor(const TensorFile& t) {
  if (t.dtype != Dtype::F64 || t.shape.size() != 2) {
    fail(ErrorCode::InconsistentDims, "distance matrix tensor must be f64 with shape [rows, cols]");
  }
  DistanceMatrix d(t.shape[0], t.shape[1]);
  d.values = std::get<std::vector<double>>(t.data);
  for (double v : d.values) {
    if (!std::isfinite(v) || v < 0) fail(ErrorCode::InvalidArgument, "distance matrix has invalid entries");
  }
  return d;
}

namespace detail {

inline DistanceMatrix gather(const DistanceMatrix& m, const std::vector<std::size_t>& rows,
                             const std::vector<std::size_t>& cols) {
  DistanceMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

inline FeatureMatrix stack_features(const std::vector<ManifestEntry>& entries, const std::filesystem::path& base) {
  std::vector<double> values;
  std::size_t n = 0, d = 0;
  for (const auto& e : entries) {
    const auto f = FeatureMatrix::from_tensor(read_tensor(base / e.path));
    if (n > 0 && f.d != d) fail(ErrorCode::DimensionMismatch, "feature file '" + e.path + "' has a different width");
    d = f.d;
    n += f.n;
    values.insert(values.end(), f.values.begin(), f.values.end());
  }
  return FeatureMatrix(n, d, std::move(values));
}

}  // namespace detail

/// Set-level battery. Per class: 1-NNA, COV, MMD (x1e3) on FPS clouds;
/// FPD, KPD, precision/recall and density/coverage when feature files are
/// listed; TMD/UHD for completion groups. "Mean" is the class average and
/// "All" recomputes each metric on the pooled sets.
inline MetricReport evaluate_sets(const SetInputs& in, const EvalConfig& cfg, const std::filesystem::path& base = ".") {
  cfg.validate();
  if (in.classes.empty()) fail(ErrorCode::InvalidArgument, "no shapes to evaluate");
  for (const auto& [label, c] : in.classes) detail::check_class_label(label);

  std::vector<ReportRow> rows;
  std::vector<ReportRow> all_rows;
  const Exec exec{cfg.threads};

  // Geometric metrics over one merged matrix.
  const SetLayout layout = set_layout(in);
  if (!layout.shapes.empty()) {
    for (const auto& [label, c] : in.classes) {
      if (c.generated.size() < 2 || c.reference.size() < 2) {
        fail(ErrorCode::TooFewShapes, "class '" + label + "' needs at least two generated and two reference shapes");
      }
    }
    DistanceMatrix merged;
    const std::size_t n = layout.shapes.size();
    if (!cfg.cache_matrix.empty() && std::filesystem::exists(cfg.cache_matrix)) {
      merged = matrix_from_tensor(read_tensor(cfg.cache_matrix));
      if (merged.rows != n || merged.cols != n) {
        fail(ErrorCode::InconsistentDims, "cached matrix " + cfg.cache_matrix.string() + " does not match the manifest");
      }
    } else {
      merged = merged_cd_matrix(layout, cfg, base);
      if (!cfg.cache_matrix.empty()) write_tensor(matrix_to_tensor(merged), cfg.cache_matrix);
    }

    auto emit = [](std::vector<ReportRow>& out, const std::string& scope, const SetMatrices& m) {
      const auto r = set_metrics(m);
      const auto count = static_cast<std::int64_t>(m.gr.rows + m.gr.cols);
      out.push_back({scope, metric::kOneNna, r.one_nna, count});
      out.push_back({scope, metric::kCov, r.cov, count});
      out.push_back({scope, metric::kMmd, r.mmd * kMmdReportScale, count});
    };
    std::vector<std::size_t> all_gen, all_ref;
    for (const auto& [label, c] : in.classes) {
      const auto& g = layout.gen_rows.at(label);
      const auto& r = layout.ref_rows.at(label);
      all_gen.insert(all_gen.end(), g.begin(), g.end());
      all_ref.insert(all_ref.end(), r.begin(), r.end());
      emit(rows, label, {detail::gather(merged, g, g), detail::gather(merged, r, r), detail::gather(merged, g, r)});
    }
    emit(all_rows, std::string(kAllScope),
         {detail::gather(merged, all_gen, all_gen), detail::gather(merged, all_ref, all_ref),
          detail::gather(merged, all_gen, all_ref)});
  }

  // Feature-space metrics.
  bool any_features = false;
  for (const auto& [label, c] : in.classes) {
    any_features = any_features || !c.generated_features.empty() || !c.reference_features.empty();
  }
  if (cfg.require_features && !any_features) {
    fail(ErrorCode::MissingFeatures, "feature metrics requested but the manifest lists no feature files");
  }
  if (any_features) {
    std::vector<FeatureMatrix> gen_all, ref_all;
    auto emit = [&](std::vector<ReportRow>& out, const std::string& scope, const FeatureMatrix& real,
                    const FeatureMatrix& gen) {
      const auto count = static_cast<std::int64_t>(real.n + gen.n);
      const auto pr = knn_precision_recall(real, gen, KnnParams{cfg.knn_pr_k}, exec);
      const auto dc = density_coverage(real, gen, KnnParams{cfg.knn_dc_k}, exec);
      out.push_back({scope, metric::kFpd, frechet_distance(gen, real), count});
      out.push_back({scope, metric::kKpd, kernel_distance(gen, real, cfg.kernel, exec), count});
      out.push_back({scope, metric::kFeatPrecision, pr.precision, count});
      out.push_back({scope, metric::kFeatRecall, pr.recall, count});
      out.push_back({scope, metric::kDensity, dc.density, count});
      out.push_back({scope, metric::kCoverage, dc.coverage, count});
    };
    std::vector<double> pooled_gen, pooled_ref;
    std::size_t ng = 0, nr = 0, dim = 0;
    for (const auto& [label, c] : in.classes) {
      if (c.generated_features.empty() || c.reference_features.empty()) {
        fail(ErrorCode::MissingFeatures, "class '" + label + "' lacks generated or reference feature files");
      }
      const auto gen = detail::stack_features(c.generated_features, base);
      const auto real = detail::stack_features(c.reference_features, base);
      if (dim != 0 && gen.d != dim) fail(ErrorCode::DimensionMismatch, "feature width differs between classes");
      dim = gen.d;
      emit(rows, label, real, gen);
      pooled_gen.insert(pooled_gen.end(), gen.values.begin(), gen.values.end());
      pooled_ref.insert(pooled_ref.end(), real.values.begin(), real.values.end());
      ng += gen.n;
      nr += real.n;
    }
    emit(all_rows, std::string(kAllScope), FeatureMatrix(nr, dim, std::move(pooled_ref)),
         FeatureMatrix(ng, dim, std::move(pooled_gen)));
  }

  // Diversity and fidelity of completion groups.
  std::vector<double> all_tmd, all_uhd;
  for (const auto& [label, c] : in.classes) {
    std::vector<double> tmds, uhds;
    for (const auto& [group, members] : c.completion_groups) {
      detail::with_task_context(group, [&] {
        std::vector<PointCloud> clouds;
        for (const auto& m : members) clouds.push_back(prepare_set_cloud(m, base, cfg));
        if (clouds.size() >= 2) tmds.push_back(tmd(clouds, exec));
        if (auto p = c.partials.find(group); p != c.partials.end()) {
          uhds.push_back(uhd(prepare_set_cloud(p->second, base, cfg), clouds, exec));
        }
        return 0;
      });
    }
    auto push_mean = [&](const char* name, const std::vector<double>& v, std::vector<double>& pool) {
      if (v.empty()) return;
      double s = 0;
      for (double x : v) s += x;
      rows.push_back({label, name, s / static_cast<double>(v.size()), static_cast<std::int64_t>(v.size())});
      pool.insert(pool.end(), v.begin(), v.end());
    };
    push_mean(metric::kTmd, tmds, all_tmd);
    push_mean(metric::kUhd, uhds, all_uhd);
  }
  for (auto [name, pool] : {std::pair{metric::kTmd, &all_tmd}, std::pair{metric::kUhd, &all_uhd}}) {
    if (pool->empty()) continue;
    double s = 0;
    for (double x : *pool) s += x;
    all_rows.push_back({std::string(kAllScope), name, s / static_cast<double>(pool->size()),
                        static_cast<std::int64_t>(pool->size())});
  }

  rows.insert(rows.end(), all_rows.begin(), all_rows.end());

  MetricReport report;
  report.rows = with_class_means(rows);
  report.metadata = detail::base_metadata(cfg, "set");
  report.metadata["shapes"] = layout.shapes.size();
  return report;
}

/// Set metrics straight from paired tasks.
inline MetricReport evaluate_sets(const std::vector<PairedTask>& tasks, const EvalConfig& cfg,
                                  const std::filesystem::path& base = ".") {
  return evaluate_sets(collect_set_inputs(tasks), cfg, base);
}

}  // namespace shapeval
