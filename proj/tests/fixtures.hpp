#pragma once

// Small on-disk datasets (point tensors, meshes, feature rows and a
// manifest) for the harness and CLI tests.

#include <json.hpp>

#include "test_util.hpp"

namespace shapeval::testing {

class Dataset {
 public:
  Dataset() = default;

  void add_points(const std::string& id, const std::string& label, const std::string& role, const PointCloud& pc,
                  const std::string& group = "") {
    const std::string file = role + "_" + (group.empty() ? "" : group + "_") + id + ".tnsr";
    write_tensor(tensor_from_cloud(pc), dir_ / file);
    add_line(id, label, role, "points", file, group);
  }

  void add_mesh(const std::string& id, const std::string& label, const std::string& role, const TriangleMesh& m) {
    const std::string file = role + "_" + id + ".off";
    dir_.write(file, off_text(m));
    add_line(id, label, role, "mesh", file, "");
  }

  void add_features(const std::string& id, const std::string& label, const std::string& role,
                    const std::vector<double>& row) {
    const std::string file = "feat_" + role + "_" + id + ".tnsr";
    write_tensor(TensorFile::from_f64({row.size()}, row), dir_ / file);
    add_line(id, label, role, "features", file, "");
  }

  std::filesystem::path write_manifest(const std::string& name = "manifest.jsonl") const {
    std::string text;
    for (const auto& l : lines_) text += l + "\n";
    return dir_.write(name, text);
  }

  std::vector<ManifestEntry> entries() const { return parse_manifest(manifest_text()); }
  std::string manifest_text() const {
    std::string text;
    for (const auto& l : lines_) text += l + "\n";
    return text;
  }

  const std::filesystem::path& dir() const { return dir_.path(); }
  std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  void add_line(const std::string& id, const std::string& label, const std::string& role, const std::string& kind,
                const std::string& path, const std::string& group) {
    nlohmann::json j{{"id", id}, {"class_label", label}, {"role", role}, {"kind", kind}, {"path", path}};
    if (!group.empty()) j["group"] = group;
    lines_.push_back(j.dump());
  }

  TempDir dir_;
  std::vector<std::string> lines_;
};

/// Paired generated/reference point clouds for `classes`, `per_class` each.
/// Generated clouds are noisy copies of their reference.
inline void add_paired_classes(Dataset& ds, std::mt19937_64& rng, const std::vector<std::string>& classes,
                               std::size_t per_class, std::size_t points = 64, double noise = 0.01) {
  std::normal_distribution<double> g(0, noise);
  for (const auto& label : classes) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::string id = label + std::to_string(i);
      const auto ref = random_cloud(rng, points, -0.5, 0.5);
      auto gen = ref;
      for (auto& p : gen.points) p = p + Vec3{g(rng), g(rng), g(rng)};
      ds.add_points(id, label, "reference", ref);
      ds.add_points(id, label, "generated", gen);
    }
  }
}

inline const ReportRow* find_row(const MetricReport& r, const std::string& scope, const std::string& metric) {
  for (const auto& row : r.rows)
    if (row.scope == scope && row.metric == metric) return &row;
  return nullptr;
}

}  // namespace shapeval::testing
