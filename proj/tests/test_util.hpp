#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "shapeval/shapeval.hpp"

namespace shapeval::testing {

#define EXPECT_SHAPEVAL_ERROR(stmt, expected_code)                                  \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "expected " << ::shapeval::to_string(expected_code);         \
    } catch (const ::shapeval::Error& e) {                                          \
      EXPECT_EQ(e.code(), expected_code) << e.what();                               \
    }                                                                               \
  } while (0)

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double lo = -1, double hi = 1,
                               bool normals = false) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::normal_distribution<double> g;
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    pc.points.push_back({u(rng), u(rng), u(rng)});
    if (normals) {
      Vec3 v{g(rng), g(rng), g(rng)};
      pc.normals.push_back((1.0 / norm(v)) * v);
    }
  }
  return pc;
}

inline PointCloud cloud(std::initializer_list<Vec3> pts) {
  PointCloud pc;
  pc.points = pts;
  return pc;
}

/// Axis-aligned box with outward-facing triangles.
inline TriangleMesh box_mesh(Vec3 lo, Vec3 hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  }
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline TriangleMesh unit_cube() { return box_mesh({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}); }

inline std::string off_text(const TriangleMesh& m) {
  std::string s = "OFF\n" + std::to_string(m.vertices.size()) + " " + std::to_string(m.triangles.size()) + " 0\n";
  for (const auto& v : m.vertices) s += format_value(v.x) + " " + format_value(v.y) + " " + format_value(v.z) + "\n";
  for (const auto& t : m.triangles) {
    s += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("shapeval_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) { return read_file_bytes(p); }

}  // namespace shapeval::testing
