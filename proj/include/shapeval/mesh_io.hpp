#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "shapeval/geometry/types.hpp"
#include "shapeval/tensor_io.hpp"
#include "shapeval/text_parse.hpp"

namespace shapeval {

enum class MeshFormat { Off, Obj };

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

inline Vec3 parse_vertex(std::span<const std::string_view> toks, std::size_t line) {
  if (toks.size() != 3) parse_fail(line, "vertex needs exactly 3 coordinates");
  Vec3 v;
  for (std::size_t a = 0; a < 3; ++a) {
    auto value = text::parse_double(toks[a]);
    if (!value) parse_fail(line, "bad coordinate '" + std::string(toks[a]) + "'");
    v[a] = *value;
  }
  return v;
}

/// Removes faces with repeated indices or zero area; records how many.
inline void drop_degenerate(TriangleMesh& mesh) {
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& f = mesh.triangles[t];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || mesh.triangle_area(t) == 0) {
      ++mesh.dropped_degenerate;
      continue;
    }
    kept.push_back(f);
  }
  mesh.triangles = std::move(kept);
}

inline TriangleMesh parse_off(std::string_view text) {
  TriangleMesh mesh;
  auto all = text::lines(text);
  std::size_t li = 0;
  std::vector<std::string_view> toks;
  auto next = [&]() -> bool {
    while (li < all.size()) {
      toks = text::tokens(all[li++]);
      if (!toks.empty()) return true;
    }
    return false;
  };

  if (!next() || toks[0] != "OFF") parse_fail(li, "expected OFF header");
  std::vector<std::string_view> counts(toks.begin() + 1, toks.end());
  if (counts.empty()) {
    if (!next()) parse_fail(li, "missing OFF counts");
    counts = toks;
  }
  if (counts.size() != 3) parse_fail(li, "OFF counts line needs 3 integers");
  const auto nv = text::parse_int<std::uint32_t>(counts[0]);
  const auto nf = text::parse_int<std::uint32_t>(counts[1]);
  if (!nv || !nf || !text::parse_int<std::uint64_t>(counts[2])) parse_fail(li, "bad OFF counts");
  if (*nv > 0 && *nv < 3) parse_fail(li, "mesh needs at least 3 vertices");

  mesh.vertices.reserve(*nv);
  for (std::uint32_t i = 0; i < *nv; ++i) {
    if (!next()) parse_fail(li, "unexpected end of file in vertex list");
    mesh.vertices.push_back(parse_vertex(toks, li));
  }
  mesh.triangles.reserve(*nf);
  for (std::uint32_t i = 0; i < *nf; ++i) {
    if (!next()) parse_fail(li, "unexpected end of file in face list");
    const auto arity = text::parse_int<std::uint32_t>(toks[0]);
    if (!arity) parse_fail(li, "bad face vertex count");
    if (*arity != 3) {
      fail(ErrorCode::NonTriangleFace, "line " + std::to_string(li) + ": face has " +
                                           std::to_string(*arity) + " vertices");
    }
    if (toks.size() != 4) parse_fail(li, "face record must list exactly 3 indices");
    std::array<std::uint32_t, 3> face{};
    for (int k = 0; k < 3; ++k) {
      const auto idx = text::parse_int<std::int64_t>(toks[1 + k]);
      if (!idx) parse_fail(li, "bad face index '" + std::string(toks[1 + k]) + "'");
      if (*idx < 0 || *idx >= static_cast<std::int64_t>(*nv)) {
        fail(ErrorCode::IndexOutOfRange, "line " + std::to_string(li) + ": vertex index " +
                                             std::to_string(*idx) + " out of range");
      }
      face[k] = static_cast<std::uint32_t>(*idx);
    }
    mesh.triangles.push_back(face);
  }
  if (next()) parse_fail(li, "unexpected content after face list");
  return mesh;
}

inline TriangleMesh parse_obj(std::string_view text) {
  TriangleMesh mesh;
  struct PendingFace {
    std::array<std::int64_t, 3> idx;
    std::size_t line;
  };
  std::vector<PendingFace> faces;
  auto all = text::lines(text);
  for (std::size_t li = 0; li < all.size(); ++li) {
    const auto toks = text::tokens(all[li]);
    if (toks.empty()) continue;
    const std::size_t line = li + 1;
    const std::span<const std::string_view> args(toks.begin() + 1, toks.end());
    if (toks[0] == "v") {
      mesh.vertices.push_back(parse_vertex(args, line));
    } else if (toks[0] == "f") {
      if (args.size() != 3) {
        fail(ErrorCode::NonTriangleFace, "line " + std::to_string(line) + ": face has " +
                                             std::to_string(args.size()) + " vertices");
      }
      PendingFace f{{}, line};
      for (int k = 0; k < 3; ++k) {
        const auto idx = text::parse_int<std::int64_t>(args[k]);
        if (!idx) parse_fail(line, "bad face index '" + std::string(args[k]) + "'");
        f.idx[k] = *idx;
      }
      faces.push_back(f);
    } else {
      parse_fail(line, "unsupported OBJ record '" + std::string(toks[0]) + "'");
    }
  }
  const auto nv = static_cast<std::int64_t>(mesh.vertices.size());
  if (nv > 0 && nv < 3) fail(ErrorCode::ParseError, "mesh needs at least 3 vertices");
  for (const auto& f : faces) {
    std::array<std::uint32_t, 3> face{};
    for (int k = 0; k < 3; ++k) {
      if (f.idx[k] < 1 || f.idx[k] > nv) {
        fail(ErrorCode::IndexOutOfRange, "line " + std::to_string(f.line) + ": vertex index " +
                                             std::to_string(f.idx[k]) + " out of range (1-based)");
      }
      face[k] = static_cast<std::uint32_t>(f.idx[k] - 1);
    }
    mesh.triangles.push_back(face);
  }
  return mesh;
}

}  // namespace detail

inline TriangleMesh parse_mesh(std::string_view text, MeshFormat format) {
  TriangleMesh mesh = format == MeshFormat::Off ? detail::parse_off(text) : detail::parse_obj(text);
  detail::drop_degenerate(mesh);
  return mesh;
}

/// Format is taken from the extension (.off / .obj), falling back to
/// sniffing an OFF header.
inline TriangleMesh read_mesh(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  MeshFormat format = MeshFormat::Obj;
  if (ext == ".off") {
    format = MeshFormat::Off;
  } else if (ext != ".obj") {
    const auto first = text::tokens(bytes.substr(0, bytes.find('\n')));
    if (!first.empty() && first[0] == "OFF") format = MeshFormat::Off;
  }
  return parse_mesh(bytes, format);
}

}  // namespace shapeval
