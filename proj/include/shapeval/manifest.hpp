#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "shapeval/error.hpp"
#include "shapeval/tensor_io.hpp"
#include "shapeval/text_parse.hpp"

namespace shapeval {

enum class Role { Generated, Reference, Partial, Completion };
enum class Kind { Mesh, Points, Features };

constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::Generated: return "generated";
    case Role::Reference: return "reference";
    case Role::Partial: return "partial";
    case Role::Completion: return "completion";
  }
  return "?";
}

constexpr std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::Mesh: return "mesh";
    case Kind::Points: return "points";
    case Kind::Features: return "features";
  }
  return "?";
}

struct ManifestEntry {
  std::string id;
  std::string class_label;
  Role role = Role::Reference;
  Kind kind = Kind::Mesh;
  std::string path;   // relative to the manifest's directory
  std::string group;  // empty when absent

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    fail(ErrorCode::MissingField, "line " + std::to_string(line) + ": missing \"" + key + "\"");
  }
  if (!it->is_string()) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": \"" + key + "\" must be a string");
  }
  return it->get<std::string>();
}

inline Role parse_role(const std::string& s, std::size_t line) {
  if (s == "generated") return Role::Generated;
  if (s == "reference") return Role::Reference;
  if (s == "partial") return Role::Partial;
  if (s == "completion") return Role::Completion;
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": unknown role '" + s + "'");
}

inline Kind parse_kind(const std::string& s, std::size_t line) {
  if (s == "mesh") return Kind::Mesh;
  if (s == "points") return Kind::Points;
  if (s == "features") return Kind::Features;
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": unknown kind '" + s + "'");
}

}  // namespace detail

/// Parses JSON-lines manifest text. Blank lines are ignored.
inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::set<std::tuple<std::string, Role, std::string>> seen;
  const auto all = text::lines(text);
  for (std::size_t li = 0; li < all.size(); ++li) {
    const std::size_t line = li + 1;
    std::string_view raw = all[li];
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
    }
    if (!obj.is_object()) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected a JSON object");
    }

    ManifestEntry e;
    e.id = detail::require_string(obj, "id", line);
    e.class_label = detail::require_string(obj, "class_label", line);
    e.role = detail::parse_role(detail::require_string(obj, "role", line), line);
    e.kind = detail::parse_kind(detail::require_string(obj, "kind", line), line);
    e.path = detail::require_string(obj, "path", line);
    if (obj.contains("group") && !obj["group"].is_null()) {
      e.group = detail::require_string(obj, "group", line);
    }

    if (e.id.empty()) fail(ErrorCode::MissingField, "line " + std::to_string(line) + ": empty id");
    if (e.role == Role::Completion && e.group.empty()) {
      fail(ErrorCode::MissingField,
           "line " + std::to_string(line) + ": completion entry '" + e.id + "' needs a group");
    }
    if (!seen.emplace(e.id, e.role, e.group).second) {
      fail(ErrorCode::DuplicateEntry, "line " + std::to_string(line) + ": duplicate entry '" + e.id +
                                          "' (role " + std::string(to_string(e.role)) + ")");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file_bytes(path));
}

}  // namespace shapeval
