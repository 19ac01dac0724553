#pragma once

// Dataset manifest: JSON lines, one {path, label, domain, variant, seed}
// record per sample.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vgc/volume.hpp"

namespace vgc {

struct ManifestRecord {
  std::string path;
  ClassLabel label = ClassLabel::DMN;
  Domain::Kind domain = Domain::Kind::Healthy;
  Variant variant = Variant::Full;
  std::uint64_t seed = 0;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

inline nlohmann::json to_json(const ManifestRecord& r) {
  return {{"path", r.path},
          {"label", std::string(name(r.label))},
          {"domain", std::string(name(r.domain))},
          {"variant", std::string(name(r.variant))},
          {"seed", r.seed}};
}

inline ManifestRecord manifest_record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  try {
    r.path = j.at("path").get<std::string>();
    r.label = class_from_name(j.at("label").get<std::string>());
    const auto dom = j.at("domain").get<std::string>();
    if (dom == "healthy") r.domain = Domain::Kind::Healthy;
    else if (dom == "unhealthy") r.domain = Domain::Kind::Unhealthy;
    else throw ParameterError("unknown domain: " + dom);
    r.variant = variant_from_name(j.at("variant").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest record: ") + e.what());
  }
  return r;
}

inline void write_manifest(const std::vector<ManifestRecord>& records,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParameterError("cannot open for writing: " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

/// Relative record paths are resolved against the manifest directory.
inline std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open manifest: " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto r = manifest_record_from_json(j);
    if (std::filesystem::path(r.path).is_relative()) {
      r.path = (path.parent_path() / r.path).string();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vgc
