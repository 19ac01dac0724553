#pragma once

// Region graphs built from SLIC segmentations: one node per segment,
// region-adjacency and k-nearest-neighbour edges, and per-edge
// pseudo-coordinates in [0, 1]^d.
//
// VGP1 container: "VGP1" | u32 graph count | per graph: u32 nodes, u32 edges,
// u8 feature dim, u8 pseudo dim, u8 label, f32 features[nodes * fdim],
// u32 (src, dst)[edges], f32 pseudo[edges * pdim]. Little-endian.
// Provenance is stored next to it as <path>.json.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vgc/binary.hpp"
#include "vgc/slic.hpp"
#include "vgc/volume.hpp"

namespace vgc {

struct RegionStats {
  std::array<double, 3> centroid{};  // voxel units
  double mean = 0.0;
  std::size_t size = 0;
};

/// Per-segment centroid, mean intensity and member count.
inline std::vector<RegionStats> region_stats(const Grid<float>& img,
                                             const LabelMap& labels) {
  if (img.dims() != labels.dims()) {
    throw ParameterError("region_stats: image and label dims differ");
  }
  const Dims d = img.dims();
  std::vector<RegionStats> out(segment_count(labels));
  std::vector<std::array<double, 4>> sum(out.size(), {0, 0, 0, 0});
  for (std::uint32_t z = 0, i = 0; z < d.z; ++z)
    for (std::uint32_t y = 0; y < d.y; ++y)
      for (std::uint32_t x = 0; x < d.x; ++x, ++i) {
        const auto l = labels[i];
        sum[l][0] += x;
        sum[l][1] += y;
        sum[l][2] += z;
        sum[l][3] += img[i];
        ++out[l].size;
      }
  for (std::size_t s = 0; s < out.size(); ++s) {
    if (out[s].size == 0) {
      throw StructuralError("region_stats: segment " + std::to_string(s) +
                            " is empty (label ids are not contiguous)");
    }
    const double m = double(out[s].size);
    out[s].centroid = {sum[s][0] / m, sum[s][1] / m, sum[s][2] / m};
    out[s].mean = sum[s][3] / m;
  }
  return out;
}

using UndirectedEdge = std::pair<std::uint32_t, std::uint32_t>;  // first < second

/// Region adjacency: {a, b} for every face-adjacent element pair with
/// labels a != b. Sorted, no duplicates.
inline std::vector<UndirectedEdge> build_rag(const LabelMap& labels) {
  const Dims d = labels.dims();
  std::vector<UndirectedEdge> edges;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
  };
  for (std::uint32_t z = 0; z < d.z; ++z)
    for (std::uint32_t y = 0; y < d.y; ++y)
      for (std::uint32_t x = 0; x < d.x; ++x) {
        const auto l = labels(x, y, z);
        if (x + 1 < d.x) add(l, labels(x + 1, y, z));
        if (y + 1 < d.y) add(l, labels(x, y + 1, z));
        if (z + 1 < d.z) add(l, labels(x, y, z + 1));
      }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// Directed edge src -> dst; messages flow from src into dst.
struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using Point3 = std::array<double, 3>;

/// For every node i, edges j -> i from its k nearest other nodes (Euclidean,
/// ties to the lower id). Ordered by i, then by rank.
inline std::vector<Edge> knn_edges(std::span<const Point3> pos, std::uint32_t k) {
  const auto n = static_cast<std::uint32_t>(pos.size());
  if (k < 1 || k >= n) {
    throw ParameterError("knn_edges: need 1 <= k < node count (k = " +
                         std::to_string(k) + ", nodes = " + std::to_string(n) + ")");
  }
  std::vector<Edge> out;
  out.reserve(std::size_t{n} * k);
  std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double t = pos[i][a] - pos[j][a];
        s += t * t;
      }
      cand[c++] = {s, j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (std::uint32_t r = 0; r < k; ++r) out.push_back({cand[r].second, i});
  }
  return out;
}

/// u = (pos[src] - pos[dst]) / (2M) + 0.5 per component, where M is the
/// largest |component| over all edges; 0.5 everywhere when M = 0.
/// Returns edges.size() * dim values.
inline std::vector<float> edge_pseudo_coords(std::span<const Point3> pos,
                                             std::span<const Edge> edges, int dim) {
  double m = 0.0;
  for (const auto& e : edges) {
    for (int a = 0; a < dim; ++a) {
      m = std::max(m, std::abs(pos[e.src][a] - pos[e.dst][a]));
    }
  }
  std::vector<float> u(edges.size() * dim, 0.5f);
  if (m == 0.0) return u;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    for (int a = 0; a < dim; ++a) {
      const double delta = pos[edges[k].src][a] - pos[edges[k].dst][a];
      u[k * dim + a] =
          static_cast<float>(std::clamp(delta / (2.0 * m) + 0.5, 0.0, 1.0));
    }
  }
  return u;
}

struct RegionGraph {
  std::uint32_t num_nodes = 0;
  std::uint8_t feature_dim = 0;
  std::uint8_t pseudo_dim = 0;
  std::uint8_t label = 0;
  std::vector<float> features;  // num_nodes x feature_dim, row-major
  std::vector<Edge> edges;
  std::vector<float> pseudo;    // edges.size() x pseudo_dim

  [[nodiscard]] std::span<const float> node(std::uint32_t i) const {
    return std::span<const float>(features).subspan(std::size_t{i} * feature_dim,
                                                    feature_dim);
  }
  friend bool operator==(const RegionGraph&, const RegionGraph&) = default;
};

/// Throws StructuralError if any RegionGraph invariant is broken.
inline void validate(const RegionGraph& g) {
  if (g.features.size() != std::size_t{g.num_nodes} * g.feature_dim) {
    throw StructuralError("graph: feature block size mismatch");
  }
  if (g.pseudo.size() != g.edges.size() * g.pseudo_dim) {
    throw StructuralError("graph: pseudo-coordinate block size mismatch");
  }
  if (g.label >= kNumClasses) throw StructuralError("graph: label out of range");
  for (const auto& e : g.edges) {
    if (e.src >= g.num_nodes || e.dst >= g.num_nodes) {
      throw StructuralError("graph: edge endpoint out of range");
    }
    if (e.src == e.dst) throw StructuralError("graph: self-loop");
  }
  for (float u : g.pseudo) {
    if (!(u >= 0.0f && u <= 1.0f)) throw StructuralError("graph: pseudo outside [0,1]");
  }
  for (float f : g.features) {
    if (!std::isfinite(f)) throw StructuralError("graph: non-finite feature");
  }
}

enum class EdgeMode : std::uint8_t { Union, RagOnly, KnnOnly };

inline std::string_view name(EdgeMode m) {
  switch (m) {
    case EdgeMode::Union: return "union";
    case EdgeMode::RagOnly: return "rag";
    case EdgeMode::KnnOnly: return "knn";
  }
  return "";
}

inline EdgeMode edge_mode_from_name(std::string_view s) {
  if (s == "union") return EdgeMode::Union;
  if (s == "rag") return EdgeMode::RagOnly;
  if (s == "knn") return EdgeMode::KnnOnly;
  throw ParameterError("unknown edge mode: " + std::string(s));
}

struct EncodeConfig {
  SlicConfig slic = default_slic_3d();
  std::uint32_t k = 6;
  EdgeMode edges = EdgeMode::Union;
  friend bool operator==(const EncodeConfig&, const EncodeConfig&) = default;
};

inline EncodeConfig default_encode_3d() { return {}; }
inline EncodeConfig default_encode_2d() { return {default_slic_2d(), 4, EdgeMode::Union}; }

/// slic -> smooth -> region stats -> edges -> pseudo-coordinates.
/// Node features: [mean, size * S / N, cx, cy(, cz)] with centroids scaled
/// to [0, 1] by the grid extent; 2D grids (z = 1) give 4 features.
inline RegionGraph encode_graph(const Grid<float>& img, ClassLabel label,
                                const EncodeConfig& cfg) {
  const Dims d = img.dims();
  const int dim = d.is_2d() ? 2 : 3;
  const LabelMap labels = slic(img, cfg.slic);
  const Grid<float> smooth = smooth_by_segment(img, labels);
  const auto stats = region_stats(smooth, labels);
  const auto s = static_cast<std::uint32_t>(stats.size());

  RegionGraph g;
  g.num_nodes = s;
  g.feature_dim = static_cast<std::uint8_t>(dim + 2);
  g.pseudo_dim = static_cast<std::uint8_t>(dim);
  g.label = static_cast<std::uint8_t>(label);
  g.features.reserve(std::size_t{s} * g.feature_dim);
  std::vector<Point3> pos(s);
  const double n = double(img.size());
  for (std::uint32_t i = 0; i < s; ++i) {
    const auto& r = stats[i];
    pos[i] = r.centroid;
    g.features.push_back(static_cast<float>(r.mean));
    g.features.push_back(static_cast<float>(double(r.size) * s / n));
    for (int a = 0; a < dim; ++a) {
      const double ext = d[a] > 1 ? double(d[a] - 1) : 1.0;
      g.features.push_back(static_cast<float>(r.centroid[a] / ext));
    }
  }

  std::vector<Edge> edges;
  if (cfg.edges != EdgeMode::KnnOnly) {
    for (const auto& [a, b] : build_rag(labels)) {
      edges.push_back({a, b});
      edges.push_back({b, a});
    }
  }
  if (cfg.edges != EdgeMode::RagOnly) {
    const auto knn = knn_edges(pos, cfg.k);
    edges.insert(edges.end(), knn.begin(), knn.end());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.pseudo = edge_pseudo_coords(pos, edges, dim);
  g.edges = std::move(edges);
  return g;
}

inline RegionGraph encode_graph(const Sample& s, const EncodeConfig& cfg) {
  return encode_graph(s.volume, s.label, cfg);
}

struct GraphProvenance {
  std::vector<std::uint64_t> sample_seeds;
  EncodeConfig encode;
  friend bool operator==(const GraphProvenance&, const GraphProvenance&) = default;
};

struct GraphDataset {
  std::vector<RegionGraph> graphs;
  GraphProvenance provenance;
  friend bool operator==(const GraphDataset&, const GraphDataset&) = default;
};

inline std::vector<char> encode_graphs(const std::vector<RegionGraph>& graphs) {
  detail::ByteWriter w;
  w.bytes("VGP1");
  w.u32(static_cast<std::uint32_t>(graphs.size()));
  for (const auto& g : graphs) {
    w.u32(g.num_nodes);
    w.u32(static_cast<std::uint32_t>(g.edges.size()));
    w.u8(g.feature_dim);
    w.u8(g.pseudo_dim);
    w.u8(g.label);
    for (float f : g.features) w.f32(f);
    for (const auto& e : g.edges) {
      w.u32(e.src);
      w.u32(e.dst);
    }
    for (float u : g.pseudo) w.f32(u);
  }
  return w.buffer();
}

inline std::vector<RegionGraph> decode_graphs(detail::ByteReader& r) {
  if (r.bytes(4, "magic") != "VGP1") r.fail("bad magic (expected VGP1)", 0);
  const std::uint32_t count = r.u32("graph count");
  std::vector<RegionGraph> out;
  for (std::uint32_t gi = 0; gi < count; ++gi) {
    const std::string tag = "graph " + std::to_string(gi) + " ";
    RegionGraph g;
    const std::size_t header_at = r.offset();
    g.num_nodes = r.u32(tag + "header");
    const std::uint32_t ne = r.u32(tag + "header");
    g.feature_dim = r.u8(tag + "header");
    g.pseudo_dim = r.u8(tag + "header");
    g.label = r.u8(tag + "header");
    if (g.label >= kNumClasses) r.fail(tag + "header: label out of range", header_at);
    const std::uint64_t nf = std::uint64_t{g.num_nodes} * g.feature_dim;
    r.require(nf * 4, tag + "feature section");
    g.features.resize(nf);
    for (auto& f : g.features) f = r.f32(tag + "feature section");
    r.require(std::uint64_t{ne} * 8, tag + "edge section");
    const std::size_t edges_at = r.offset();
    g.edges.resize(ne);
    for (auto& e : g.edges) {
      e.src = r.u32(tag + "edge section");
      e.dst = r.u32(tag + "edge section");
      if (e.src >= g.num_nodes || e.dst >= g.num_nodes) {
        r.fail(tag + "edge section: endpoint out of range", edges_at);
      }
    }
    const std::uint64_t np = std::uint64_t{ne} * g.pseudo_dim;
    r.require(np * 4, tag + "pseudo section");
    g.pseudo.resize(np);
    for (auto& u : g.pseudo) u = r.f32(tag + "pseudo section");
    out.push_back(std::move(g));
  }
  if (!r.at_end()) r.fail("trailing bytes after last graph", r.offset());
  return out;
}

inline nlohmann::json to_json(const GraphProvenance& p) {
  const auto& s = p.encode.slic;
  return {{"sample_seeds", p.sample_seeds},
          {"slic",
           {{"target_segments", s.target_segments},
            {"compactness", s.compactness},
            {"iterations", s.iterations},
            {"enforce_connectivity", s.enforce_connectivity},
            {"perturb_seeds", s.perturb_seeds},
            {"orphan_fraction", s.orphan_fraction}}},
          {"k", p.encode.k},
          {"edges", std::string(name(p.encode.edges))}};
}

inline GraphProvenance provenance_from_json(const nlohmann::json& j) {
  GraphProvenance p;
  p.sample_seeds = j.at("sample_seeds").get<std::vector<std::uint64_t>>();
  const auto& s = j.at("slic");
  p.encode.slic.target_segments = s.at("target_segments").get<std::uint32_t>();
  p.encode.slic.compactness = s.at("compactness").get<double>();
  p.encode.slic.iterations = s.at("iterations").get<int>();
  p.encode.slic.enforce_connectivity = s.at("enforce_connectivity").get<bool>();
  p.encode.slic.perturb_seeds = s.at("perturb_seeds").get<bool>();
  p.encode.slic.orphan_fraction = s.at("orphan_fraction").get<double>();
  p.encode.k = j.at("k").get<std::uint32_t>();
  p.encode.edges = edge_mode_from_name(j.at("edges").get<std::string>());
  return p;
}

inline void write_graphs(const GraphDataset& ds, const std::filesystem::path& path) {
  detail::ByteWriter w;
  const auto bytes = encode_graphs(ds.graphs);
  w.bytes(std::string_view(bytes.data(), bytes.size()));
  w.save(path);
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  side << to_json(ds.provenance).dump(2) << '\n';
}

inline GraphDataset read_graphs(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  GraphDataset ds;
  ds.graphs = decode_graphs(r);
  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    try {
      ds.provenance = provenance_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(side.string() + ": " + e.what());
    }
  }
  return ds;
}

}  // namespace vgc
