#pragma once

// Shared helpers for the test suites: random inputs and brute-force oracles.

#include <cstdint>
#include <filesystem>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "vgc/vgc.hpp"

namespace vgc::test {

inline std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vgc_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline Volume random_volume(std::mt19937_64& rng, Dims d) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Volume v(d);
  for (auto& x : v.values()) x = u(rng);
  return v;
}

inline Dims random_dims(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  std::uniform_int_distribution<std::uint32_t> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// Smooth blobs plus noise, normalized: SLIC inputs with real structure.
inline Volume blobby_volume(std::mt19937_64& rng, Dims d, int blobs = 3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  struct B { double x, y, z, s; };
  std::vector<B> bs;
  for (int i = 0; i < blobs; ++i) {
    bs.push_back({u(rng) * d.x, u(rng) * d.y, u(rng) * d.z, 1.0 + 2.0 * u(rng)});
  }
  Volume v(d);
  for (std::uint32_t z = 0; z < d.z; ++z)
    for (std::uint32_t y = 0; y < d.y; ++y)
      for (std::uint32_t x = 0; x < d.x; ++x) {
        double s = noise(rng);
        for (const auto& b : bs) {
          const double r2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) + (z - b.z) * (z - b.z);
          s += std::exp(-r2 / (2 * b.s * b.s));
        }
        v(x, y, z) = float(s);
      }
  return normalize_intensity(v);
}

inline LabelMap random_labels(std::mt19937_64& rng, Dims d, std::uint32_t k) {
  std::uniform_int_distribution<std::uint32_t> u(0, k - 1);
  LabelMap l(d);
  for (auto& x : l.values()) x = u(rng);
  return l;
}

// Number of face-connected components of each label, by BFS.
inline std::vector<int> components_per_label(const LabelMap& l) {
  const Dims d = l.dims();
  std::vector<int> comps(segment_count(l), 0);
  std::vector<char> seen(l.size(), 0);
  for (std::size_t s = 0; s < l.size(); ++s) {
    if (seen[s]) continue;
    ++comps[l[s]];
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      const std::uint32_t x = i % d.x, y = (i / d.x) % d.y, z = i / (std::size_t{d.x} * d.y);
      auto visit = [&](std::int64_t xx, std::int64_t yy, std::int64_t zz) {
        if (xx < 0 || yy < 0 || zz < 0 || xx >= d.x || yy >= d.y || zz >= d.z) return;
        const std::size_t j = l.index(std::uint32_t(xx), std::uint32_t(yy), std::uint32_t(zz));
        if (!seen[j] && l[j] == l[i]) {
          seen[j] = 1;
          q.push(j);
        }
      };
      visit(x - 1, y, z); visit(x + 1, y, z);
      visit(x, y - 1, z); visit(x, y + 1, z);
      visit(x, y, std::int64_t(z) - 1); visit(x, y, z + 1);
    }
  }
  return comps;
}

inline std::vector<double> to_double(std::span<const float> v) {
  return {v.begin(), v.end()};
}

// Every pair of elements compared: adjacent iff their coordinates differ by
// one along exactly one axis.
inline std::vector<UndirectedEdge> rag_oracle(const LabelMap& l) {
  const Dims d = l.dims();
  std::set<UndirectedEdge> s;
  auto coord = [&](std::size_t i) {
    return std::array<std::int64_t, 3>{std::int64_t(i % d.x), std::int64_t((i / d.x) % d.y),
                                       std::int64_t(i / (std::size_t{d.x} * d.y))};
  };
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = i + 1; j < l.size(); ++j) {
      const auto a = coord(i), b = coord(j);
      const auto dist = std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
      if (dist == 1 && l[i] != l[j]) s.insert({std::min(l[i], l[j]), std::max(l[i], l[j])});
    }
  return {s.begin(), s.end()};
}

// Lloyd iteration with exhaustive assignment (every element against every
// center), same seeds and distance. Returns final labels.
inline std::vector<std::uint32_t> lloyd_oracle(const Volume& img, std::vector<SlicCenter> centers,
                                               double m, std::uint32_t k, int iterations) {
  const Dims d = img.dims();
  const double step = std::cbrt(double(img.size()) / k);
  const double w = (m / step) * (m / step);
  std::vector<std::uint32_t> label(img.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::uint32_t z = 0; z < d.z; ++z)
      for (std::uint32_t y = 0; y < d.y; ++y)
        for (std::uint32_t x = 0; x < d.x; ++x) {
          double best = 1e300;
          std::uint32_t arg = 0;
          for (std::uint32_t c = 0; c < centers.size(); ++c) {
            const double dc = img(x, y, z) - centers[c].intensity;
            const double dx = x - centers[c].pos[0], dy = y - centers[c].pos[1],
                         dz = z - centers[c].pos[2];
            const double dd = dc * dc + w * (dx * dx + dy * dy + dz * dz);
            if (dd < best) {
              best = dd;
              arg = c;
            }
          }
          label[img.index(x, y, z)] = arg;
        }
    std::vector<std::array<double, 5>> s(centers.size(), {0, 0, 0, 0, 0});
    for (std::uint32_t z = 0; z < d.z; ++z)
      for (std::uint32_t y = 0; y < d.y; ++y)
        for (std::uint32_t x = 0; x < d.x; ++x) {
          auto& a = s[label[img.index(x, y, z)]];
          a[0] += img(x, y, z);
          a[1] += x;
          a[2] += y;
          a[3] += z;
          a[4] += 1;
        }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (s[c][4] == 0) continue;
      centers[c].intensity = s[c][0] / s[c][4];
      centers[c].pos = {s[c][1] / s[c][4], s[c][2] / s[c][4], s[c][3] / s[c][4]};
    }
  }
  return label;
}

inline std::vector<std::array<double, 3>> centroids(const LabelMap& l) {
  const Dims d = l.dims();
  const auto s = segment_count(l);
  std::vector<std::array<double, 4>> acc(s, {0, 0, 0, 0});
  for (std::uint32_t z = 0; z < d.z; ++z)
    for (std::uint32_t y = 0; y < d.y; ++y)
      for (std::uint32_t x = 0; x < d.x; ++x) {
        auto& a = acc[l(x, y, z)];
        a[0] += x;
        a[1] += y;
        a[2] += z;
        a[3] += 1;
      }
  std::vector<std::array<double, 3>> out;
  for (const auto& a : acc) out.push_back({a[0] / a[3], a[1] / a[3], a[2] / a[3]});
  return out;
}

inline RegionGraph random_graph(std::mt19937_64& rng, std::uint32_t nodes, std::uint8_t fdim,
                                std::uint8_t pdim, double edge_p = 0.4) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::bernoulli_distribution coin(edge_p);
  RegionGraph g;
  g.num_nodes = nodes;
  g.feature_dim = fdim;
  g.pseudo_dim = pdim;
  for (std::size_t i = 0; i < std::size_t{nodes} * fdim; ++i) g.features.push_back(u(rng) * 2 - 1);
  for (std::uint32_t i = 0; i < nodes; ++i)
    for (std::uint32_t j = 0; j < nodes; ++j)
      if (i != j && coin(rng)) {
        g.edges.push_back({i, j});
        for (int a = 0; a < pdim; ++a) g.pseudo.push_back(u(rng));
      }
  return g;
}

inline nn::GridTensor random_tensor(std::mt19937_64& rng, std::uint32_t c, Dims d) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  nn::GridTensor t{c, d, {}};
  for (std::size_t i = 0; i < std::size_t{c} * d.count(); ++i) t.data.push_back(n(rng));
  return t;
}

}  // namespace vgc::test
