#pragma once

// SLIC superpixels (2D, z = 1) and supervoxels (3D) over normalized grids,
// with face-connectivity enforcement and segment-mean smoothing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "vgc/error.hpp"
#include "vgc/grid.hpp"

namespace vgc {

struct SlicConfig {
  std::uint32_t target_segments = 200;
  double compactness = 0.3;
  int iterations = 10;
  bool enforce_connectivity = true;
  bool perturb_seeds = true;
  // Components smaller than orphan_fraction * N / K are merged away.
  double orphan_fraction = 0.25;

  friend bool operator==(const SlicConfig&, const SlicConfig&) = default;
};

inline SlicConfig default_slic_3d() { return SlicConfig{}; }
inline SlicConfig default_slic_2d() {
  SlicConfig c;
  c.target_segments = 150;
  return c;
}

struct SlicCenter {
  double intensity = 0.0;
  std::array<double, 3> pos{};
};

struct SlicResult {
  LabelMap labels;
  // Sum over elements of D^2 to the assigned center, one entry per
  // assignment step. Non-increasing.
  std::vector<double> objective;
  std::vector<SlicCenter> initial_centers;
  std::uint32_t segments = 0;
};

namespace detail {

inline std::array<std::uint32_t, 3> axis_counts(Dims dims, std::uint32_t k) {
  const double n = static_cast<double>(dims.count());
  const int d = dims.active_axes();
  const double step = std::pow(n / k, 1.0 / d);
  std::array<std::vector<std::uint32_t>, 3> cand;
  for (int a = 0; a < 3; ++a) {
    const std::uint32_t ext = dims[a];
    if (ext <= 1) {
      cand[a] = {1};
      continue;
    }
    const double base = ext / step;
    const auto lo = static_cast<std::int64_t>(std::floor(base)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(base)) + 1;
    for (std::int64_t c = std::max<std::int64_t>(1, lo);
         c <= std::min<std::int64_t>(ext, hi); ++c) {
      cand[a].push_back(static_cast<std::uint32_t>(c));
    }
  }
  std::array<std::uint32_t, 3> best{1, 1, 1};
  double best_err = std::numeric_limits<double>::infinity();
  double best_spread = std::numeric_limits<double>::infinity();
  for (auto cx : cand[0]) {
    for (auto cy : cand[1]) {
      for (auto cz : cand[2]) {
        const double prod = double(cx) * cy * cz;
        const double err = std::abs(std::log(prod / k));
        double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
        const std::array<std::uint32_t, 3> c{cx, cy, cz};
        for (int a = 0; a < 3; ++a) {
          if (dims[a] <= 1) continue;
          const double s = double(dims[a]) / c[a];
          smin = std::min(smin, s);
          smax = std::max(smax, s);
        }
        const double spread = smax / smin;
        if (err < best_err - 1e-12 ||
            (std::abs(err - best_err) <= 1e-12 && spread < best_spread)) {
          best = c;
          best_err = err;
          best_spread = spread;
        }
      }
    }
  }
  return best;
}

inline double central_gradient(const Grid<float>& img, std::int64_t x,
                                  std::int64_t y, std::int64_t z) {
  const Dims d = img.dims();
  auto at = [&](std::int64_t xx, std::int64_t yy, std::int64_t zz) -> double {
    xx = std::clamp<std::int64_t>(xx, 0, d.x - 1);
    yy = std::clamp<std::int64_t>(yy, 0, d.y - 1);
    zz = std::clamp<std::int64_t>(zz, 0, d.z - 1);
    return img(static_cast<std::uint32_t>(xx), static_cast<std::uint32_t>(yy),
               static_cast<std::uint32_t>(zz));
  };
  const double gx = at(x + 1, y, z) - at(x - 1, y, z);
  const double gy = at(x, y + 1, z) - at(x, y - 1, z);
  const double gz = at(x, y, z + 1) - at(x, y, z - 1);
  return gx * gx + gy * gy + gz * gz;
}

}  // namespace detail

/// Regular-grid seeds: per-axis counts chosen so their product is closest
/// to K, seeds at voxel-center coordinates (i + 0.5) * extent / count - 0.5.
inline std::vector<SlicCenter> slic_grid_seeds(const Grid<float>& img,
                                               std::uint32_t k) {
  const Dims d = img.dims();
  const auto counts = detail::axis_counts(d, k);
  std::vector<SlicCenter> centers;
  for (std::uint32_t iz = 0; iz < counts[2]; ++iz) {
    for (std::uint32_t iy = 0; iy < counts[1]; ++iy) {
      for (std::uint32_t ix = 0; ix < counts[0]; ++ix) {
        SlicCenter c;
        c.pos = {(ix + 0.5) * d.x / counts[0] - 0.5,
                 (iy + 0.5) * d.y / counts[1] - 0.5,
                 (iz + 0.5) * d.z / counts[2] - 0.5};
        const auto vx = static_cast<std::uint32_t>(std::lround(c.pos[0]));
        const auto vy = static_cast<std::uint32_t>(std::lround(c.pos[1]));
        const auto vz = static_cast<std::uint32_t>(std::lround(c.pos[2]));
        c.intensity = img(std::min(vx, d.x - 1), std::min(vy, d.y - 1),
                          std::min(vz, d.z - 1));
        centers.push_back(c);
      }
    }
  }
  return centers;
}

/// Moves each seed to the lowest-gradient voxel of its 3^d neighbourhood when
/// that voxel is strictly smoother than the seed's own voxel.
inline void perturb_seeds(const Grid<float>& img, std::vector<SlicCenter>& centers) {
  const Dims d = img.dims();
  for (auto& c : centers) {
    std::array<std::int64_t, 3> v;
    for (int a = 0; a < 3; ++a) {
      v[a] = std::clamp<std::int64_t>(std::llround(c.pos[a]), 0, d[a] - 1);
    }
    const double g0 = detail::central_gradient(img, v[0], v[1], v[2]);
    double best = g0;
    std::array<std::int64_t, 3> arg = v;
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::array<std::int64_t, 3> p{v[0] + dx, v[1] + dy, v[2] + dz};
          if (p[0] < 0 || p[1] < 0 || p[2] < 0 || p[0] >= d.x || p[1] >= d.y ||
              p[2] >= d.z) {
            continue;
          }
          const double g = detail::central_gradient(img, p[0], p[1], p[2]);
          if (g < best) {
            best = g;
            arg = p;
          }
        }
      }
    }
    if (best < g0) {
      c.pos = {double(arg[0]), double(arg[1]), double(arg[2])};
      c.intensity = img(static_cast<std::uint32_t>(arg[0]),
                        static_cast<std::uint32_t>(arg[1]),
                        static_cast<std::uint32_t>(arg[2]));
    }
  }
}

/// Splits every label into face-connected components (4-neighbourhood in
/// 2D, 6 in 3D), merges components smaller than min_size into their largest
/// adjacent component, and renumbers ids by first raster occurrence.
inline LabelMap enforce_connectivity(const LabelMap& labels, double min_size) {
  const Dims d = labels.dims();
  const std::size_t n = labels.size();
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(n, kNone);
  std::vector<std::size_t> comp_size;
  std::deque<std::size_t> queue;
  const std::size_t sx = 1, sy = d.x, sz = std::size_t{d.x} * d.y;

  auto for_neighbors = [&](std::size_t i, auto&& fn) {
    const auto x = static_cast<std::uint32_t>(i % d.x);
    const auto y = static_cast<std::uint32_t>((i / d.x) % d.y);
    const auto z = static_cast<std::uint32_t>(i / sz);
    if (x > 0) fn(i - sx);
    if (x + 1 < d.x) fn(i + sx);
    if (y > 0) fn(i - sy);
    if (y + 1 < d.y) fn(i + sy);
    if (z > 0) fn(i - sz);
    if (z + 1 < d.z) fn(i + sz);
  };

  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != kNone) continue;
    const auto id = static_cast<std::uint32_t>(comp_size.size());
    const std::uint32_t lab = labels[start];
    std::size_t size = 0;
    comp[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      ++size;
      for_neighbors(i, [&](std::size_t j) {
        if (comp[j] == kNone && labels[j] == lab) {
          comp[j] = id;
          queue.push_back(j);
        }
      });
    }
    comp_size.push_back(size);
  }

  const std::size_t nc = comp_size.size();
  std::vector<std::vector<std::uint32_t>> adj(nc);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = i % d.x;
    const auto y = (i / d.x) % d.y;
    const auto z = i / sz;
    auto link = [&](std::size_t j) {
      if (comp[i] != comp[j]) {
        adj[comp[i]].push_back(comp[j]);
        adj[comp[j]].push_back(comp[i]);
      }
    };
    if (x + 1 < d.x) link(i + sx);
    if (y + 1 < d.y) link(i + sy);
    if (z + 1 < d.z) link(i + sz);
  }

  std::vector<std::uint32_t> parent(nc);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };

  bool merged = true;
  while (merged) {
    merged = false;
    for (std::uint32_t c = 0; c < nc; ++c) {
      const std::uint32_t r = find(c);
      if (r != c || double(comp_size[r]) >= min_size) continue;
      std::uint32_t target = kNone;
      for (std::uint32_t nb : adj[r]) {
        const std::uint32_t t = find(nb);
        if (t == r) continue;
        if (target == kNone || comp_size[t] > comp_size[target] ||
            (comp_size[t] == comp_size[target] && t < target)) {
          target = t;
        }
      }
      if (target == kNone) continue;
      parent[r] = target;
      comp_size[target] += comp_size[r];
      auto& into = adj[target];
      into.insert(into.end(), adj[r].begin(), adj[r].end());
      adj[r].clear();
      adj[r].shrink_to_fit();
      merged = true;
    }
  }

  std::vector<std::uint32_t> new_id(nc, kNone);
  std::uint32_t next = 0;
  LabelMap out(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t r = find(comp[i]);
    if (new_id[r] == kNone) new_id[r] = next++;
    out[i] = new_id[r];
  }
  return out;
}

/// Number of distinct ids, assuming the contiguous 0..S-1 invariant.
inline std::uint32_t segment_count(const LabelMap& labels) {
  std::uint32_t mx = 0;
  for (auto v : labels.values()) mx = std::max(mx, v);
  return labels.empty() ? 0 : mx + 1;
}

inline SlicResult slic_trace(const Grid<float>& img, const SlicConfig& cfg) {
  const Dims d = img.dims();
  const std::size_t n = img.size();
  if (cfg.target_segments == 0) throw ParameterError("slic: K must be positive");
  if (cfg.target_segments > n) {
    throw ParameterError("slic: K = " + std::to_string(cfg.target_segments) +
                         " exceeds element count " + std::to_string(n));
  }
  if (!(cfg.compactness > 0.0)) throw ParameterError("slic: compactness must be > 0");
  if (cfg.iterations < 1) throw ParameterError("slic: iterations must be >= 1");
  for (float v : img.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ParameterError("slic: input must be normalized to [0, 1]");
    }
  }

  const int dim = d.active_axes();
  const double step = std::pow(double(n) / cfg.target_segments, 1.0 / dim);
  const double w = (cfg.compactness / step) * (cfg.compactness / step);

  SlicResult res;
  std::vector<SlicCenter> centers = slic_grid_seeds(img, cfg.target_segments);
  if (cfg.perturb_seeds) perturb_seeds(img, centers);
  res.initial_centers = centers;

  const auto counts = detail::axis_counts(d, cfg.target_segments);
  std::array<double, 3> half{};
  for (int a = 0; a < 3; ++a) {
    half[a] = d[a] > 1 ? std::max(step, double(d[a]) / counts[a]) : 0.0;
  }

  const float* px = img.values().data();
  auto dist2 = [&](std::size_t i, std::uint32_t x, std::uint32_t y,
                   std::uint32_t z, const SlicCenter& c) {
    const double dc = px[i] - c.intensity;
    const double dx = x - c.pos[0], dy = y - c.pos[1], dz = z - c.pos[2];
    return dc * dc + w * (dx * dx + dy * dy + dz * dz);
  };

  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(n, kUnset);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  const auto k = static_cast<std::uint32_t>(centers.size());

  for (int it = 0; it < cfg.iterations; ++it) {
    // Each element starts from its current center, so an element whose
    // center drifts out of window range never gets a worse assignment.
    if (it > 0) {
      for (std::uint32_t z = 0, i = 0; z < d.z; ++z)
        for (std::uint32_t y = 0; y < d.y; ++y)
          for (std::uint32_t x = 0; x < d.x; ++x, ++i)
            dist[i] = dist2(i, x, y, z, centers[label[i]]);
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      const auto& ctr = centers[c];
      std::array<std::int64_t, 3> lo, hi;
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::max<std::int64_t>(0, std::llround(std::ceil(ctr.pos[a] - half[a])));
        hi[a] = std::min<std::int64_t>(d[a] - 1,
                                       std::llround(std::floor(ctr.pos[a] + half[a])));
      }
      for (auto z = lo[2]; z <= hi[2]; ++z) {
        for (auto y = lo[1]; y <= hi[1]; ++y) {
          std::size_t i = img.index(static_cast<std::uint32_t>(lo[0]),
                                    static_cast<std::uint32_t>(y),
                                    static_cast<std::uint32_t>(z));
          for (auto x = lo[0]; x <= hi[0]; ++x, ++i) {
            const double dd = dist2(i, static_cast<std::uint32_t>(x),
                                    static_cast<std::uint32_t>(y),
                                    static_cast<std::uint32_t>(z), ctr);
            if (dd < dist[i] || (dd == dist[i] && c < label[i])) {
              dist[i] = dd;
              label[i] = c;
            }
          }
        }
      }
    }
    if (it == 0) {
      for (std::uint32_t z = 0, i = 0; z < d.z; ++z)
        for (std::uint32_t y = 0; y < d.y; ++y)
          for (std::uint32_t x = 0; x < d.x; ++x, ++i) {
            if (label[i] != kUnset) continue;
            for (std::uint32_t c = 0; c < k; ++c) {
              const double dd = dist2(i, x, y, z, centers[c]);
              if (dd < dist[i]) {
                dist[i] = dd;
                label[i] = c;
              }
            }
          }
    }
    double total = 0.0;
    for (double v : dist) total += v;
    res.objective.push_back(total);

    std::vector<std::array<double, 4>> sum(k, {0, 0, 0, 0});
    std::vector<std::size_t> cnt(k, 0);
    for (std::uint32_t z = 0, i = 0; z < d.z; ++z)
      for (std::uint32_t y = 0; y < d.y; ++y)
        for (std::uint32_t x = 0; x < d.x; ++x, ++i) {
          auto& s = sum[label[i]];
          s[0] += px[i];
          s[1] += x;
          s[2] += y;
          s[3] += z;
          ++cnt[label[i]];
        }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (cnt[c] == 0) continue;
      const double m = double(cnt[c]);
      centers[c].intensity = sum[c][0] / m;
      centers[c].pos = {sum[c][1] / m, sum[c][2] / m, sum[c][3] / m};
    }
  }

  // Drop empty clusters and compact ids in center order.
  std::vector<std::uint32_t> remap(k, kUnset);
  for (auto l : label) remap[l] = 0;
  std::uint32_t next = 0;
  for (auto& r : remap) {
    if (r != kUnset) r = next++;
  }
  LabelMap out(d, 0);
  for (std::size_t i = 0; i < n; ++i) out[i] = remap[label[i]];

  if (cfg.enforce_connectivity) {
    out = enforce_connectivity(
        out, cfg.orphan_fraction * double(n) / cfg.target_segments);
  }
  res.segments = segment_count(out);
  res.labels = std::move(out);
  return res;
}

inline LabelMap slic(const Grid<float>& img, const SlicConfig& cfg) {
  return slic_trace(img, cfg).labels;
}

/// Replaces every element with the mean intensity of its segment.
inline Grid<float> smooth_by_segment(const Grid<float>& img, const LabelMap& labels) {
  if (img.dims() != labels.dims()) {
    throw ParameterError("smooth_by_segment: dims " + to_string(img.dims()) +
                         " vs labels " + to_string(labels.dims()));
  }
  const std::uint32_t s = segment_count(labels);
  std::vector<double> sum(s, 0.0);
  std::vector<std::size_t> cnt(s, 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    sum[labels[i]] += img[i];
    ++cnt[labels[i]];
  }
  std::vector<float> mean(s, 0.0f);
  for (std::uint32_t c = 0; c < s; ++c) {
    if (cnt[c]) mean[c] = static_cast<float>(sum[c] / double(cnt[c]));
  }
  Grid<float> out(img.dims());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = mean[labels[i]];
  return out;
}

}  // namespace vgc
