#pragma once

// Synthetic activation-volume generator standing in for the clinical
// database. Geometry table version: synth-v1. Changing any value in
// kCanonicalCenters or GeneratorOptions defaults requires a version bump.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vgc/rng.hpp"
#include "vgc/volume.hpp"

namespace vgc {

inline constexpr std::string_view kSynthVersion = "synth-v1";
inline constexpr Dims kDefaultDims{42, 51, 34};
inline constexpr double kThresholdedVariantCutoff = 0.4;

struct BlobCenter {
  double x, y, z;  // normalized coordinates in [0, 1]
};

// 18 centers grouped by class; blobs of different classes are at least
// 10 voxels apart on the default grid. SAL and DAN share an axial footprint
// and differ only in depth.
inline constexpr std::array<BlobCenter, 18> kBlobTable = {{
    {0.41, 0.16, 0.55}, {0.59, 0.16, 0.55}, {0.50, 0.32, 0.55},  // DMN
    {0.10, 0.46, 0.38}, {0.27, 0.46, 0.38}, {0.18, 0.62, 0.38},  // LANG
    {0.71, 0.72, 0.62}, {0.89, 0.72, 0.62}, {0.80, 0.88, 0.62},  // rFPCN
    {0.13, 0.74, 0.66}, {0.31, 0.74, 0.66}, {0.22, 0.90, 0.66},  // lFPCN
    {0.42, 0.56, 0.18}, {0.58, 0.56, 0.18},                      // SAL
    {0.42, 0.56, 0.82}, {0.58, 0.56, 0.82},                      // DAN
    {0.74, 0.38, 0.30}, {0.90, 0.38, 0.30},                      // VAN
}};

// [first, first + count) rows of kBlobTable for each class.
inline constexpr std::array<std::array<int, 2>, kNumClasses> kClassBlobs = {{
    {0, 3}, {3, 3}, {6, 3}, {9, 3}, {12, 2}, {14, 2}, {16, 2}}};

inline std::span<const BlobCenter> canonical_centers(ClassLabel c) {
  const auto [first, count] = kClassBlobs[static_cast<std::size_t>(c)];
  return std::span<const BlobCenter>(kBlobTable).subspan(first, count);
}

/// Canonical center rounded to the nearest voxel of `dims`.
inline std::array<std::uint32_t, 3> center_voxel(const BlobCenter& b, Dims dims) {
  auto place = [](double u, std::uint32_t n) {
    return static_cast<std::uint32_t>(std::lround(u * (n - 1)));
  };
  return {place(b.x, dims.x), place(b.y, dims.y), place(b.z, dims.z)};
}

struct GeneratorOptions {
  Dims dims = kDefaultDims;
  double noise_sigma = 0.1;
  double amplitude_min = 0.6;
  double amplitude_max = 1.0;
  double sigma_min = 6.0;  // voxels
  double sigma_max = 9.0;
  int jitter = 2;          // max |offset| per axis for Unhealthy
  double threshold = kThresholdedVariantCutoff;
};

/// Lesion derived from a sample seed; the center lies inside the volume.
inline Lesion make_lesion(std::uint64_t seed, Dims dims = kDefaultDims) {
  Rng rng(mix_seed(seed, 0x1E5105ULL));
  Lesion l;
  l.radius = 3 + static_cast<std::uint32_t>(uniform_index(rng, 4));
  l.center = {static_cast<std::uint32_t>(uniform_index(rng, dims.x)),
              static_cast<std::uint32_t>(uniform_index(rng, dims.y)),
              static_cast<std::uint32_t>(uniform_index(rng, dims.z))};
  return l;
}

inline Sample synth_generate(ClassLabel label, const Domain& domain,
                             Variant variant, std::uint64_t seed,
                             const GeneratorOptions& opt = {}) {
  const Dims d = opt.dims;
  if (!domain.is_healthy() && !domain.lesion) {
    throw ParameterError("unhealthy domain requires a lesion descriptor");
  }
  Rng rng(mix_seed(seed, 16 * static_cast<std::uint64_t>(label) +
                             static_cast<std::uint64_t>(domain.kind)));

  struct Blob {
    double cx, cy, cz, amp, inv2s2;
  };
  std::vector<Blob> blobs;
  for (const auto& c : canonical_centers(label)) {
    Blob b{c.x * (d.x - 1), c.y * (d.y - 1), c.z * (d.z - 1), 0, 0};
    b.amp = uniform(rng, opt.amplitude_min, opt.amplitude_max);
    const double s = uniform(rng, opt.sigma_min, opt.sigma_max);
    b.inv2s2 = 1.0 / (2.0 * s * s);
    if (!domain.is_healthy()) {
      const auto span = static_cast<std::uint64_t>(2 * opt.jitter + 1);
      b.cx += double(uniform_index(rng, span)) - opt.jitter;
      b.cy += double(uniform_index(rng, span)) - opt.jitter;
      b.cz += double(uniform_index(rng, span)) - opt.jitter;
    }
    blobs.push_back(b);
  }

  Volume v(d);
  for (std::uint32_t z = 0; z < d.z; ++z) {
    for (std::uint32_t y = 0; y < d.y; ++y) {
      for (std::uint32_t x = 0; x < d.x; ++x) {
        double s = 0.0;
        for (const auto& b : blobs) {
          const double dx = x - b.cx, dy = y - b.cy, dz = z - b.cz;
          s += b.amp * std::exp(-(dx * dx + dy * dy + dz * dz) * b.inv2s2);
        }
        if (opt.noise_sigma > 0.0) s += opt.noise_sigma * normal(rng);
        v(x, y, z) = static_cast<float>(std::clamp(s, 0.0, 1.0));
      }
    }
  }
  if (domain.lesion) {
    const Lesion& l = *domain.lesion;
    for (std::uint32_t z = 0; z < d.z; ++z)
      for (std::uint32_t y = 0; y < d.y; ++y)
        for (std::uint32_t x = 0; x < d.x; ++x)
          if (l.contains(x, y, z)) v(x, y, z) = 0.0f;
  }
  v = normalize_intensity(v);
  if (variant == Variant::Thresholded) v = threshold_volume(v, opt.threshold);
  return Sample{std::move(v), label, domain, variant, seed};
}

struct DatasetOptions {
  int n_per_class_per_domain = 10;
  std::uint64_t seed = 0;
  bool healthy = true;
  bool unhealthy = true;
  Variant variant = Variant::Full;
  GeneratorOptions generator;
};

/// Seed of the sample at position (domain, class, replicate). The counter is
/// i = (domain * 7 + class) * n + replicate with domain 0 = healthy and
/// 1 = unhealthy, independent of which domains are requested, and the sample
/// seed is splitmix64(master_seed + i).
inline std::uint64_t sample_seed(std::uint64_t master_seed, int domain, int cls,
                                 int replicate, int n) {
  const auto i = static_cast<std::uint64_t>((domain * kNumClasses + cls) * n +
                                            replicate);
  return splitmix64(master_seed + i);
}

/// Balanced dataset ordered by domain (healthy first), class, replicate.
inline std::vector<Sample> make_dataset(const DatasetOptions& opt) {
  if (opt.n_per_class_per_domain < 1) {
    throw ParameterError("make_dataset: n must be >= 1");
  }
  const int n = opt.n_per_class_per_domain;
  std::vector<Sample> out;
  for (int dom = 0; dom < 2; ++dom) {
    if ((dom == 0 && !opt.healthy) || (dom == 1 && !opt.unhealthy)) continue;
    for (int c = 0; c < kNumClasses; ++c) {
      for (int r = 0; r < n; ++r) {
        const auto s = sample_seed(opt.seed, dom, c, r, n);
        const Domain domain = dom == 0
                                  ? Domain::healthy()
                                  : Domain::unhealthy(make_lesion(s, opt.generator.dims));
        out.push_back(synth_generate(class_from_index(c), domain, opt.variant, s,
                                     opt.generator));
      }
    }
  }
  return out;
}

}  // namespace vgc
