#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "vgc/grid.hpp"
#include "vgc/io.hpp"

namespace vgc {

enum class Plane : std::uint8_t { Sagittal, Coronal, Axial };

inline constexpr double kDefaultBinarizeThreshold = 0.25;

/// 1 where v >= t, else 0. Requires 0 < t < 1.
inline BinaryVolume binarize(const Volume& v, double t = kDefaultBinarizeThreshold) {
  if (!(t > 0.0 && t < 1.0)) {
    throw ParameterError("binarize threshold must lie in (0, 1), got " +
                         std::to_string(t));
  }
  BinaryVolume out(v.dims(), 0);
  auto src = v.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = double(src[i]) >= t ? 1 : 0;
  return out;
}

/// Mean over the axial axis: out(x, y) = mean_z v(x, y, z).
inline Image2D mean_project(const Volume& v) {
  const Dims d = v.dims();
  std::vector<double> acc(std::size_t{d.x} * d.y, 0.0);
  for (std::uint32_t z = 0; z < d.z; ++z) {
    const float* slice = v.values().data() + std::size_t{z} * d.x * d.y;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += slice[i];
  }
  Image2D out(Dims{d.x, d.y, 1});
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = static_cast<float>(acc[i] / d.z);
  }
  return out;
}

/// Output dims of or_project for each plane:
/// axial -> (X, Y), coronal -> (X, Z), sagittal -> (Y, Z).
inline Dims projected_dims(Dims d, Plane p) {
  switch (p) {
    case Plane::Axial: return {d.x, d.y, 1};
    case Plane::Coronal: return {d.x, d.z, 1};
    case Plane::Sagittal: return {d.y, d.z, 1};
  }
  return {};
}

/// Logical OR collapsing the axis perpendicular to `plane`.
inline BinaryImage2D or_project(const BinaryVolume& b, Plane plane) {
  const Dims d = b.dims();
  BinaryImage2D out(projected_dims(d, plane), 0);
  for (std::uint32_t z = 0; z < d.z; ++z) {
    for (std::uint32_t y = 0; y < d.y; ++y) {
      for (std::uint32_t x = 0; x < d.x; ++x) {
        if (!b(x, y, z)) continue;
        switch (plane) {
          case Plane::Axial: out(x, y) = 1; break;
          case Plane::Coronal: out(x, z) = 1; break;
          case Plane::Sagittal: out(y, z) = 1; break;
        }
      }
    }
  }
  return out;
}

/// Nearest-neighbour source index for destination index i when resampling
/// an axis of length src onto length dst.
inline std::uint32_t nearest_source(std::uint32_t i, std::uint32_t src,
                                    std::uint32_t dst) {
  const auto s = static_cast<std::uint64_t>(i) * src / dst;
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(s, src - 1));
}

template <class T>
Grid<T> resample_nearest(const Grid<T>& img, std::uint32_t w, std::uint32_t h) {
  const Dims d = img.dims();
  Grid<T> out(Dims{w, h, 1});
  for (std::uint32_t y = 0; y < h; ++y) {
    const auto sy = nearest_source(y, d.y, h);
    for (std::uint32_t x = 0; x < w; ++x) {
      out(x, y) = img(nearest_source(x, d.x, w), sy);
    }
  }
  return out;
}

/// Sagittal, coronal and axial OR projections resampled to a common size.
struct ScaStack {
  std::array<BinaryImage2D, 3> channels;  // S, C, A

  [[nodiscard]] Dims channel_dims() const { return channels[0].dims(); }

  /// Channels stacked along z: dims (W, H, 3).
  [[nodiscard]] BinaryVolume to_grid() const {
    const Dims c = channel_dims();
    BinaryVolume g(Dims{c.x, c.y, 3});
    for (std::uint32_t k = 0; k < 3; ++k) {
      std::copy(channels[k].values().begin(), channels[k].values().end(),
                g.values().begin() + std::size_t{k} * c.x * c.y);
    }
    return g;
  }

  static ScaStack from_grid(const BinaryVolume& g) {
    if (g.dims().z != 3) throw ParameterError("SCA stack requires 3 channels");
    ScaStack s;
    const Dims c{g.dims().x, g.dims().y, 1};
    for (std::uint32_t k = 0; k < 3; ++k) {
      std::vector<std::uint8_t> data(
          g.values().begin() + std::size_t{k} * c.x * c.y,
          g.values().begin() + std::size_t{k + 1} * c.x * c.y);
      s.channels[k] = BinaryImage2D(c, std::move(data));
    }
    return s;
  }

  friend bool operator==(const ScaStack&, const ScaStack&) = default;
};

inline ScaStack sca_stack(const BinaryVolume& b) {
  const Dims d = b.dims();
  const std::uint32_t w = std::max(d.x, d.y);
  const std::uint32_t h = std::max(d.y, d.z);
  ScaStack s;
  const std::array<Plane, 3> order = {Plane::Sagittal, Plane::Coronal, Plane::Axial};
  for (int k = 0; k < 3; ++k) {
    s.channels[k] = resample_nearest(or_project(b, order[k]), w, h);
  }
  return s;
}

inline void write_sca_stack(const ScaStack& s, const std::filesystem::path& path) {
  write_grid(s.to_grid(), path, kFlagChannelStack);
}

inline ScaStack read_sca_stack(const std::filesystem::path& path) {
  std::uint8_t flags = 0;
  auto g = read_grid<std::uint8_t>(path, &flags);
  if (!(flags & kFlagChannelStack)) {
    throw FormatError(path.string() + ": not flagged as a channel stack");
  }
  return ScaStack::from_grid(g);
}

}  // namespace vgc
