#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "vgc/error.hpp"
#include "vgc/grid.hpp"

namespace vgc {

inline constexpr int kNumClasses = 7;

/// Functional network label, stored as index 0..6.
enum class ClassLabel : std::uint8_t { DMN, LANG, rFPCN, lFPCN, SAL, DAN, VAN };

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "DMN", "LANG", "rFPCN", "lFPCN", "SAL", "DAN", "VAN"};

inline std::string_view name(ClassLabel c) {
  return kClassNames[static_cast<std::size_t>(c)];
}

inline ClassLabel class_from_index(int i) {
  if (i < 0 || i >= kNumClasses) {
    throw ParameterError("class index out of range: " + std::to_string(i));
  }
  return static_cast<ClassLabel>(i);
}

inline ClassLabel class_from_name(std::string_view s) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == s) return static_cast<ClassLabel>(i);
  }
  throw ParameterError("unknown class label: " + std::string(s));
}

struct Lesion {
  std::array<std::uint32_t, 3> center{};
  std::uint32_t radius = 0;

  [[nodiscard]] bool contains(std::uint32_t x, std::uint32_t y,
                              std::uint32_t z) const {
    const double dx = double(x) - center[0];
    const double dy = double(y) - center[1];
    const double dz = double(z) - center[2];
    return dx * dx + dy * dy + dz * dz <= double(radius) * radius;
  }
  friend bool operator==(const Lesion&, const Lesion&) = default;
};

/// Healthy, or Unhealthy with a spherical lesion.
struct Domain {
  enum class Kind : std::uint8_t { Healthy, Unhealthy };
  Kind kind = Kind::Healthy;
  std::optional<Lesion> lesion;

  static Domain healthy() { return {}; }
  static Domain unhealthy(Lesion l) { return {Kind::Unhealthy, l}; }
  [[nodiscard]] bool is_healthy() const { return kind == Kind::Healthy; }
  friend bool operator==(const Domain&, const Domain&) = default;
};

inline std::string_view name(Domain::Kind k) {
  return k == Domain::Kind::Healthy ? "healthy" : "unhealthy";
}

enum class Variant : std::uint8_t { Full, Thresholded };

inline std::string_view name(Variant v) {
  return v == Variant::Full ? "full" : "thresholded";
}

inline Variant variant_from_name(std::string_view s) {
  if (s == "full") return Variant::Full;
  if (s == "thresholded") return Variant::Thresholded;
  throw ParameterError("unknown variant: " + std::string(s));
}

struct Sample {
  Volume volume;
  ClassLabel label = ClassLabel::DMN;
  Domain domain;
  Variant variant = Variant::Full;
  std::uint64_t seed = 0;
};

/// Min-max map to [0, 1]. A constant grid maps to all zeros.
template <class T>
Grid<T> normalize_intensity(const Grid<T>& v) {
  if (v.empty()) throw ParameterError("normalize_intensity: empty volume");
  const auto [lo_it, hi_it] = std::minmax_element(v.values().begin(),
                                                  v.values().end());
  const T lo = *lo_it;
  const T hi = *hi_it;
  Grid<T> out(v.dims(), T{0});
  if (!(hi > lo)) return out;
  const T range = hi - lo;
  auto src = v.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / range;
  return out;
}

/// Keeps values >= t, zeroes the rest. Requires 0 < t <= 1.
template <class T>
Grid<T> threshold_volume(const Grid<T>& v, double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw ParameterError("threshold must lie in (0, 1], got " +
                         std::to_string(t));
  }
  Grid<T> out = v;
  for (auto& x : out.values()) {
    if (!(double(x) >= t)) x = T{0};
  }
  return out;
}

}  // namespace vgc
