#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgc/graph.hpp"
#include "vgc/neural/model_spec.hpp"
#include "vgc/neural/network.hpp"
#include "vgc/reduction.hpp"
#include "vgc/slic.hpp"
#include "vgc/synth.hpp"

namespace vgc {

/// Model input derived from a volume.
enum class InputVariant : std::uint8_t {
  Gray3D,
  Binary3D,
  Gray2D,       // mean projection along z
  Binary2D,     // axial OR projection of the binarized volume
  Sca,          // sagittal/coronal/axial OR projections as 3 channels
  Superpixels,  // per-slice 2D SLIC, every pixel replaced by its segment mean
  Supervoxels,  // 3D SLIC, every voxel replaced by its segment mean
  Graph,        // region graph over 3D supervoxels
};

inline constexpr std::array<std::string_view, 8> kVariantNames = {
    "3d-gray", "3d-binary", "2d-gray", "2d-binary", "sca", "superpixels", "supervoxels", "graph"};

inline constexpr std::array<std::string_view, 8> kVariantTitles = {
    "3D gray level",   "3D binary",          "2D gray level",       "2D binary",
    "SCA (binary)",    "Superpixels image",  "Supervoxels image",   "Graph"};

inline std::string_view name(InputVariant v) { return kVariantNames[static_cast<int>(v)]; }
inline std::string_view title(InputVariant v) { return kVariantTitles[static_cast<int>(v)]; }

inline InputVariant input_variant_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == s) return static_cast<InputVariant>(i);
  }
  throw ParameterError("unknown input variant: " + std::string(s));
}

struct VariantOptions {
  double binarize_threshold = kDefaultBinarizeThreshold;
  SlicConfig slic_2d = default_slic_2d();
  EncodeConfig graph = default_encode_3d();
};

/// Applies 2D SLIC to every z slice independently.
inline Volume superpixel_image(const Volume& v, const SlicConfig& cfg) {
  const Dims d = v.dims();
  const std::size_t plane = std::size_t{d.x} * d.y;
  Volume out(d);
  for (std::uint32_t z = 0; z < d.z; ++z) {
    std::vector<float> slice(v.values().begin() + z * plane,
                             v.values().begin() + (z + 1) * plane);
    const Image2D img(Dims{d.x, d.y, 1}, std::move(slice));
    const auto smooth = smooth_by_segment(img, slic(img, cfg));
    std::copy(smooth.values().begin(), smooth.values().end(), out.values().begin() + z * plane);
  }
  return out;
}

inline Volume supervoxel_image(const Volume& v, const SlicConfig& cfg) {
  return smooth_by_segment(v, slic(v, cfg));
}

template <class G>
Grid<float> to_float(const G& g) {
  Grid<float> out(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<float>(g[i]);
  return out;
}

inline nn::Input make_input(const Sample& s, InputVariant variant,
                            const VariantOptions& opt = {}) {
  const Volume& v = s.volume;
  switch (variant) {
    case InputVariant::Gray3D: return nn::to_tensor(v);
    case InputVariant::Binary3D: return nn::to_tensor(binarize(v, opt.binarize_threshold));
    case InputVariant::Gray2D: return nn::to_tensor(mean_project(v));
    case InputVariant::Binary2D:
      return nn::to_tensor(or_project(binarize(v, opt.binarize_threshold), Plane::Axial));
    case InputVariant::Sca:
      return nn::to_tensor(sca_stack(binarize(v, opt.binarize_threshold)).to_grid(), 3);
    case InputVariant::Superpixels: return nn::to_tensor(superpixel_image(v, opt.slic_2d));
    case InputVariant::Supervoxels: return nn::to_tensor(supervoxel_image(v, opt.graph.slic));
    case InputVariant::Graph: return encode_graph(s, opt.graph);
  }
  throw ParameterError("make_input: bad variant");
}

inline std::vector<nn::Example> make_examples(std::span<const Sample> samples,
                                              InputVariant variant,
                                              const VariantOptions& opt = {}) {
  std::vector<nn::Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({make_input(s, variant, opt), static_cast<std::uint8_t>(s.label)});
  }
  return out;
}

/// Default architecture for the given variant and volume dims.
inline nn::ModelSpec default_spec_for(InputVariant variant, Dims volume_dims = kDefaultDims) {
  const std::string n = "cnn-" + std::string(name(variant));
  switch (variant) {
    case InputVariant::Gray3D:
    case InputVariant::Binary3D:
    case InputVariant::Superpixels:
    case InputVariant::Supervoxels: return nn::default_cnn_spec(volume_dims, 1, n);
    case InputVariant::Gray2D:
    case InputVariant::Binary2D:
      return nn::default_cnn_spec(Dims{volume_dims.x, volume_dims.y, 1}, 1, n);
    case InputVariant::Sca: {
      const Dims d = volume_dims;
      return nn::default_cnn_spec(Dims{std::max(d.x, d.y), std::max(d.y, d.z), 1}, 3, n);
    }
    case InputVariant::Graph:
      return volume_dims.is_2d() ? nn::default_gnn_spec(4, 2) : nn::default_gnn_spec(5, 3);
  }
  throw ParameterError("default_spec_for: bad variant");
}

}  // namespace vgc
