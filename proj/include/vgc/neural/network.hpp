#pragma once

// Sequential network over a ModelSpec with a flat parameter array.
//
// VGNN checkpoint: "VGNN" | u32 version (1) | u32 spec length | spec JSON
// bytes | u64 parameter count | f32 parameters. Little-endian.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vgc/binary.hpp"
#include "vgc/graph.hpp"
#include "vgc/neural/layers.hpp"
#include "vgc/neural/model_spec.hpp"
#include "vgc/rng.hpp"

namespace vgc::nn {

/// Dense multi-channel grid input, layout ((c * Z + z) * Y + y) * X + x.
struct GridTensor {
  std::uint32_t channels = 1;
  Dims dims{};
  std::vector<float> data;
  friend bool operator==(const GridTensor&, const GridTensor&) = default;
};

template <class G>
GridTensor to_tensor(const G& grid, std::uint32_t channels = 1) {
  const Dims d = grid.dims();
  if (d.z % channels != 0) throw ParameterError("to_tensor: z not divisible by channels");
  GridTensor t;
  t.channels = channels;
  t.dims = {d.x, d.y, d.z / channels};
  t.data.reserve(grid.size());
  for (auto v : grid.values()) t.data.push_back(static_cast<float>(v));
  return t;
}

using Input = std::variant<GridTensor, RegionGraph>;

struct Example {
  Input input;
  std::uint8_t label = 0;
};

namespace detail {
struct Counter {
  std::atomic<std::size_t> value{0};
  Counter() = default;
  Counter(const Counter& o) : value(o.value.load()) {}
  Counter& operator=(const Counter& o) {
    value = o.value.load();
    return *this;
  }
};
}  // namespace detail

template <class T>
struct Trace {
  std::vector<std::vector<T>> act;  // act[0] input, act[l + 1] output of layer l
  std::vector<std::vector<std::uint32_t>> argmax;
  std::vector<std::vector<T>> agg;
  std::vector<std::vector<std::uint8_t>> touched;
  std::vector<std::shared_ptr<const SplineTopology<T>>> topo;
  std::uint32_t nodes = 0;
};

template <class T>
class Network {
 public:
  struct ParamTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  explicit Network(ModelSpec spec)
      : spec_(std::move(spec)), shapes_(infer_shapes(spec_)) {
    std::size_t off = 0;
    layer_offset_.resize(spec_.layers.size());
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
      layer_offset_[l] = off;
      const auto& ls = spec_.layers[l];
      const std::string base = "layer" + std::to_string(l) + ".";
      auto add = [&](const std::string& n, std::vector<std::size_t> shape) {
        std::size_t sz = 1;
        for (auto s : shape) sz *= s;
        tensors_.push_back({base + n, std::move(shape), off, sz});
        off += sz;
      };
      switch (ls.type) {
        case LayerType::Dense:
          add("weight", {ls.out, ls.in});
          add("bias", {ls.out});
          break;
        case LayerType::Conv2d:
        case LayerType::Conv3d: {
          std::vector<std::size_t> shape{ls.out, ls.in};
          for (auto it = ls.kernel.rbegin(); it != ls.kernel.rend(); ++it) shape.push_back(*it);
          add("weight", shape);
          add("bias", {ls.out});
          break;
        }
        case LayerType::SplineConv:
          add("weight", {kernel_product(ls), ls.in, ls.out});
          add("root", {ls.in, ls.out});
          add("bias", {ls.out});
          break;
        default: break;
      }
    }
    params_.assign(off, T(0));
  }

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const std::vector<Shape>& shapes() const { return shapes_; }
  [[nodiscard]] const std::vector<ParamTensor>& tensors() const { return tensors_; }
  [[nodiscard]] std::size_t num_params() const { return params_.size(); }
  [[nodiscard]] std::span<T> params() { return params_; }
  [[nodiscard]] std::span<const T> params() const { return params_; }
  /// Pseudo-coordinates clamped into [0, 1] since construction.
  [[nodiscard]] std::size_t clamped_pseudo() const { return clamped_.value.load(); }

  /// Uniform init: bound sqrt(6 / fan_in) before rectifying activations,
  /// sqrt(6 / (fan_in + fan_out)) otherwise. Biases start at zero.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
      const auto& ls = spec_.layers[l];
      double fan_in = 0, fan_out = 0;
      std::size_t count = 0;
      switch (ls.type) {
        case LayerType::Dense:
          fan_in = ls.in;
          fan_out = ls.out;
          count = std::size_t{ls.in} * ls.out;
          break;
        case LayerType::Conv2d:
        case LayerType::Conv3d:
          fan_in = double(ls.in) * kernel_product(ls);
          fan_out = double(ls.out) * kernel_product(ls);
          count = std::size_t{ls.in} * ls.out * kernel_product(ls);
          break;
        case LayerType::SplineConv:
          // Messages are convex mixes of kernels averaged over neighbours,
          // so the effective fan-in is cin for the neighbour term plus cin
          // for the root term.
          fan_in = 2.0 * ls.in;
          fan_out = ls.out;
          count = std::size_t{ls.in} * ls.out * (kernel_product(ls) + 1);
          break;
        default: continue;
      }
      const double bound = ls.activation == Activation::None
                               ? std::sqrt(6.0 / (fan_in + fan_out))
                               : std::sqrt(6.0 / fan_in);
      T* p = params_.data() + layer_offset_[l];
      for (std::size_t i = 0; i < count; ++i) p[i] = static_cast<T>(uniform(rng, -bound, bound));
      std::fill(p + count, p + count + ls.out, T(0));
    }
  }

  template <class U>
  [[nodiscard]] Network<U> cast() const {
    Network<U> n(spec_);
    auto dst = n.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return n;
  }

  /// Runs every layer except the final softmax; returns the logits.
  std::vector<T> forward(const Input& input, Trace<T>& tr) const {
    const std::size_t L = spec_.layers.size();
    tr.act.assign(L + 1, {});
    tr.argmax.assign(L, {});
    tr.agg.assign(L, {});
    tr.touched.assign(L, {});
    tr.topo.assign(L, nullptr);
    load_input(input, tr);
    const RegionGraph* graph = std::get_if<RegionGraph>(&input);
    std::map<std::vector<std::uint32_t>, std::shared_ptr<const SplineTopology<T>>> topo_cache;

    for (std::size_t l = 0; l + 1 < L; ++l) {
      const auto& ls = spec_.layers[l];
      const Shape& in_shape = shapes_[l];
      const Shape& out_shape = shapes_[l + 1];
      const T* p = params_.data() + layer_offset_[l];
      const auto& x = tr.act[l];
      auto& y = tr.act[l + 1];
      switch (ls.type) {
        case LayerType::Dense:
          y.resize(ls.out);
          dense_forward<T>(ls.in, ls.out, p, p + std::size_t{ls.in} * ls.out, x.data(),
                           y.data());
          break;
        case LayerType::Conv2d:
        case LayerType::Conv3d: {
          const ConvShape cs = conv_shape(ls, in_shape);
          y.resize(out_shape.flat());
          conv_forward<T>(cs, p, p + cs.weight_count(), x.data(), y.data());
          break;
        }
        case LayerType::MaxPool: {
          const PoolShape ps = pool_shape(ls, in_shape);
          y.resize(out_shape.flat());
          tr.argmax[l].resize(y.size());
          maxpool_forward<T>(ps, x.data(), y.data(), tr.argmax[l].data());
          break;
        }
        case LayerType::SplineConv: {
          auto& topo = topo_cache[ls.kernel];
          if (!topo) {
            std::vector<std::uint32_t> src, dst;
            src.reserve(graph->edges.size());
            dst.reserve(graph->edges.size());
            for (const auto& e : graph->edges) {
              src.push_back(e.src);
              dst.push_back(e.dst);
            }
            auto t = std::make_shared<SplineTopology<T>>(make_spline_topology<T>(
                tr.nodes, src, dst, graph->pseudo, graph->pseudo_dim, ls.kernel));
            clamped_.value += t->clamped;
            topo = std::move(t);
          }
          tr.topo[l] = topo;
          const std::size_t kernels = kernel_product(ls);
          const std::size_t wcount = kernels * ls.in * ls.out;
          y.resize(std::size_t{tr.nodes} * ls.out);
          spline_conv_forward<T>(ls.in, ls.out, kernels, p, p + wcount,
                                 p + wcount + std::size_t{ls.in} * ls.out, *topo,
                                 x.data(), y.data(), tr.agg[l], tr.touched[l]);
          break;
        }
        case LayerType::GlobalMeanPool:
          y.resize(in_shape.channels);
          global_mean_pool_forward<T>(tr.nodes, in_shape.channels, x.data(), y.data());
          break;
        case LayerType::Softmax: break;
      }
      activate_inplace(ls.activation, y.data(), y.size());
      if (!all_finite(y.data(), y.size())) {
        throw NumericError("non-finite activation at layer " + std::to_string(l) +
                           " (" + std::string(layer_type_name(ls.type)) + ")");
      }
    }
    return tr.act[L - 1];
  }

  std::vector<T> logits(const Input& input) const {
    Trace<T> tr;
    return forward(input, tr);
  }

  int predict(const Input& input) const {
    const auto z = logits(input);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }

  /// Backpropagates dlogits through the trace, adding into grad.
  void backward(const Trace<T>& tr, std::vector<T> g, std::span<T> grad) const {
    const std::size_t L = spec_.layers.size();
    for (std::size_t li = L - 1; li-- > 0;) {
      const auto& ls = spec_.layers[li];
      const Shape& in_shape = shapes_[li];
      activate_backward(ls.activation, tr.act[li + 1].data(), g.data(), g.size());
      const T* p = params_.data() + layer_offset_[li];
      T* gp = grad.data() + layer_offset_[li];
      const auto& x = tr.act[li];
      const bool need_dx = li > 0;
      std::vector<T> dx(need_dx ? x.size() : 0, T(0));
      T* dxp = need_dx ? dx.data() : nullptr;
      switch (ls.type) {
        case LayerType::Dense: {
          const std::size_t wc = std::size_t{ls.in} * ls.out;
          dense_backward<T>(ls.in, ls.out, p, x.data(), g.data(), gp, gp + wc, dxp);
          break;
        }
        case LayerType::Conv2d:
        case LayerType::Conv3d: {
          const ConvShape cs = conv_shape(ls, in_shape);
          conv_backward<T>(cs, p, x.data(), g.data(), gp, gp + cs.weight_count(), dxp);
          break;
        }
        case LayerType::MaxPool:
          if (need_dx) maxpool_backward<T>(g.size(), tr.argmax[li].data(), g.data(), dxp);
          break;
        case LayerType::SplineConv: {
          const std::size_t kernels = kernel_product(ls);
          const std::size_t wc = kernels * ls.in * ls.out;
          const std::size_t rc = std::size_t{ls.in} * ls.out;
          spline_conv_backward<T>(ls.in, ls.out, kernels, p, p + wc, *tr.topo[li],
                                  x.data(), tr.agg[li], tr.touched[li], g.data(), gp,
                                  gp + wc, gp + wc + rc, dxp);
          break;
        }
        case LayerType::GlobalMeanPool:
          if (need_dx) global_mean_pool_backward<T>(tr.nodes, in_shape.channels, g.data(), dxp);
          break;
        case LayerType::Softmax: break;
      }
      g = std::move(dx);
    }
  }

  /// Cross-entropy loss of one example; its parameter gradient is added to grad.
  T loss_and_gradient(const Input& input, std::size_t label, std::span<T> grad) const {
    if (grad.size() != params_.size()) throw ParameterError("gradient buffer size mismatch");
    Trace<T> tr;
    const auto z = forward(input, tr);
    auto ce = softmax_cross_entropy<T>(z, label);
    backward(tr, std::move(ce.grad), grad);
    return ce.loss;
  }

  T loss(const Input& input, std::size_t label) const {
    const auto z = logits(input);
    return softmax_cross_entropy<T>(z, label).loss;
  }

 private:
  void load_input(const Input& input, Trace<T>& tr) const {
    if (spec_.kind == ModelKind::CNN) {
      const auto* g = std::get_if<GridTensor>(&input);
      if (!g) throw ParameterError("CNN model '" + spec_.name + "' needs grid input");
      if (g->channels != spec_.input.channels || g->dims != spec_.input.dims) {
        throw ParameterError("input grid " + std::to_string(g->channels) + "x" +
                             to_string(g->dims) + " does not match model '" +
                             spec_.name + "' input " +
                             std::to_string(spec_.input.channels) + "x" +
                             to_string(spec_.input.dims));
      }
      tr.act[0].assign(g->data.begin(), g->data.end());
    } else {
      const auto* g = std::get_if<RegionGraph>(&input);
      if (!g) throw ParameterError("GNN model '" + spec_.name + "' needs graph input");
      if (g->feature_dim != spec_.input.node_features ||
          g->pseudo_dim != spec_.input.pseudo_dim) {
        throw ParameterError("graph feature/pseudo dims do not match model '" +
                             spec_.name + "'");
      }
      if (g->num_nodes == 0) throw StructuralError("empty graph");
      tr.nodes = g->num_nodes;
      tr.act[0].assign(g->features.begin(), g->features.end());
      const auto& in = spec_.input;
      if (in.standardize) {
        if (!in.fitted()) {
          throw ParameterError("model '" + spec_.name + "': input statistics not fitted");
        }
        const std::size_t F = in.node_features;
        for (std::size_t i = 0; i < tr.act[0].size(); ++i) {
          tr.act[0][i] = (tr.act[0][i] - T(in.feature_mean[i % F])) * T(in.feature_scale[i % F]);
        }
      }
    }
  }

  ModelSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> layer_offset_;
  std::vector<ParamTensor> tensors_;
  std::vector<T> params_;
  mutable detail::Counter clamped_;
};

// ---------------------------------------------------------------- checkpoints

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::vector<char> encode_checkpoint(const Network<float>& net) {
  vgc::detail::ByteWriter w;
  w.bytes("VGNN");
  w.u32(kCheckpointVersion);
  const std::string spec = to_json(net.spec()).dump();
  w.u32(static_cast<std::uint32_t>(spec.size()));
  w.bytes(spec);
  w.u64(net.num_params());
  for (float v : net.params()) w.f32(v);
  return w.buffer();
}

inline Network<float> decode_checkpoint(vgc::detail::ByteReader& r) {
  if (r.bytes(4, "magic") != "VGNN") r.fail("bad magic (expected VGNN)", 0);
  const std::size_t ver_at = r.offset();
  const auto ver = r.u32("version");
  if (ver != kCheckpointVersion) r.fail("unsupported version " + std::to_string(ver), ver_at);
  const auto len = r.u32("spec length");
  const std::size_t spec_at = r.offset();
  const std::string text = r.bytes(len, "spec");
  ModelSpec spec;
  try {
    spec = model_spec_from_json(nlohmann::json::parse(text));
  } catch (const std::exception& e) {
    r.fail(std::string("invalid spec: ") + e.what(), spec_at);
  }
  Network<float> net(spec);
  const std::size_t count_at = r.offset();
  const auto count = r.u64("parameter count");
  if (count != net.num_params()) {
    r.fail("parameter count " + std::to_string(count) + " does not match spec (" +
               std::to_string(net.num_params()) + ")",
           count_at);
  }
  r.require(count * 4, "parameters");
  for (auto& v : net.params()) v = r.f32("parameters");
  if (!r.at_end()) r.fail("trailing bytes after parameters", r.offset());
  return net;
}

inline void write_checkpoint(const Network<float>& net, const std::filesystem::path& path) {
  vgc::detail::ByteWriter w;
  const auto bytes = encode_checkpoint(net);
  w.bytes(std::string_view(bytes.data(), bytes.size()));
  w.save(path);
}

inline Network<float> read_checkpoint(const std::filesystem::path& path) {
  auto r = vgc::detail::ByteReader::from_file(path);
  return decode_checkpoint(r);
}

}  // namespace vgc::nn
