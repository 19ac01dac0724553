// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   acceptance            run everything
//   acceptance 3 5        run only the listed criteria

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace vgc;
using namespace vgc::nn;
namespace fs = std::filesystem;

namespace {

// Collects failed expectations; the first few are printed under the verdict.
struct Check {
  std::vector<std::string> failures;
  std::string summary;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

ExperimentConfig shipped(const char* name) {
  return read_experiment_config(fs::path(VGC_SOURCE_DIR) / "configs" / name);
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

std::string fixed(double x, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(1) << x;
  return s.str();
}

// ---------------------------------------------------------------- AC1

ModelSpec random_cnn(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> ch(1, 4), ks(1, 3), sz(5, 9);
  const bool two = rng() % 2 == 0;
  ModelSpec s;
  s.name = "random-cnn";
  s.kind = ModelKind::CNN;
  s.input.channels = ch(rng);
  s.input.dims = {sz(rng), sz(rng), two ? 1u : sz(rng)};
  Shape cur{Shape::Kind::Grid, s.input.channels,
            {s.input.dims.x, s.input.dims.y, s.input.dims.z}};
  auto kernel = [&] {
    std::vector<std::uint32_t> k{ks(rng), ks(rng)};
    if (!two) k.push_back(ks(rng));
    return k;
  };
  const auto conv = two ? LayerType::Conv2d : LayerType::Conv3d;
  s.layers.push_back({conv, cur.channels, ch(rng), kernel(), Activation::Relu});
  cur.dims = conv_shape(s.layers.back(), cur).out();
  cur.channels = s.layers.back().out;
  s.layers.push_back({LayerType::MaxPool, 0, 0, two ? std::vector<std::uint32_t>{2, 2}
                                                    : std::vector<std::uint32_t>{2, 2, 1},
                      Activation::None});
  cur.dims = pool_shape(s.layers.back(), cur).out();
  s.layers.push_back({conv, cur.channels, ch(rng), two ? std::vector<std::uint32_t>{1, 2}
                                                       : std::vector<std::uint32_t>{1, 2, 1},
                      Activation::Elu});
  cur.dims = conv_shape(s.layers.back(), cur).out();
  cur.channels = s.layers.back().out;
  const std::uint32_t hidden = 3 + ch(rng);
  s.layers.push_back({LayerType::Dense, std::uint32_t(cur.flat()), hidden, {}, Activation::Relu});
  s.layers.push_back({LayerType::Dense, hidden, kNumClasses, {}, Activation::None});
  s.layers.push_back({LayerType::Softmax, 0, 0, {}, Activation::None});
  return s;
}

ModelSpec random_gnn(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> ch(1, 9), ks(1, 5), pd(1, 3);
  ModelSpec s;
  s.name = "random-gnn";
  s.kind = ModelKind::GNN;
  s.input.node_features = ch(rng);
  s.input.pseudo_dim = pd(rng);
  std::uint32_t c = s.input.node_features;
  for (int l = 0; l < 2; ++l) {
    std::vector<std::uint32_t> k;
    for (std::uint32_t a = 0; a < s.input.pseudo_dim; ++a) k.push_back(ks(rng));
    const std::uint32_t out = ch(rng);
    s.layers.push_back({LayerType::SplineConv, c, out, k, Activation::Elu});
    c = out;
  }
  s.layers.push_back({LayerType::GlobalMeanPool, 0, 0, {}, Activation::None});
  s.layers.push_back({LayerType::Dense, c, kNumClasses, {}, Activation::None});
  s.layers.push_back({LayerType::Softmax, 0, 0, {}, Activation::None});
  return s;
}

// Walks every element of every materialized tensor through its full index
// tuple and counts it once.
std::uint64_t enumerate(const Network<float>& net, std::vector<std::uint64_t>& per_layer) {
  std::uint64_t total = 0;
  for (const auto& t : net.tensors()) {
    const auto layer = std::stoul(t.name.substr(5, t.name.find('.') - 5));
    std::vector<std::size_t> idx(t.shape.size(), 0);
    std::uint64_t n = 0;
    while (true) {
      ++n;
      std::size_t a = idx.size();
      while (a > 0 && ++idx[a - 1] == t.shape[a - 1]) idx[--a] = 0;
      if (a == 0) break;
    }
    per_layer[layer] += n;
    total += n;
  }
  return total;
}

void ac1(Check& c) {
  std::mt19937_64 rng(101);
  std::vector<ModelSpec> specs;
  for (int i = 0; i < 12; ++i) specs.push_back(random_cnn(rng));
  for (int i = 0; i < 12; ++i) specs.push_back(random_gnn(rng));
  for (const char* f : {"default_cnn.json", "default_gnn.json", "transfer_gnn.json"}) {
    specs.push_back(shipped(f).model_spec());
  }
  for (std::size_t v = 0; v < kVariantNames.size(); ++v) specs.push_back(default_spec_for(InputVariant(v)));
  for (const auto& s : specs) {
    const Network<float> net(s);
    std::vector<std::uint64_t> per(s.layers.size(), 0);
    const auto n = enumerate(net, per);
    const auto pc = param_count(s);
    c.expect(n == pc.total && per == pc.per_layer && n == net.num_params(),
             s.name + ": formula " + std::to_string(pc.total) + " vs enumerated " + std::to_string(n));
  }
  c.summary = std::to_string(specs.size()) + " specs (24 randomized)";
}

// ---------------------------------------------------------------- AC2

void ac2(Check& c) {
  const auto cnn = param_count(shipped("default_cnn.json").model_spec()).total;
  const auto gnn = param_count(shipped("default_gnn.json").model_spec()).total;
  const double f = double(cnn) / double(gnn);
  c.expect(f >= 20.0, "compression " + fixed(f, 2) + " < 20");
  c.summary = "CNN " + format_count(cnn) + " / GNN " + format_count(gnn) + " = " +
              format_compression(cnn, gnn);
}

// ---------------------------------------------------------------- AC3

// Central differences on up to 40 parameters; returns the worst relative
// error (scale floor 1e-3).
double fd_error(Network<double>& net, const Input& in, std::size_t label, std::mt19937_64& rng) {
  std::vector<double> grad(net.num_params(), 0.0);
  net.loss_and_gradient(in, label, grad);
  std::vector<std::size_t> idx(net.num_params());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (idx.size() > 40) idx.resize(40);
  const double eps = 1e-4;
  auto p = net.params();
  double worst = 0.0;
  for (std::size_t i : idx) {
    const double keep = p[i];
    p[i] = keep + eps;
    const double up = net.loss(in, label);
    p[i] = keep - eps;
    const double dn = net.loss(in, label);
    p[i] = keep;
    const double fd = (up - dn) / (2 * eps);
    const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return worst;
}

ModelSpec grid_model(std::uint32_t c, Dims d, std::vector<LayerSpec> body) {
  ModelSpec s;
  s.name = "probe";
  s.kind = ModelKind::CNN;
  s.input.channels = c;
  s.input.dims = d;
  s.layers = std::move(body);
  Shape cur{Shape::Kind::Grid, c, {d.x, d.y, d.z}};
  for (const auto& l : s.layers) {
    if (l.type == LayerType::MaxPool) {
      cur.dims = pool_shape(l, cur).out();
    } else {
      cur.dims = conv_shape(l, cur).out();
      cur.channels = l.out;
    }
  }
  s.layers.push_back({LayerType::Dense, std::uint32_t(cur.flat()), kNumClasses, {}, Activation::None});
  s.layers.push_back({LayerType::Softmax, 0, 0, {}, Activation::None});
  return s;
}

void ac3(Check& c) {
  std::mt19937_64 rng(303);
  const int trials = 20;
  std::map<std::string, double> worst;
  auto run = [&](const std::string& layer, Network<double>& net, const Input& in) {
    net.init(rng());
    const double e = fd_error(net, in, rng() % kNumClasses, rng);
    worst[layer] = std::max(worst[layer], e);
  };
  const auto acts = std::array{Activation::None, Activation::Elu, Activation::Relu};
  for (int t = 0; t < trials; ++t) {
    const auto act = acts[t % 3];
    {
      ModelSpec s;
      s.name = "dense";
      s.kind = ModelKind::CNN;
      s.input.dims = {6, 1, 1};
      s.layers = {{LayerType::Dense, 6, 5, {}, act},
                  {LayerType::Dense, 5, kNumClasses, {}, Activation::None},
                  {LayerType::Softmax, 0, 0, {}, Activation::None}};
      Network<double> net(s);
      run("dense", net, test::random_tensor(rng, 1, {6, 1, 1}));
    }
    {
      Network<double> net(grid_model(2, {5, 4, 1}, {{LayerType::Conv2d, 2, 3, {2, 3}, act}}));
      run("conv2d", net, test::random_tensor(rng, 2, {5, 4, 1}));
    }
    {
      Network<double> net(grid_model(2, {4, 4, 3}, {{LayerType::Conv3d, 2, 2, {2, 2, 2}, act}}));
      run("conv3d", net, test::random_tensor(rng, 2, {4, 4, 3}));
    }
    {
      Network<double> net(grid_model(1, {6, 5, 4}, {{LayerType::Conv3d, 1, 2, {2, 2, 2}, act},
                                                    {LayerType::MaxPool, 0, 0, {2, 2, 1}, Activation::None}}));
      run("maxpool", net, test::random_tensor(rng, 1, {6, 5, 4}));
    }
    {
      const std::uint32_t pdim = 1 + t % 3;
      ModelSpec s;
      s.name = "spline";
      s.kind = ModelKind::GNN;
      s.input.node_features = 3;
      s.input.pseudo_dim = pdim;
      s.layers = {{LayerType::SplineConv, 3, 4, std::vector<std::uint32_t>(pdim, 3), act},
                  {LayerType::GlobalMeanPool, 0, 0, {}, Activation::None},
                  {LayerType::Dense, 4, kNumClasses, {}, Activation::None},
                  {LayerType::Softmax, 0, 0, {}, Activation::None}};
      Network<double> net(s);
      const auto g = test::random_graph(rng, 6, 3, std::uint8_t(pdim));
      run("splineconv", net, g);
      run("globalpool", net, g);
    }
    {
      // Loss gradient with respect to the logits themselves.
      std::normal_distribution<double> n(0.0, 3.0);
      std::vector<double> z(kNumClasses);
      for (auto& x : z) x = n(rng);
      const std::size_t label = rng() % kNumClasses;
      const auto r = softmax_cross_entropy<double>(z, label);
      double e = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        auto zp = z, zm = z;
        zp[j] += 1e-5;
        zm[j] -= 1e-5;
        const double fd = (softmax_cross_entropy<double>(zp, label).loss -
                           softmax_cross_entropy<double>(zm, label).loss) / 2e-5;
        e = std::max(e, std::abs(fd - r.grad[j]) / std::max({std::abs(fd), std::abs(r.grad[j]), 1e-3}));
      }
      worst["softmax-ce"] = std::max(worst["softmax-ce"], e);
    }
  }
  std::string s;
  for (const auto& [k, v] : worst) {
    c.expect(v < 1e-4, k + " relative error " + std::to_string(v));
    s += k + " ";
  }
  c.summary = s + "x" + std::to_string(trials) + " trials, tol 1e-4";
}

// ---------------------------------------------------------------- AC4

void ac4(Check& c) {
  std::mt19937_64 rng(404);
  for (int t = 0; t < 50; ++t) {
    const Dims d = test::random_dims(rng, 6, 16);
    const auto v = test::blobby_volume(rng, d, 4);
    std::uniform_int_distribution<std::uint32_t> uk(2, std::max<std::uint32_t>(2, std::uint32_t(d.count() / 40)));
    SlicConfig cfg;
    cfg.target_segments = uk(rng);
    cfg.compactness = 0.3;
    const auto res = slic_trace(v, cfg);
    const auto k = cfg.target_segments;
    const std::string tag = "volume " + std::to_string(t) + " " + to_string(d) + " K=" + std::to_string(k);
    const auto s = segment_count(res.labels);
    std::vector<char> used(s, 0);
    for (auto x : res.labels.values()) used[x] = 1;
    c.expect(std::all_of(used.begin(), used.end(), [](char u) { return u; }), tag + ": coverage");
    for (int comps : test::components_per_label(res.labels)) {
      if (comps != 1) {
        c.expect(false, tag + ": disconnected segment");
        break;
      }
    }
    c.expect(2 * s >= k && s <= 2 * k, tag + ": " + std::to_string(s) + " segments");
    for (std::size_t i = 1; i < res.objective.size(); ++i) {
      c.expect(res.objective[i] <= res.objective[i - 1] * (1 + 1e-12), tag + ": objective rose");
    }
  }

  const Volume u(Dims{12, 12, 12}, 0.5f);
  SlicConfig cfg;
  cfg.target_segments = 8;
  cfg.perturb_seeds = false;
  const auto res = slic_trace(u, cfg);
  const auto oracle = test::lloyd_oracle(u, res.initial_centers, cfg.compactness, 8, cfg.iterations);
  LabelMap ol(u.dims());
  for (std::size_t i = 0; i < ol.size(); ++i) ol[i] = oracle[i];
  const auto got = test::centroids(res.labels), want = test::centroids(ol);
  double dev = 0.0;
  c.expect(got.size() == want.size(), "uniform cube segment count");
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i)
    for (int a = 0; a < 3; ++a) dev = std::max(dev, std::abs(got[i][a] - want[i][a]));
  c.expect(dev <= 1.0, "Lloyd centroid deviation " + fixed(dev));
  c.summary = "50 volumes; Lloyd max centroid deviation " + fixed(dev) + " voxel";
}

// ---------------------------------------------------------------- AC5

void ac5(Check& c) {
  std::mt19937_64 rng(505);
  for (int t = 0; t < 100; ++t) {
    const auto l = test::random_labels(rng, test::random_dims(rng, 1, 6), 5);
    c.expect(build_rag(l) == test::rag_oracle(l), "RAG mismatch on map " + std::to_string(t));
  }
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t n = 8 + t % 20, k = 1 + t % 6;
    std::vector<Point3> p(n);
    for (auto& q : p) q = {u(rng), u(rng), u(rng)};
    const auto e = knn_edges(p, k);
    std::vector<std::uint32_t> deg(n, 0);
    for (const auto& x : e) ++deg[x.dst];
    for (std::uint32_t i = 0; i < n; ++i) {
      c.expect(deg[i] == k, "k-NN degree of node " + std::to_string(i));
      std::vector<std::pair<double, std::uint32_t>> all;
      for (std::uint32_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = p[i][0] - p[j][0], dy = p[i][1] - p[j][1], dz = p[i][2] - p[j][2];
        all.push_back({std::sqrt(dx * dx + dy * dy + dz * dz), j});
      }
      std::sort(all.begin(), all.end());
      std::set<std::uint32_t> want, got;
      for (std::uint32_t r = 0; r < k; ++r) want.insert(all[r].second);
      for (const auto& x : e)
        if (x.dst == i) got.insert(x.src);
      c.expect(want == got, "k-NN neighbour set of node " + std::to_string(i));
    }
    std::vector<Edge> both;
    for (const auto& x : e) {
      both.push_back(x);
      both.push_back({x.dst, x.src});
    }
    const auto pc = edge_pseudo_coords(p, both, 3);
    for (float x : pc) c.expect(x >= 0.0f && x <= 1.0f, "pseudo-coordinate outside [0,1]");
    for (std::size_t i = 0; i < both.size(); i += 2)
      for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(pc[i * 3 + a] + pc[(i + 1) * 3 + a] - 1.0));
  }
  c.expect(worst <= 1e-6, "antisymmetric sum off by " + std::to_string(worst));
  c.summary = "100 RAG maps, 50 k-NN sets, max |u+u'-1| " + sci(worst);
}

// ---------------------------------------------------------------- AC6

void ac6(Check& c) {
  std::mt19937_64 rng(606);
  auto stats = [](const Grid<float>& g) {
    double m = 0.0, v = 0.0;
    for (float x : g.values()) m += x;
    m /= double(g.size());
    for (float x : g.values()) v += (x - m) * (x - m);
    return std::pair{m, v / double(g.size())};
  };
  double drift = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Dims d = test::random_dims(rng, 1, 8);
    const auto v = test::random_volume(rng, d);
    const auto l = enforce_connectivity(test::random_labels(rng, d, 6), 0.0);
    const auto once = smooth_by_segment(v, l);
    c.expect(smooth_by_segment(once, l) == once, "not idempotent on case " + std::to_string(t));
    const auto [m0, v0] = stats(v);
    const auto [m1, v1] = stats(once);
    drift = std::max(drift, std::abs(m1 - m0));
    c.expect(v1 <= v0 + 1e-12, "variance increased on case " + std::to_string(t));
  }
  c.expect(drift <= 1e-6, "mean drift " + std::to_string(drift));
  c.summary = "100 cases, max mean drift " + sci(drift);
}

// ---------------------------------------------------------------- AC7

struct Trained {
  std::string label;
  std::vector<double> acc;
  double seconds;
};

Trained train_variant(ExperimentConfig cfg, InputVariant input, const std::vector<Sample>& samples,
                      bool keep_model) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.input = input;
  if (!keep_model) cfg.model.reset();
  const auto ex = make_examples(samples, cfg.input, cfg.variants);
  const auto r = run_experiment(std::string(title(input)), cfg.model_spec(), ex, cfg.train,
                                cfg.seeds, cfg.split);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "    " << r.data << " (" << r.model << "): " << format_accuracy(r) << "  "
            << fixed(s, 1) << " s" << std::endl;
  return {r.data, r.accuracies, s};
}

void ac7(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cnn = shipped("default_cnn.json");
  const auto gnn = shipped("default_gnn.json");
  const auto samples = make_dataset(cnn.dataset);
  c.expect(samples.size() == 70, "data set has " + std::to_string(samples.size()) + " samples");
  c.expect(cnn.seeds.size() == 5 && gnn.seeds.size() == 5, "five seeds");

  const auto gray = train_variant(cnn, InputVariant::Gray3D, samples, true);
  const auto graph = train_variant(gnn, InputVariant::Graph, make_dataset(gnn.dataset), true);
  std::vector<Trained> reduced;
  for (auto v : {InputVariant::Binary3D, InputVariant::Gray2D, InputVariant::Binary2D}) {
    reduced.push_back(train_variant(cnn, v, samples, false));
  }
  const double g = mean(gray.acc), n = mean(graph.acc);
  c.expect(g >= 0.90, "3D gray mean " + fixed(g));
  c.expect(n >= 0.85, "GNN mean " + fixed(n));
  std::string rs;
  for (const auto& r : reduced) {
    const double m = mean(r.acc);
    c.expect(m <= g, r.label + " mean " + fixed(m) + " above 3D gray " + fixed(g));
    rs += ", " + r.label + " " + fixed(m);
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(s <= 600.0, "runtime " + fixed(s, 0) + " s");
  c.summary = "3D gray " + fixed(g) + ", GNN " + fixed(n) + rs + "; " + fixed(s, 0) + " s";
}

// ---------------------------------------------------------------- AC8

void ac8(Check& c) {
  const auto cfg = shipped("transfer_gnn.json");
  auto h = cfg.dataset, u = cfg.dataset;
  h.unhealthy = false;
  u.healthy = false;
  const auto he = make_examples(make_dataset(h), cfg.input, cfg.variants);
  const auto ue = make_examples(make_dataset(u), cfg.input, cfg.variants);
  const auto spec = cfg.model_spec();
  c.expect(cfg.seeds.size() == 5, "five seeds");
  const auto r = run_transfer("GNN", spec, he, ue, cfg.transfer, cfg.seeds);
  const double b = mean(r.brute.accuracies), p = mean(r.pretrained.accuracies);
  c.expect(p >= b, "pretrained " + fixed(p) + " < brute " + fixed(b));

  // No fine-tuning epochs: the pretrained arm must reproduce brute exactly.
  auto degenerate = cfg.transfer;
  degenerate.pretrain.epochs = 15;
  degenerate.finetune.epochs = 0;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto d = run_transfer("GNN", spec, he, ue, degenerate, seeds);
  c.expect(d.brute.accuracies == d.pretrained.accuracies, "0-epoch fine-tuning differs from brute");
  c.summary = "brute " + format_accuracy(r.brute) + ", pretrained " + format_accuracy(r.pretrained) +
              "; 0-epoch arm identical";
}

// ---------------------------------------------------------------- AC9

template <class T>
Grid<T> random_grid(std::mt19937_64& rng, Dims d) {
  Grid<T> g(d);
  for (auto& x : g.values()) {
    if constexpr (std::is_same_v<T, float>) {
      x = std::uniform_real_distribution<float>(0.0f, 1.0f)(rng);
    } else {
      x = static_cast<T>(rng());
    }
  }
  return g;
}

template <class T>
void grid_round_trip(Check& c, std::mt19937_64& rng, int t) {
  const auto dir = test::temp_path("acceptance");
  const auto g = random_grid<T>(rng, test::random_dims(rng, 1, 9));
  const auto a = dir / "a.vgr", b = dir / "b.vgr";
  write_grid(g, a);
  const auto back = read_grid<T>(a);
  write_grid(back, b);
  c.expect(back == g && slurp(a) == slurp(b), "VGR1 round trip " + std::to_string(t));
}

void ac9(Check& c) {
  std::mt19937_64 rng(909);
  const auto dir = test::temp_path("acceptance");
  fs::create_directories(dir);
  for (int t = 0; t < 20; ++t) {
    grid_round_trip<float>(c, rng, t);
    grid_round_trip<std::uint8_t>(c, rng, t);
    grid_round_trip<std::uint32_t>(c, rng, t);
  }
  for (int t = 0; t < 20; ++t) {
    GraphDataset ds;
    const std::uint8_t pdim = std::uint8_t(1 + t % 3);
    for (int i = 0; i < 1 + t % 4; ++i) {
      auto g = test::random_graph(rng, 2 + rng() % 10, 5, pdim);
      g.label = std::uint8_t(rng() % kNumClasses);
      ds.graphs.push_back(std::move(g));
      ds.provenance.sample_seeds.push_back(rng());
    }
    const auto a = dir / "a.vgp", b = dir / "b.vgp";
    write_graphs(ds, a);
    const auto back = read_graphs(a);
    write_graphs(back, b);
    c.expect(back == ds && slurp(a) == slurp(b), "VGPH round trip " + std::to_string(t));
  }
  for (int t = 0; t < 10; ++t) {
    Network<float> net(t % 2 ? random_cnn(rng) : random_gnn(rng));
    net.init(rng());
    const auto a = dir / "a.vgnn", b = dir / "b.vgnn";
    write_checkpoint(net, a);
    const auto back = read_checkpoint(a);
    write_checkpoint(back, b);
    const std::span<const float> p0 = net.params(), p1 = back.params();
    c.expect(back.spec() == net.spec() && std::equal(p0.begin(), p0.end(), p1.begin(), p1.end()) &&
                 slurp(a) == slurp(b),
             "VGNN round trip " + std::to_string(t));
  }
  for (int t = 0; t < 20; ++t) {
    std::vector<ExperimentRecord> recs;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1 + t % 4; ++i) {
      ExperimentRecord r{"row, \"" + std::to_string(t) + "\" " + std::to_string(i), "56-7",
                         i % 2 ? "GNN" : "CNN", rng() % 3000000, {}, {}, 0.0};
      for (int s = 0; s < (t + i) % 6; ++s) r.accuracies.push_back(u(rng));
      recs.push_back(r);
    }
    const auto rows = parse_csv(render_csv(recs));
    bool ok = rows.size() == recs.size();
    for (std::size_t i = 0; ok && i < rows.size(); ++i) ok = rows[i] == csv_row(recs[i]);
    c.expect(ok, "CSV round trip " + std::to_string(t));
  }
  c.summary = "60 grids, 20 graph files, 10 checkpoints, 20 CSV tables";
}

// ---------------------------------------------------------------- AC10

std::vector<char> pipeline(int workers, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cfg = shipped("default_gnn.json");
  cfg.dataset.n_per_class_per_domain = 3;
  cfg.dataset.generator.dims = {21, 25, 17};
  cfg.variants.graph.slic.target_segments = 40;
  cfg.train.epochs = 6;
  cfg.train.workers = workers;
  cfg.seeds = {1, 2, 3};

  // generate -> disk -> encode -> disk -> train/eval -> report
  const auto samples = make_dataset(cfg.dataset);
  GraphDataset ds;
  ds.provenance.encode = cfg.variants.graph;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto p = dir / ("v" + std::to_string(i) + ".vgr");
    write_volume(samples[i].volume, p);
    Sample s = samples[i];
    s.volume = read_volume(p);
    ds.graphs.push_back(encode_graph(s, cfg.variants.graph));
    ds.provenance.sample_seeds.push_back(s.seed);
  }
  write_graphs(ds, dir / "graphs.vgp");
  std::vector<Example> ex;
  for (const auto& g : read_graphs(dir / "graphs.vgp").graphs) ex.push_back({g, g.label});
  const std::vector<ExperimentRecord> recs = {
      run_experiment("graph", cfg.model_spec(), ex, cfg.train, cfg.seeds, cfg.split)};
  write_report(recs, dir / "report");
  auto out = slurp(dir / "report.csv");
  const auto txt = slurp(dir / "report.txt");
  out.insert(out.end(), txt.begin(), txt.end());
  return out;
}

void ac10(Check& c) {
  const auto a = pipeline(1, test::temp_path("acceptance_run_a"));
  const auto b = pipeline(1, test::temp_path("acceptance_run_b"));
  const auto w = pipeline(3, test::temp_path("acceptance_run_w"));
  c.expect(!a.empty(), "empty report");
  c.expect(a == b, "repeat run differs");
  c.expect(a == w, "3 workers differ from 1");
  c.summary = "report files identical across 2 runs and 1/3 workers (" + std::to_string(a.size()) +
              " bytes)";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<void(Check&)>>> all = {
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5},
      {6, ac6}, {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}};
  const std::map<int, double> budget = {{1, 1.0}, {3, 60.0}, {4, 120.0}, {7, 600.0}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& [id, fn] : all) {
    if (!only.empty() && !only.count(id)) continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (auto it = budget.find(id); it != budget.end() && s > it->second) {
      c.failures.push_back("runtime " + fixed(s, 2) + " s over " + fixed(it->second, 0) + " s");
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::cout << "AC" << id << (id < 10 ? "  " : " ") << (ok ? "PASS" : "FAIL") << "  "
              << c.summary << "  [" << fixed(s, 2) << " s]" << std::endl;
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures.size(), 5); ++i) {
      std::cout << "      " << c.failures[i] << '\n';
    }
  }
  return failed ? 1 : 0;
}
