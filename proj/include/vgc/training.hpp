#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vgc/neural/network.hpp"
#include "vgc/rng.hpp"

namespace vgc {

using nn::Example;
using nn::ModelSpec;
using nn::Network;

// ---------------------------------------------------------------- split

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;  // test receives the remainder
};

/// Two-way split without validation, 315/70 of 385 maps.
inline constexpr SplitRatios kTwoWayRatios{315.0 / 385.0, 0.0};

struct Split {
  std::vector<std::size_t> train, val, test;
};

/// Stratified split: within each class (ascending index order, then a seeded
/// Fisher-Yates shuffle) the first floor(n_c * train) go to train, the next
/// floor(n_c * val) to validation, the rest to test. Lists are sorted.
inline Split split_dataset(std::span<const std::uint8_t> labels, SplitRatios ratios,
                           std::uint64_t seed) {
  if (labels.size() < 10) throw ParameterError("split_dataset: need n >= 10");
  if (ratios.train < 0 || ratios.val < 0 || ratios.train + ratios.val > 1.0) {
    throw ParameterError("split_dataset: bad ratios");
  }
  std::vector<std::vector<std::size_t>> by_class(kNumClasses);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) throw ParameterError("split_dataset: bad label");
    by_class[labels[i]].push_back(i);
  }
  Split s;
  Rng rng(mix_seed(seed, 0x5B117ULL));
  for (int c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 3) {
      throw ParameterError("split_dataset: class " + std::string(kClassNames[c]) +
                           " has fewer than 3 samples");
    }
    shuffle(idx.begin(), idx.end(), rng);
    const double n = double(idx.size());
    const auto ntr = static_cast<std::size_t>(std::floor(n * ratios.train + 1e-9));
    const auto nva = static_cast<std::size_t>(std::floor(n * ratios.val + 1e-9));
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + ntr);
    s.val.insert(s.val.end(), idx.begin() + ntr, idx.begin() + ntr + nva);
    s.test.insert(s.test.end(), idx.begin() + ntr + nva, idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

template <class T>
std::vector<T> gather(std::span<const T> items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

// ---------------------------------------------------------------- config

enum class OptimizerKind : std::uint8_t { Adam, Sgd };
// AccuracyThenLoss: higher accuracy wins; equal accuracy with lower loss
// also counts as an improvement.
enum class StopMetric : std::uint8_t { Accuracy, Loss, AccuracyThenLoss };

inline std::string_view stop_metric_name(StopMetric m) {
  switch (m) {
    case StopMetric::Accuracy: return "accuracy";
    case StopMetric::Loss: return "loss";
    case StopMetric::AccuracyThenLoss: return "accuracy+loss";
  }
  return "?";
}

inline StopMetric stop_metric_from_name(std::string_view s) {
  for (auto m : {StopMetric::Accuracy, StopMetric::Loss, StopMetric::AccuracyThenLoss}) {
    if (stop_metric_name(m) == s) return m;
  }
  throw ParameterError("unknown stop metric: " + std::string(s));
}

struct TrainConfig {
  int epochs = 500;
  int phase_boundary = 200;
  double lr_phase1 = 1e-3;
  double lr_phase2 = 1e-5;
  int patience = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.0;  // SGD only
  StopMetric stop_metric = StopMetric::Accuracy;
  double min_delta = 0.0;  // an improvement must exceed this margin
  int workers = 1;
  // Warm starts: the incoming parameters compete as the epoch -1 checkpoint.
  bool score_initial = false;
};

/// Epochs [0, phase_boundary) use lr_phase1, the rest lr_phase2.
inline double lr_at_epoch(int e, const TrainConfig& cfg = {}) {
  if (e < 0 || e >= cfg.epochs) {
    throw ParameterError("lr_at_epoch: epoch " + std::to_string(e) + " outside [0, " +
                         std::to_string(cfg.epochs) + ")");
  }
  return e < cfg.phase_boundary ? cfg.lr_phase1 : cfg.lr_phase2;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"phase_boundary", c.phase_boundary},
          {"lr_phase1", c.lr_phase1},
          {"lr_phase2", c.lr_phase2},
          {"patience", c.patience},
          {"batch_size", c.batch_size},
          {"optimizer", c.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"momentum", c.momentum},
          {"stop_metric", std::string(stop_metric_name(c.stop_metric))},
          {"min_delta", c.min_delta}};
}

/// Reads any subset of the keys written by to_json (plus "seed", "workers").
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
  c.epochs = j.value("epochs", c.epochs);
  c.phase_boundary = j.value("phase_boundary", c.phase_boundary);
  c.lr_phase1 = j.value("lr_phase1", c.lr_phase1);
  c.lr_phase2 = j.value("lr_phase2", c.lr_phase2);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("optimizer")) {
    const auto o = j["optimizer"].get<std::string>();
    if (o == "adam") c.optimizer = OptimizerKind::Adam;
    else if (o == "sgd") c.optimizer = OptimizerKind::Sgd;
    else throw ParameterError("unknown optimizer: " + o);
  }
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.momentum = j.value("momentum", c.momentum);
  if (j.contains("stop_metric")) {
    c.stop_metric = stop_metric_from_name(j["stop_metric"].get<std::string>());
  }
  c.min_delta = j.value("min_delta", c.min_delta);
  return c;
}

inline void validate(const TrainConfig& c) {
  if (c.epochs < 0) throw ParameterError("epochs must be >= 0");
  if (c.patience < 1) throw ParameterError("patience must be >= 1");
  if (c.batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (c.workers < 1) throw ParameterError("workers must be >= 1");
  if (c.lr_phase1 < 0 || c.lr_phase2 < 0) throw ParameterError("learning rates must be >= 0");
  if (!(c.min_delta >= 0)) throw ParameterError("min_delta must be >= 0");
}

// ---------------------------------------------------------------- gradients

/// Sum (or mean) over the batch of per-example loss gradients. Each example's
/// gradient is computed into its own buffer and the buffers are added in
/// batch order, so the result does not depend on `workers`.
template <class T>
T compute_gradients(const Network<T>& net, std::span<const Example> batch,
                    std::span<T> grad, bool mean_reduction = false, int workers = 1) {
  std::fill(grad.begin(), grad.end(), T(0));
  const std::size_t np = net.num_params();
  const std::size_t w = std::max(1, workers);
  std::vector<std::vector<T>> scratch(std::min(w, batch.size()), std::vector<T>(np));
  std::vector<T> losses(batch.size(), T(0));
  T total = T(0);
  for (std::size_t start = 0; start < batch.size(); start += scratch.size()) {
    const std::size_t count = std::min(scratch.size(), batch.size() - start);
    auto job = [&](std::size_t k) {
      std::fill(scratch[k].begin(), scratch[k].end(), T(0));
      const auto& ex = batch[start + k];
      losses[start + k] = net.loss_and_gradient(ex.input, ex.label, scratch[k]);
    };
    if (count == 1 || w == 1) {
      for (std::size_t k = 0; k < count; ++k) {
        job(k);
        auto& s = scratch[k];
        for (std::size_t i = 0; i < np; ++i) grad[i] += s[i];
      }
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(count);
      for (std::size_t k = 0; k < count; ++k) {
        threads.emplace_back([&, k] {
          try {
            job(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (std::size_t k = 0; k < count; ++k) {
        auto& s = scratch[k];
        for (std::size_t i = 0; i < np; ++i) grad[i] += s[i];
      }
    }
  }
  for (T l : losses) total += l;
  if (mean_reduction && !batch.empty()) {
    const T inv = T(1) / T(batch.size());
    for (auto& g : grad) g *= inv;
    total *= inv;
  }
  return total;
}

// ---------------------------------------------------------------- optimizers

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n)
      : cfg_(cfg), m_(n, 0.0f), v_(cfg.optimizer == OptimizerKind::Adam ? n : 0, 0.0f) {}

  void step(std::span<float> params, std::span<const float> grad, double lr) {
    ++t_;
    if (cfg_.optimizer == OptimizerKind::Sgd) {
      const auto mom = static_cast<float>(cfg_.momentum);
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = mom * m_[i] + grad[i];
        params[i] -= static_cast<float>(lr) * m_[i];
      }
      return;
    }
    const auto b1 = static_cast<float>(cfg_.beta1);
    const auto b2 = static_cast<float>(cfg_.beta2);
    const auto c1 = static_cast<float>(1.0 / (1.0 - std::pow(cfg_.beta1, t_)));
    const auto c2 = static_cast<float>(1.0 / (1.0 - std::pow(cfg_.beta2, t_)));
    const auto eps = static_cast<float>(cfg_.eps);
    const auto a = static_cast<float>(lr);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const float g = grad[i];
      m_[i] = b1 * m_[i] + (1.0f - b1) * g;
      v_[i] = b2 * v_[i] + (1.0f - b2) * g * g;
      params[i] -= a * (m_[i] * c1) / (std::sqrt(v_[i] * c2) + eps);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<float> m_, v_;
  long t_ = 0;
};

// ---------------------------------------------------------------- evaluation

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

inline EvalResult evaluate_model(const Network<float>& net, std::span<const Example> data) {
  if (data.empty()) throw ParameterError("evaluate: empty data set");
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& ex : data) {
    const auto z = net.logits(ex.input);
    const auto pred = std::max_element(z.begin(), z.end()) - z.begin();
    correct += static_cast<std::size_t>(pred) == ex.label;
    loss += nn::softmax_cross_entropy<float>(z, ex.label).loss;
  }
  return {double(correct) / double(data.size()), loss / double(data.size())};
}

inline double accuracy(const Network<float>& net, std::span<const Example> data) {
  return evaluate_model(net, data).accuracy;
}

struct AccuracySummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

/// Mean and sample standard deviation over at least 3 per-seed accuracies.
inline AccuracySummary summarize_accuracy(std::span<const double> acc) {
  if (acc.size() < 3) {
    throw ParameterError("accuracy summary needs >= 3 seeds, got " +
                         std::to_string(acc.size()));
  }
  AccuracySummary s;
  for (double a : acc) s.mean += a;
  s.mean /= double(acc.size());
  double ss = 0.0;
  for (double a : acc) ss += (a - s.mean) * (a - s.mean);
  s.std = std::sqrt(ss / double(acc.size() - 1));
  return s;
}

/// Accuracy of every model on the same test set, summarized over models.
inline AccuracySummary evaluate(std::span<const Network<float>> models,
                                std::span<const Example> test) {
  if (test.empty()) throw ParameterError("evaluate: empty test set");
  std::vector<double> acc;
  for (const auto& m : models) acc.push_back(accuracy(m, test));
  return summarize_accuracy(acc);
}

// ---------------------------------------------------------------- training

/// Equal up to fitted input statistics.
inline bool same_architecture(ModelSpec a, ModelSpec b) {
  for (auto* s : {&a, &b}) {
    s->input.feature_mean.clear();
    s->input.feature_scale.clear();
  }
  return a == b;
}

/// Per-feature mean and 1/std over all nodes of the training graphs.
inline void fit_input_statistics(ModelSpec& spec, std::span<const Example> train) {
  const std::size_t F = spec.input.node_features;
  std::vector<double> sum(F, 0.0), sq(F, 0.0);
  std::size_t n = 0;
  for (const auto& ex : train) {
    const auto* g = std::get_if<RegionGraph>(&ex.input);
    if (!g) throw ParameterError("input standardization needs graph examples");
    if (g->feature_dim != F) throw ParameterError("graph feature dim does not match model");
    for (std::size_t i = 0; i < g->features.size(); ++i) sum[i % F] += g->features[i];
    n += g->num_nodes;
  }
  if (n == 0) throw ParameterError("input standardization: no nodes");
  std::vector<double> mean(F);
  for (std::size_t f = 0; f < F; ++f) mean[f] = sum[f] / double(n);
  for (const auto& ex : train) {
    const auto& g = std::get<RegionGraph>(ex.input);
    for (std::size_t i = 0; i < g.features.size(); ++i) {
      const double d = g.features[i] - mean[i % F];
      sq[i % F] += d * d;
    }
  }
  spec.input.feature_mean.resize(F);
  spec.input.feature_scale.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    const double sd = std::sqrt(sq[f] / double(n));
    spec.input.feature_mean[f] = static_cast<float>(mean[f]);
    spec.input.feature_scale[f] = static_cast<float>(sd > 1e-6 ? 1.0 / sd : 1.0);
  }
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

inline nlohmann::json to_json(const EpochRecord& r) {
  nlohmann::json j{{"epoch", r.epoch}, {"lr", r.lr}, {"train_loss", r.train_loss}};
  j["val_acc"] = std::isnan(r.val_acc) ? nlohmann::json(nullptr) : nlohmann::json(r.val_acc);
  return j;
}

struct TrainResult {
  Network<float> model;
  std::vector<EpochRecord> history;
  int best_epoch = -1;       // -1: the initial parameters were kept
  int stopped_epoch = -1;    // last epoch run
  double best_val_acc = std::numeric_limits<double>::quiet_NaN();
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with the two-phase learning rate and early stopping
/// on validation accuracy (strict improvement). Returns the best-validation
/// checkpoint; with an empty validation set the final parameters.
inline TrainResult train_model(const ModelSpec& spec, std::span<const Example> train,
                               std::span<const Example> val, const TrainConfig& cfg,
                               const Network<float>* initial = nullptr,
                               const EpochCallback& on_epoch = {}) {
  validate(cfg);
  if (train.empty()) throw ParameterError("train_model: empty training set");
  ModelSpec fitted = spec;
  if (initial) {
    if (!same_architecture(initial->spec(), spec)) {
      throw ParameterError("train_model: initial model has a different architecture");
    }
    fitted = initial->spec();
  } else if (fitted.input.standardize && !fitted.input.fitted()) {
    fit_input_statistics(fitted, train);
  }
  Network<float> net(fitted);
  if (initial) {
    std::copy(initial->params().begin(), initial->params().end(), net.params().begin());
  } else {
    net.init(mix_seed(cfg.seed, 0x1417ULL));
  }

  TrainResult res{net, {}, -1, -1, std::numeric_limits<double>::quiet_NaN()};
  const bool has_val = !val.empty();
  double best_acc = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  auto better = [&](const EvalResult& e) {
    switch (cfg.stop_metric) {
      case StopMetric::Accuracy: return e.accuracy > best_acc + cfg.min_delta;
      case StopMetric::Loss: return e.loss < best_loss - cfg.min_delta;
      case StopMetric::AccuracyThenLoss:
        return e.accuracy > best_acc ||
               (e.accuracy == best_acc && e.loss < best_loss - cfg.min_delta);
    }
    return false;
  };
  if (has_val && cfg.score_initial) {
    const auto e = evaluate_model(net, val);
    best_acc = e.accuracy;
    best_loss = e.loss;
    res.best_val_acc = e.accuracy;
  }

  Optimizer opt(cfg, net.num_params());
  Rng order_rng(mix_seed(cfg.seed, 0x7A11ULL));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<float> grad(net.num_params());
  std::vector<Example> batch;
  int misses = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch, cfg);
    shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const float l = compute_gradients<float>(net, batch, grad, true, cfg.workers);
      if (!std::isfinite(l)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch));
      }
      loss_sum += double(l) * double(batch.size());
      opt.step(net.params(), grad, lr);
    }
    EpochRecord rec{epoch, lr, loss_sum / double(train.size()),
                    std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
    res.stopped_epoch = epoch;
    if (has_val) {
      const auto e = evaluate_model(net, val);
      rec.val_acc = e.accuracy;
      rec.val_loss = e.loss;
      if (better(e)) {
        best_acc = e.accuracy;
        best_loss = e.loss;
        res.best_val_acc = e.accuracy;
        res.best_epoch = epoch;
        std::copy(net.params().begin(), net.params().end(), res.model.params().begin());
        misses = 0;
      } else {
        ++misses;
      }
    }
    res.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (has_val && misses >= cfg.patience) break;
  }
  if (!has_val) {
    std::copy(net.params().begin(), net.params().end(), res.model.params().begin());
    res.best_epoch = res.stopped_epoch;
  }
  return res;
}

// ---------------------------------------------------------------- experiments

struct ExperimentRecord {
  std::string data;        // row label, e.g. "3D gray level"
  std::string train_test;  // e.g. "56-7" or "healthy-unhealthy"
  std::string model;       // "CNN" or "GNN"
  std::uint64_t parameters = 0;
  nlohmann::json config;
  std::vector<double> accuracies;  // one per seed
  double wall_clock_s = 0.0;

  [[nodiscard]] AccuracySummary summary() const { return summarize_accuracy(accuracies); }
};

inline nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j{{"data", r.data},         {"train_test", r.train_test},
                   {"model", r.model},       {"parameters", r.parameters},
                   {"config", r.config},     {"accuracies", r.accuracies},
                   {"wall_clock_s", r.wall_clock_s}};
  if (r.accuracies.size() >= 3) {
    const auto s = r.summary();
    j["accuracy_mean"] = s.mean;
    j["accuracy_std"] = s.std;
  }
  return j;
}

inline ExperimentRecord experiment_record_from_json(const nlohmann::json& j) {
  try {
    ExperimentRecord r;
    r.data = j.at("data").get<std::string>();
    r.train_test = j.at("train_test").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.parameters = j.at("parameters").get<std::uint64_t>();
    r.config = j.value("config", nlohmann::json::object());
    r.accuracies = j.at("accuracies").get<std::vector<double>>();
    r.wall_clock_s = j.value("wall_clock_s", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("experiment record: ") + e.what());
  }
}

inline std::string model_kind_name(nn::ModelKind k) {
  return k == nn::ModelKind::CNN ? "CNN" : "GNN";
}

inline std::vector<std::uint8_t> labels_of(std::span<const Example> data) {
  std::vector<std::uint8_t> l;
  l.reserve(data.size());
  for (const auto& e : data) l.push_back(e.label);
  return l;
}

/// Trains one model per seed on a stratified split of `data` and records the
/// per-seed test accuracy.
inline ExperimentRecord run_experiment(const std::string& name, const ModelSpec& spec,
                                       std::span<const Example> data, TrainConfig cfg,
                                       std::span<const std::uint64_t> seeds,
                                       SplitRatios ratios = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.data = name;
  rec.model = model_kind_name(spec.kind);
  rec.parameters = nn::param_count(spec).total;
  rec.config = {{"train", to_json(cfg)},
                {"split", {{"train", ratios.train}, {"val", ratios.val}}},
                {"spec", nn::to_json(spec)},
                {"seeds", std::vector<std::uint64_t>(seeds.begin(), seeds.end())}};
  const auto labels = labels_of(data);
  for (auto seed : seeds) {
    const Split s = split_dataset(labels, ratios, seed);
    const auto tr = gather(data, s.train);
    const auto va = gather(data, s.val);
    const auto te = gather(data, s.test);
    cfg.seed = seed;
    const auto result = train_model(spec, tr, va, cfg);
    rec.accuracies.push_back(accuracy(result.model, te));
    rec.train_test = std::to_string(tr.size()) + "-" + std::to_string(te.size());
  }
  rec.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

enum class TransferMode : std::uint8_t { Brute, Pretrained };

struct TransferConfig {
  TrainConfig pretrain;
  TrainConfig finetune;
  SplitRatios ratios;
};

struct TransferRecords {
  ExperimentRecord brute;
  ExperimentRecord pretrained;
};

inline void check_same_encoding(std::span<const Example> a, std::span<const Example> b) {
  if (a.empty() || b.empty()) throw ParameterError("transfer: empty data set");
  const auto& x = a.front().input;
  const auto& y = b.front().input;
  if (x.index() != y.index()) throw ParameterError("transfer: input kinds differ");
  if (const auto* gx = std::get_if<nn::GridTensor>(&x)) {
    const auto& gy = std::get<nn::GridTensor>(y);
    if (gx->channels != gy.channels || gx->dims != gy.dims) {
      throw ParameterError("transfer: grid encodings differ");
    }
  } else {
    const auto& rx = std::get<RegionGraph>(x);
    const auto& ry = std::get<RegionGraph>(y);
    if (rx.feature_dim != ry.feature_dim || rx.pseudo_dim != ry.pseudo_dim) {
      throw ParameterError("transfer: graph feature dims differ");
    }
  }
}

/// Both transfer arms with a shared pretraining run per seed:
///   brute      train on healthy, test on the unhealthy test split
///   pretrained continue on the unhealthy train split, same test split
inline TransferRecords run_transfer(const std::string& name, const ModelSpec& spec,
                                    std::span<const Example> healthy,
                                    std::span<const Example> unhealthy,
                                    const TransferConfig& cfg,
                                    std::span<const std::uint64_t> seeds) {
  check_same_encoding(healthy, unhealthy);
  const auto t0 = std::chrono::steady_clock::now();
  TransferRecords out;
  const auto params = nn::param_count(spec).total;
  const nlohmann::json config = {
      {"pretrain", to_json(cfg.pretrain)},
      {"finetune", to_json(cfg.finetune)},
      {"split", {{"train", cfg.ratios.train}, {"val", cfg.ratios.val}}},
      {"spec", nn::to_json(spec)},
      {"seeds", std::vector<std::uint64_t>(seeds.begin(), seeds.end())}};
  out.brute = {name + " brute-transfer", "healthy-unhealthy", model_kind_name(spec.kind),
               params, config, {}, 0.0};
  out.pretrained = {name + " healthy (pretrained)", "unhealthy-unhealthy",
                    model_kind_name(spec.kind), params, config, {}, 0.0};
  const auto hl = labels_of(healthy);
  const auto ul = labels_of(unhealthy);
  for (auto seed : seeds) {
    const Split hs = split_dataset(hl, cfg.ratios, seed);
    const Split us = split_dataset(ul, cfg.ratios, seed);
    TrainConfig pre = cfg.pretrain;
    pre.seed = seed;
    const auto base = train_model(spec, gather(healthy, hs.train), gather(healthy, hs.val), pre);
    const auto test = gather(unhealthy, us.test);
    out.brute.accuracies.push_back(accuracy(base.model, test));

    TrainConfig fine = cfg.finetune;
    fine.seed = mix_seed(seed, 0xF17EULL);
    fine.score_initial = true;
    const auto tuned = train_model(spec, gather(unhealthy, us.train),
                                   gather(unhealthy, us.val), fine, &base.model);
    out.pretrained.accuracies.push_back(accuracy(tuned.model, test));
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.brute.wall_clock_s = wall;
  out.pretrained.wall_clock_s = wall;
  return out;
}

inline ExperimentRecord transfer_experiment(TransferMode mode, const std::string& name,
                                            const ModelSpec& spec,
                                            std::span<const Example> healthy,
                                            std::span<const Example> unhealthy,
                                            const TransferConfig& cfg,
                                            std::span<const std::uint64_t> seeds) {
  auto r = run_transfer(name, spec, healthy, unhealthy, cfg, seeds);
  return mode == TransferMode::Brute ? r.brute : r.pretrained;
}

}  // namespace vgc
