#pragma once

// JSON forms of the pipeline configuration. Every reader accepts any subset
// of the keys its writer emits; missing keys keep their defaults.
//
// Experiment file layout (all sections optional):
//   {"dataset": {...}, "input": "graph", "variants": {...}, "model": {...},
//    "train": {...}, "split": {"train": 0.8, "val": 0.1}, "seeds": [1, 2, 3],
//    "transfer": {"pretrain": {...}, "finetune": {...}}}

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vgc/graph.hpp"
#include "vgc/slic.hpp"
#include "vgc/synth.hpp"
#include "vgc/training.hpp"
#include "vgc/variants.hpp"

namespace vgc {

inline nlohmann::json dims_to_json(Dims d) { return {d.x, d.y, d.z}; }

inline Dims dims_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<std::uint32_t>>();
  if (v.size() < 2 || v.size() > 3) throw ParameterError("dims need 2 or 3 entries");
  Dims d{v[0], v[1], v.size() > 2 ? v[2] : 1u};
  if (d.x == 0 || d.y == 0 || d.z == 0) throw ParameterError("dims must be positive");
  return d;
}

// ---------------------------------------------------------------- slic / encoding

inline nlohmann::json to_json(const SlicConfig& c) {
  return {{"target_segments", c.target_segments},
          {"compactness", c.compactness},
          {"iterations", c.iterations},
          {"enforce_connectivity", c.enforce_connectivity},
          {"perturb_seeds", c.perturb_seeds},
          {"orphan_fraction", c.orphan_fraction}};
}

inline SlicConfig slic_config_from_json(const nlohmann::json& j, SlicConfig c = {}) {
  c.target_segments = j.value("target_segments", c.target_segments);
  c.compactness = j.value("compactness", c.compactness);
  c.iterations = j.value("iterations", c.iterations);
  c.enforce_connectivity = j.value("enforce_connectivity", c.enforce_connectivity);
  c.perturb_seeds = j.value("perturb_seeds", c.perturb_seeds);
  c.orphan_fraction = j.value("orphan_fraction", c.orphan_fraction);
  return c;
}

inline nlohmann::json to_json(const EncodeConfig& c) {
  return {{"slic", to_json(c.slic)}, {"k", c.k}, {"edges", std::string(name(c.edges))}};
}

inline EncodeConfig encode_config_from_json(const nlohmann::json& j, EncodeConfig c = {}) {
  if (j.contains("slic")) c.slic = slic_config_from_json(j["slic"], c.slic);
  c.k = j.value("k", c.k);
  if (j.contains("edges")) c.edges = edge_mode_from_name(j["edges"].get<std::string>());
  return c;
}

inline nlohmann::json to_json(const VariantOptions& o) {
  return {{"binarize_threshold", o.binarize_threshold},
          {"slic_2d", to_json(o.slic_2d)},
          {"graph", to_json(o.graph)}};
}

inline VariantOptions variant_options_from_json(const nlohmann::json& j, VariantOptions o = {}) {
  o.binarize_threshold = j.value("binarize_threshold", o.binarize_threshold);
  if (j.contains("slic_2d")) o.slic_2d = slic_config_from_json(j["slic_2d"], o.slic_2d);
  if (j.contains("graph")) o.graph = encode_config_from_json(j["graph"], o.graph);
  return o;
}

// ---------------------------------------------------------------- generator

inline nlohmann::json to_json(const GeneratorOptions& g) {
  return {{"dims", dims_to_json(g.dims)},
          {"noise_sigma", g.noise_sigma},
          {"amplitude_min", g.amplitude_min},
          {"amplitude_max", g.amplitude_max},
          {"sigma_min", g.sigma_min},
          {"sigma_max", g.sigma_max},
          {"jitter", g.jitter},
          {"threshold", g.threshold}};
}

inline GeneratorOptions generator_options_from_json(const nlohmann::json& j,
                                                    GeneratorOptions g = {}) {
  if (j.contains("dims")) g.dims = dims_from_json(j["dims"]);
  g.noise_sigma = j.value("noise_sigma", g.noise_sigma);
  g.amplitude_min = j.value("amplitude_min", g.amplitude_min);
  g.amplitude_max = j.value("amplitude_max", g.amplitude_max);
  g.sigma_min = j.value("sigma_min", g.sigma_min);
  g.sigma_max = j.value("sigma_max", g.sigma_max);
  g.jitter = j.value("jitter", g.jitter);
  g.threshold = j.value("threshold", g.threshold);
  return g;
}

/// The fixed blob geometry together with the generator defaults.
inline nlohmann::json synth_geometry_json(const GeneratorOptions& g = {}) {
  nlohmann::json classes = nlohmann::json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& b : canonical_centers(class_from_index(c))) {
      centers.push_back({b.x, b.y, b.z});
    }
    classes[std::string(name(class_from_index(c)))] = centers;
  }
  return {{"version", std::string(kSynthVersion)},
          {"generator", to_json(g)},
          {"centers", classes}};
}

inline nlohmann::json to_json(const DatasetOptions& o) {
  return {{"n_per_class_per_domain", o.n_per_class_per_domain},
          {"seed", o.seed},
          {"healthy", o.healthy},
          {"unhealthy", o.unhealthy},
          {"variant", std::string(name(o.variant))},
          {"generator", to_json(o.generator)}};
}

inline DatasetOptions dataset_options_from_json(const nlohmann::json& j, DatasetOptions o = {}) {
  o.n_per_class_per_domain = j.value("n_per_class_per_domain", o.n_per_class_per_domain);
  o.seed = j.value("seed", o.seed);
  o.healthy = j.value("healthy", o.healthy);
  o.unhealthy = j.value("unhealthy", o.unhealthy);
  if (j.contains("variant")) o.variant = variant_from_name(j["variant"].get<std::string>());
  if (j.contains("generator")) {
    o.generator = generator_options_from_json(j["generator"], o.generator);
  }
  return o;
}

// ---------------------------------------------------------------- experiment

struct ExperimentConfig {
  DatasetOptions dataset;
  InputVariant input = InputVariant::Graph;
  VariantOptions variants;
  std::optional<nn::ModelSpec> model;  // default_spec_for(input) when absent
  TrainConfig train;
  SplitRatios split;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  TransferConfig transfer;

  nn::ModelSpec model_spec() const {
    return model ? *model : default_spec_for(input, dataset.generator.dims);
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"dataset", to_json(c.dataset)},
                      {"input", std::string(name(c.input))},
                      {"variants", to_json(c.variants)},
                      {"model", nn::to_json(c.model_spec())},
                      {"train", to_json(c.train)},
                      {"split", {{"train", c.split.train}, {"val", c.split.val}}},
                      {"seeds", c.seeds},
                      {"transfer",
                       {{"pretrain", to_json(c.transfer.pretrain)},
                        {"finetune", to_json(c.transfer.finetune)}}}};
  return j;
}

/// The transfer section defaults to the "train" section for both phases.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("dataset")) c.dataset = dataset_options_from_json(j["dataset"]);
    if (j.contains("input")) c.input = input_variant_from_name(j["input"].get<std::string>());
    if (j.contains("variants")) c.variants = variant_options_from_json(j["variants"]);
    if (j.contains("model")) c.model = nn::model_spec_from_json(j["model"]);
    if (j.contains("train")) c.train = train_config_from_json(j["train"]);
    if (j.contains("split")) {
      c.split.train = j["split"].value("train", c.split.train);
      c.split.val = j["split"].value("val", c.split.val);
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.transfer.pretrain = c.train;
    c.transfer.finetune = c.train;
    c.transfer.ratios = c.split;
    if (j.contains("transfer")) {
      const auto& t = j["transfer"];
      if (t.contains("pretrain")) c.transfer.pretrain = train_config_from_json(t["pretrain"], c.train);
      if (t.contains("finetune")) c.transfer.finetune = train_config_from_json(t["finetune"], c.train);
    }
    validate(c.train);
    validate(c.transfer.pretrain);
    validate(c.transfer.finetune);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config JSON: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

inline ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(read_json_file(path));
}

}  // namespace vgc
