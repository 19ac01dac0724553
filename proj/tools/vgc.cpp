// vgc: command-line front end for the volume-to-graph pipeline.
//
// Exit codes: 0 success, 2 parameter/spec/format errors, 3 numeric errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vgc/vgc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vgc;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load_config(const Common& c) {
  return c.config.empty() ? ExperimentConfig{} : read_experiment_config(c.config);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("-s,--seed", c.seed, "seed override");
}

std::string file_stem(const Sample& s, int index) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d_%s_%s", index, std::string(name(s.domain.kind)).c_str(),
                std::string(name(s.label)).c_str());
  return buf;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParameterError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

// Samples listed in a manifest, volumes loaded from disk.
std::vector<Sample> load_samples(const std::string& manifest) {
  std::vector<Sample> out;
  for (const auto& r : read_manifest(manifest)) {
    Sample s;
    s.volume = read_volume(r.path);
    s.label = r.label;
    s.domain = r.domain == Domain::Kind::Healthy
                   ? Domain::healthy()
                   : Domain::unhealthy(make_lesion(r.seed, s.volume.dims()));
    s.variant = r.variant;
    s.seed = r.seed;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<nn::Example> graphs_to_examples(const std::vector<RegionGraph>& graphs) {
  std::vector<nn::Example> out;
  for (const auto& g : graphs) out.push_back({g, g.label});
  return out;
}

// --data accepts a .vgp graph file or a manifest of volumes; without it the
// dataset section of the config is generated.
std::vector<nn::Example> load_examples(const std::string& data, const ExperimentConfig& cfg) {
  if (!data.empty() && fs::path(data).extension() == ".vgp") {
    if (cfg.input != InputVariant::Graph) {
      throw ParameterError("graph file given but config input is " + std::string(name(cfg.input)));
    }
    return graphs_to_examples(read_graphs(data).graphs);
  }
  const auto samples = data.empty() ? make_dataset(cfg.dataset) : load_samples(data);
  return make_examples(samples, cfg.input, cfg.variants);
}

std::vector<ExperimentRecord> read_records(const std::string& path) {
  const json j = read_json_file(path);
  std::vector<ExperimentRecord> out;
  if (j.is_array()) {
    for (const auto& r : j) out.push_back(experiment_record_from_json(r));
  } else {
    out.push_back(experiment_record_from_json(j));
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_generate(const Common& c, const std::string& out_dir) {
  auto cfg = load_config(c);
  if (c.seed) cfg.dataset.seed = *c.seed;
  fs::create_directories(out_dir);
  const auto samples = make_dataset(cfg.dataset);
  std::vector<ManifestRecord> records;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string file = file_stem(s, int(i)) + ".vgr";
    write_volume(s.volume, fs::path(out_dir) / file);
    records.push_back({file, s.label, s.domain.kind, s.variant, s.seed});
  }
  write_manifest(records, fs::path(out_dir) / "manifest.jsonl");
  std::cerr << "wrote " << samples.size() << " volumes to " << out_dir << '\n';
  return 0;
}

int cmd_reduce(const Common& c, const std::string& manifest, const std::string& variant,
               const std::string& out_dir) {
  const auto cfg = load_config(c);
  const auto v = input_variant_from_name(variant);
  fs::create_directories(out_dir);
  const auto records = read_manifest(manifest);
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    const Volume vol = read_volume(r.path);
    const double t = cfg.variants.binarize_threshold;
    const std::string file = fs::path(r.path).stem().string() + "_" + variant + ".vgr";
    const fs::path dst = fs::path(out_dir) / file;
    switch (v) {
      case InputVariant::Gray2D: write_grid(mean_project(vol), dst); break;
      case InputVariant::Binary2D: write_grid(or_project(binarize(vol, t), Plane::Axial), dst); break;
      case InputVariant::Binary3D: write_grid(binarize(vol, t), dst); break;
      case InputVariant::Sca: write_sca_stack(sca_stack(binarize(vol, t)), dst); break;
      case InputVariant::Superpixels: write_volume(superpixel_image(vol, cfg.variants.slic_2d), dst); break;
      case InputVariant::Supervoxels:
        write_volume(supervoxel_image(vol, cfg.variants.graph.slic), dst);
        break;
      default: throw ParameterError("reduce: unsupported variant " + variant);
    }
    auto rec = r;
    rec.path = file;
    out.push_back(rec);
  }
  write_manifest(out, fs::path(out_dir) / "manifest.jsonl");
  std::cerr << "wrote " << out.size() << " " << variant << " files to " << out_dir << '\n';
  return 0;
}

int cmd_segment(const Common& c, const std::string& manifest, const std::string& out_dir) {
  const auto cfg = load_config(c);
  fs::create_directories(out_dir);
  std::vector<ManifestRecord> out;
  for (const auto& r : read_manifest(manifest)) {
    const Volume vol = read_volume(r.path);
    const SlicConfig& sc = vol.dims().is_2d() ? cfg.variants.slic_2d : cfg.variants.graph.slic;
    const LabelMap labels = slic(vol, sc);
    const std::string stem = fs::path(r.path).stem().string();
    write_labels(labels, fs::path(out_dir) / (stem + "_labels.vgr"));
    write_volume(smooth_by_segment(vol, labels), fs::path(out_dir) / (stem + "_smooth.vgr"));
    auto rec = r;
    rec.path = stem + "_smooth.vgr";
    out.push_back(rec);
  }
  write_manifest(out, fs::path(out_dir) / "manifest.jsonl");
  std::cerr << "segmented " << out.size() << " volumes into " << out_dir << '\n';
  return 0;
}

int cmd_encode(const Common& c, const std::string& manifest, const std::string& out) {
  auto cfg = load_config(c);
  if (c.seed) cfg.dataset.seed = *c.seed;
  GraphDataset ds;
  ds.provenance.encode = cfg.variants.graph;
  const auto samples = manifest.empty() ? make_dataset(cfg.dataset) : load_samples(manifest);
  for (const auto& s : samples) {
    const EncodeConfig ec = s.volume.dims().is_2d() ? default_encode_2d() : cfg.variants.graph;
    ds.graphs.push_back(encode_graph(s, ec));
    ds.provenance.sample_seeds.push_back(s.seed);
  }
  write_graphs(ds, out);
  std::cerr << "encoded " << ds.graphs.size() << " graphs to " << out << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::string& data, const std::string& out,
              const std::string& metrics) {
  auto cfg = load_config(c);
  if (c.seed) cfg.train.seed = *c.seed;
  const auto examples = load_examples(data, cfg);
  const auto split = split_dataset(labels_of(examples), cfg.split, cfg.train.seed);
  const auto tr = gather<nn::Example>(examples, split.train);
  const auto va = gather<nn::Example>(examples, split.val);
  const auto te = gather<nn::Example>(examples, split.test);

  std::ofstream metrics_file;
  std::ostream* ms = &std::cout;
  if (!metrics.empty() && metrics != "-") {
    metrics_file.open(metrics, std::ios::trunc);
    if (!metrics_file) throw ParameterError("cannot open for writing: " + metrics);
    ms = &metrics_file;
  }
  const auto res = train_model(cfg.model_spec(), tr, va, cfg.train, nullptr,
                               [&](const EpochRecord& r) { *ms << to_json(r).dump() << '\n' << std::flush; });
  nn::write_checkpoint(res.model, out);
  const json summary = {{"checkpoint", out},
                        {"parameters", nn::param_count(res.model.spec()).total},
                        {"best_epoch", res.best_epoch},
                        {"stopped_epoch", res.stopped_epoch},
                        {"test_accuracy", te.empty() ? json(nullptr) : json(accuracy(res.model, te))},
                        {"train_test", std::to_string(tr.size()) + "-" + std::to_string(te.size())}};
  std::cerr << summary.dump() << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& model, const std::string& data,
             const std::string& name_, const std::string& out) {
  auto cfg = load_config(c);
  if (!model.empty()) {
    // One checkpoint: the whole data set, or the test split of --seed.
    const auto net = nn::read_checkpoint(model);
    auto examples = load_examples(data, cfg);
    if (c.seed) {
      const auto split = split_dataset(labels_of(examples), cfg.split, *c.seed);
      examples = gather<nn::Example>(examples, split.test);
    }
    const auto e = evaluate_model(net, examples);
    write_json({{"accuracy", e.accuracy}, {"loss", e.loss}, {"n", examples.size()}}, out);
    return 0;
  }
  if (c.seed) cfg.seeds = {*c.seed};
  const auto examples = load_examples(data, cfg);
  const std::string label = name_.empty() ? std::string(title(cfg.input)) : name_;
  const auto rec = run_experiment(label, cfg.model_spec(), examples, cfg.train, cfg.seeds, cfg.split);
  write_json(to_json(rec), out);
  return 0;
}

int cmd_transfer(const Common& c, const std::string& name_, const std::string& out) {
  auto cfg = load_config(c);
  if (c.seed) cfg.dataset.seed = *c.seed;
  auto h = cfg.dataset, u = cfg.dataset;
  h.healthy = true;
  h.unhealthy = false;
  u.healthy = false;
  u.unhealthy = true;
  const auto he = make_examples(make_dataset(h), cfg.input, cfg.variants);
  const auto ue = make_examples(make_dataset(u), cfg.input, cfg.variants);
  const std::string label = name_.empty() ? std::string(title(cfg.input)) : name_;
  const auto r = run_transfer(label, cfg.model_spec(), he, ue, cfg.transfer, cfg.seeds);
  write_json(json::array({to_json(r.brute), to_json(r.pretrained)}), out);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& prefix) {
  std::vector<ExperimentRecord> records;
  for (const auto& p : inputs) {
    auto r = read_records(p);
    records.insert(records.end(), r.begin(), r.end());
  }
  if (records.empty()) throw ParameterError("report: no records");
  if (prefix.empty()) {
    std::cout << render_text_table(records);
  } else {
    write_report(records, prefix);
    std::cerr << "wrote " << prefix << ".csv and " << prefix << ".txt\n";
  }
  return 0;
}

int cmd_config(const Common& c, const std::string& input, bool synth) {
  if (synth) {
    std::cout << synth_geometry_json().dump(2) << '\n';
    return 0;
  }
  auto cfg = load_config(c);
  if (!input.empty()) cfg.input = input_variant_from_name(input);
  if (c.seed) cfg.dataset.seed = *c.seed;
  std::cout << to_json(cfg).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vgc: volume-to-graph compaction toolkit"};
  app.require_subcommand(1);
  Common common;
  std::string out, data, manifest, variant, model, name_, metrics, input;
  std::vector<std::string> records;
  bool synth = false;

  auto* gen = app.add_subcommand("generate", "synthesize a dataset of volumes + manifest");
  add_common(gen, common);
  gen->add_option("-o,--out", out, "output directory")->required();

  auto* red = app.add_subcommand("reduce", "produce a reduced variant of every volume");
  add_common(red, common);
  red->add_option("-m,--manifest", manifest, "input manifest")->required()->check(CLI::ExistingFile);
  red->add_option("-v,--variant", variant,
                  "2d-gray, 2d-binary, 3d-binary, sca, superpixels or supervoxels")->required();
  red->add_option("-o,--out", out, "output directory")->required();

  auto* seg = app.add_subcommand("segment", "SLIC label maps and segment-smoothed volumes");
  add_common(seg, common);
  seg->add_option("-m,--manifest", manifest, "input manifest")->required()->check(CLI::ExistingFile);
  seg->add_option("-o,--out", out, "output directory")->required();

  auto* enc = app.add_subcommand("encode", "encode volumes as region graphs (.vgp)");
  add_common(enc, common);
  enc->add_option("-m,--manifest", manifest, "input manifest (default: generate)");
  enc->add_option("-o,--out", out, "output graph file")->required();

  auto* tr = app.add_subcommand("train", "train one model; epoch metrics as JSON lines");
  add_common(tr, common);
  tr->add_option("-d,--data", data, ".vgp graphs or a volume manifest (default: generate)");
  tr->add_option("-o,--out", out, "checkpoint path")->required();
  tr->add_option("--metrics", metrics, "JSON-lines metrics file (default: stdout)");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint, or run a multi-seed experiment");
  add_common(ev, common);
  ev->add_option("--model", model, "checkpoint to evaluate");
  ev->add_option("-d,--data", data, ".vgp graphs or a volume manifest (default: generate)");
  ev->add_option("-n,--name", name_, "row label");
  ev->add_option("-o,--out", out, "output JSON (default: stdout)");

  auto* xf = app.add_subcommand("transfer", "brute vs pretrained transfer, healthy -> unhealthy");
  add_common(xf, common);
  xf->add_option("-n,--name", name_, "row label");
  xf->add_option("-o,--out", out, "output JSON (default: stdout)");

  auto* rep = app.add_subcommand("report", "render record files as CSV and text tables");
  add_common(rep, common);
  rep->add_option("records", records, "record JSON files")->required()->check(CLI::ExistingFile);
  rep->add_option("-o,--out", out, "output prefix (default: text table on stdout)");

  auto* cf = app.add_subcommand("config", "print the effective experiment config");
  add_common(cf, common);
  cf->add_option("-i,--input", input, "input variant");
  cf->add_flag("--synth", synth, "print the synthetic blob geometry instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(common, out);
    if (*red) return cmd_reduce(common, manifest, variant, out);
    if (*seg) return cmd_segment(common, manifest, out);
    if (*enc) return cmd_encode(common, manifest, out);
    if (*tr) return cmd_train(common, data, out, metrics);
    if (*ev) return cmd_eval(common, model, data, name_, out);
    if (*xf) return cmd_transfer(common, name_, out);
    if (*rep) return cmd_report(records, out);
    if (*cf) return cmd_config(common, input, synth);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
