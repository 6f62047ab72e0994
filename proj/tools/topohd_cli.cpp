// topohd command line: train / eval / run / features / baseline.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>

#include "topohd/config.hpp"
#include "topohd/corruptions.hpp"
#include "topohd/dataset.hpp"
#include "topohd/moments.hpp"
#include "topohd/parallel.hpp"
#include "topohd/pipeline.hpp"
#include "topohd/report.hpp"
#include "topohd/topology.hpp"

using namespace topohd;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::string output;
  std::string mnist_dir;
  int workers = -1;
  long train_limit = -1;
  long test_limit = -1;
  long epochs = -1;
  bool quiet = false;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("-c,--config", a.file, "Config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", a.overrides, "Override a config key, e.g. --set epochs=5");
  cmd->add_option("-o,--output", a.output, "Output directory");
  cmd->add_option("--mnist-dir", a.mnist_dir, "Directory with MNIST IDX files");
  cmd->add_option("-j,--workers", a.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--train-limit", a.train_limit, "Use the first N training images (0 = all)");
  cmd->add_option("--test-limit", a.test_limit, "Use the first N test images (0 = all)");
  cmd->add_option("--epochs", a.epochs, "OnlineHD epochs");
  cmd->add_flag("-q,--quiet", a.quiet, "No progress output");
}

RunConfig resolve(const ConfigArgs& a) {
  RunConfig c;
  if (!a.file.empty()) load_config_file(a.file, c);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!a.output.empty()) c.output_dir = a.output;
  if (!a.mnist_dir.empty()) c.mnist_dir = a.mnist_dir;
  if (a.workers >= 0) c.workers = static_cast<unsigned>(a.workers);
  if (a.train_limit >= 0) c.train_limit = static_cast<std::size_t>(a.train_limit);
  if (a.test_limit >= 0) c.test_limit = static_cast<std::size_t>(a.test_limit);
  if (a.epochs >= 0) c.epochs = static_cast<std::size_t>(a.epochs);
  c.validate();
  return c;
}

Progress progress_for(const ConfigArgs& a) {
  if (a.quiet) return {};
  return [](const std::string& msg) { std::fprintf(stderr, "[topohd] %s\n", msg.c_str()); };
}

void print_accuracy(const RunReport& r) { std::cout << accuracy_csv(r); }

int cmd_run(const ConfigArgs& a, bool baseline_only) {
  RunConfig c = resolve(a);
  if (baseline_only) c.run_topo = false;
  const RunReport report = run_experiment(c, progress_for(a));
  const auto files = write_report(report, c.output_dir);
  print_accuracy(report);
  if (!a.quiet) std::fprintf(stderr, "[topohd] wrote %zu files to %s\n", files.size(), c.output_dir.c_str());
  return 0;
}

int cmd_train(const ConfigArgs& a, const std::string& model_path) {
  const RunConfig c = resolve(a);
  const auto progress = progress_for(a);
  const auto [train, test] = load_datasets(c);
  (void)test;
  const Split split = stratified_split(train.labels, c.classes(), c.val_fraction, c.split_seed);
  std::vector<int> ytr, yva;
  std::vector<GrayImage> xtr;
  for (auto i : split.train) {
    ytr.push_back(train.labels[i]);
    xtr.push_back(train.images[i]);
  }
  for (auto i : split.val) yva.push_back(train.labels[i]);

  SavedModel m;
  m.config = c;
  if (c.run_topo) {
    if (progress) progress("topo: extracting training features");
    const TopoFeatures all = extract_features(train.images, FeatureOptions::from(c), c.resolved_workers());
    m.topo = train_topo(all.select(split.train), ytr, all.select(split.val), yva, c, nullptr, progress);
    m.has_topo = true;
    std::cout << "topo fusion before: alpha=" << m.topo.search_before.weights.alpha
              << " beta=" << m.topo.search_before.weights.beta << " val=" << m.topo.search_before.accuracy << "\n"
              << "topo fusion after:  alpha=" << m.topo.search_after.weights.alpha
              << " beta=" << m.topo.search_after.weights.beta << " val=" << m.topo.search_after.accuracy << "\n";
  }
  if (c.run_naive) {
    if (progress) progress("naive: training");
    m.naive = train_naive(xtr, ytr, c, c.classes());
    m.has_naive = true;
  }
  save_model(m, model_path);
  std::cout << "saved " << model_path << "\n";
  return 0;
}

int cmd_eval(const ConfigArgs& a, const std::string& model_path, const std::string& corrupt) {
  SavedModel m = load_model(model_path);
  RunConfig c = m.config;
  if (!a.mnist_dir.empty()) c.mnist_dir = a.mnist_dir;
  if (a.workers >= 0) c.workers = static_cast<unsigned>(a.workers);
  if (a.test_limit >= 0) c.test_limit = static_cast<std::size_t>(a.test_limit);
  const unsigned workers = c.resolved_workers();
  const auto [train, test] = load_datasets(c);
  (void)train;
  const CorruptionSpec spec = CorruptionSpec::parse(corrupt);
  const auto images = corrupt_all(spec, test.images, workers);

  nlohmann::ordered_json j;
  j["model"] = model_path;
  j["corruption"] = spec.to_string();
  j["test"] = test.size();
  if (m.has_topo) {
    const auto [before, after] = predict_topo(m.topo, extract_features(images, FeatureOptions::from(c), workers), workers);
    j["topo"] = {{"accuracy_before", accuracy(before, test.labels)}, {"accuracy_after", accuracy(after, test.labels)}};
  }
  if (m.has_naive) {
    const auto codes = m.naive.encoder.encode_batch(images, workers);
    std::vector<std::size_t> before(codes.size()), after(codes.size());
    parallel_for(codes.size(), workers, [&](std::size_t i) {
      before[i] = m.naive.before.predict(codes[i]);
      after[i] = m.naive.after.predict(codes[i]);
    });
    j["naive"] = {{"accuracy_before", accuracy(before, test.labels)}, {"accuracy_after", accuracy(after, test.labels)}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_features(const ConfigArgs& a, const std::string& split, const std::string& prefix, const std::string& corrupt) {
  const RunConfig c = resolve(a);
  LabeledDataset data = c.dataset == "emnist" ? load_emnist_letters(c.emnist_dir, split == "t10k" ? "test" : split)
                                              : load_mnist(c.mnist_dir, split);
  const std::size_t limit = split == "train" ? c.train_limit : c.test_limit;
  if (limit > 0) data = data.head(limit);
  const unsigned workers = c.resolved_workers();
  const CorruptionSpec spec = CorruptionSpec::parse(corrupt);
  const auto images = corrupt_all(spec, data.images, workers);
  const FeatureOptions fo = FeatureOptions::from(c);

  PrimitiveOptions po;
  po.max_holes = fo.max_holes;
  po.harmonics = fo.harmonics;
  po.samples = fo.samples;
  std::vector<PrimitiveSet> prims(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) { prims[i] = extract_primitives(images[i], po); });
  const TopoFeatures f = extract_features(images, fo, workers);

  std::ofstream jsonl(prefix + ".primitives.jsonl");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& p = prims[i];
    nlohmann::ordered_json r;
    r["index"] = i;
    r["label"] = data.labels[i];
    r["empty"] = p.empty;
    r["hole_count"] = p.hole_count;
    r["frame"] = {{"centroid", {p.frame.centroid.x, p.frame.centroid.y}},
                  {"scale", p.frame.scale},
                  {"angle", p.frame.angle},
                  {"degenerate", p.frame.degenerate},
                  {"orientation_ambiguous", p.frame.orientation_ambiguous}};
    r["outer_area"] = p.outer_area;
    r["outer_perimeter"] = p.outer_perimeter;
    nlohmann::ordered_json contour = nlohmann::ordered_json::array();
    for (const auto& q : p.outer.points) contour.push_back({q.x, q.y});
    r["outer_contour"] = contour;
    nlohmann::ordered_json holes = nlohmann::ordered_json::array();
    for (const auto& h : p.holes) holes.push_back(h.to_vector());
    r["holes"] = holes;
    jsonl << r.dump() << '\n';
  }

  // Row i: [hog..., zernike..., holes (max_holes x width)..., hole mask...]
  // as little-endian float32.
  const std::size_t width = f.hog.cols + f.zernike.cols + f.max_holes * f.hole_width + f.max_holes;
  std::ofstream bin(prefix + ".features.bin", std::ios::binary);
  std::vector<unsigned char> row(width * 4);
  for (std::size_t i = 0; i < f.count; ++i) {
    std::size_t k = 0;
    auto put = [&](float v) {
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      for (int b = 0; b < 4; ++b) row[k++] = static_cast<unsigned char>(u >> (8 * b));
    };
    for (float v : f.hog.row(i)) put(v);
    for (float v : f.zernike.row(i)) put(v);
    for (double v : f.hole_rows(i)) put(static_cast<float>(v));
    for (auto v : f.hole_mask(i)) put(static_cast<float>(v));
    bin.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  nlohmann::ordered_json schema;
  schema["rows"] = f.count;
  schema["row_floats"] = width;
  schema["dtype"] = "float32";
  schema["byte_order"] = "little";
  schema["corruption"] = spec.to_string();
  schema["blocks"] = {
      {{"name", "hog"}, {"offset", 0}, {"length", f.hog.cols}},
      {{"name", "zernike"}, {"offset", f.hog.cols}, {"length", f.zernike.cols}},
      {{"name", "holes"}, {"offset", f.hog.cols + f.zernike.cols}, {"length", f.max_holes * f.hole_width},
       {"shape", {f.max_holes, f.hole_width}},
       {"fields", "fourier[" + std::to_string(fo.harmonics) + "], canon_y, canon_x, rel_area, rel_perimeter"}},
      {{"name", "hole_mask"}, {"offset", f.hog.cols + f.zernike.cols + f.max_holes * f.hole_width},
       {"length", f.max_holes}},
  };
  schema["labels"] = data.labels;
  std::ofstream(prefix + ".features.json") << schema.dump(2) << '\n';
  std::cout << "wrote " << prefix << ".primitives.jsonl, .features.bin, .features.json (" << f.count << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-guided hyperdimensional glyph classifier"};
  app.require_subcommand(1);

  ConfigArgs run_args, base_args, train_args, eval_args, feat_args;
  auto* run = app.add_subcommand("run", "Train both models and evaluate the corruption suite");
  add_config_options(run, run_args);
  auto* baseline = app.add_subcommand("baseline", "Naive pixel HDC only, over the corruption suite");
  add_config_options(baseline, base_args);

  std::string model_path = "model.thdc";
  auto* train = app.add_subcommand("train", "Train and save a model");
  add_config_options(train, train_args);
  train->add_option("-m,--model", model_path, "Model output path");

  std::string eval_model, corrupt = "kind=none";
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on the test set");
  eval->add_option("-m,--model", eval_model, "Model path")->required()->check(CLI::ExistingFile);
  eval->add_option("--corrupt", corrupt, "Corruption, e.g. kind=rotation,param=20,seed=7");
  eval->add_option("--mnist-dir", eval_args.mnist_dir, "Directory with MNIST IDX files");
  eval->add_option("-j,--workers", eval_args.workers, "Worker threads (0 = all cores)");
  eval->add_option("--test-limit", eval_args.test_limit, "Use the first N test images (0 = all)");

  std::string split = "t10k", prefix = "features", feat_corrupt = "kind=none";
  auto* features = app.add_subcommand("features", "Dump primitives (JSON lines) and descriptor rows (float32)");
  add_config_options(features, feat_args);
  features->add_option("--split", split, "train or t10k")->check(CLI::IsMember({"train", "t10k"}));
  features->add_option("-p,--prefix", prefix, "Output path prefix");
  features->add_option("--corrupt", feat_corrupt, "Corruption applied before extraction");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_args, false);
    if (*baseline) return cmd_run(base_args, true);
    if (*train) return cmd_train(train_args, model_path);
    if (*eval) return cmd_eval(eval_args, eval_model, corrupt);
    if (*features) return cmd_features(feat_args, split, prefix, feat_corrupt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "topohd: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
