#include "topohd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "topohd/moments.hpp"
#include "topohd/parallel.hpp"
#include "topohd/rng.hpp"
#include "topohd/topology.hpp"

namespace topohd {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v.at(r));
  return out;
}

void note(const Progress& progress, const std::string& msg) {
  if (progress) progress(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Split

Split stratified_split(const std::vector<int>& labels, std::size_t classes, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("stratified_split: validation fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw std::invalid_argument("stratified_split: label out of range at index " + std::to_string(i));
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Split out;
  for (std::size_t c = 0; c < classes; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw std::invalid_argument("stratified_split: class " + std::to_string(c) + " has fewer than two samples");
    }
    Rng rng(derive_seed(seed, c));
    shuffle(idx, rng);
    const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    const std::size_t nval = std::clamp<std::size_t>(want, 1, idx.size() - 1);
    out.val.insert(out.val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nval));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(nval), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

// ---------------------------------------------------------------------------
// Features

FeatureOptions FeatureOptions::from(const RunConfig& config) {
  FeatureOptions o;
  o.patch = config.patch;
  o.zernike_order = config.zernike_order;
  o.max_holes = config.max_holes;
  o.harmonics = config.shape_harmonics;
  o.samples = config.signature_samples;
  return o;
}

std::vector<double> TopoFeatures::valid_hole_rows(const std::vector<std::size_t>& rows) const {
  std::vector<double> out;
  for (auto i : rows) {
    for (std::size_t h = 0; h < max_holes; ++h) {
      if (!hole_valid[i * max_holes + h]) continue;
      const double* src = holes.data() + (i * max_holes + h) * hole_width;
      out.insert(out.end(), src, src + hole_width);
    }
  }
  return out;
}

TopoFeatures TopoFeatures::select(const std::vector<std::size_t>& rows) const {
  TopoFeatures out;
  out.count = rows.size();
  out.max_holes = max_holes;
  out.hole_width = hole_width;
  out.hog = FeatureMatrix(rows.size(), hog.cols);
  out.zernike = FeatureMatrix(rows.size(), zernike.cols);
  out.holes.reserve(rows.size() * max_holes * hole_width);
  out.hole_valid.reserve(rows.size() * max_holes);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= count) throw std::out_of_range("feature row out of range");
    std::copy(hog.row(i).begin(), hog.row(i).end(), out.hog.row(k).begin());
    std::copy(zernike.row(i).begin(), zernike.row(i).end(), out.zernike.row(k).begin());
    const auto hr = hole_rows(i);
    out.holes.insert(out.holes.end(), hr.begin(), hr.end());
    const auto hm = hole_mask(i);
    out.hole_valid.insert(out.hole_valid.end(), hm.begin(), hm.end());
    out.hole_count.push_back(hole_count[i]);
    out.empty.push_back(empty[i]);
  }
  return out;
}

TopoFeatures extract_features(const std::vector<GrayImage>& images, const FeatureOptions& options, unsigned workers) {
  ZernikeConfig zc;
  zc.order = options.zernike_order;
  zc.patch = options.patch;
  zc.radius0 = zc.radius1 = static_cast<double>(options.patch) / 2.0;
  const SpzExtractor spz(zc);
  const HogConfig hc;
  PrimitiveOptions po;
  po.max_holes = options.max_holes;
  po.harmonics = options.harmonics;
  po.samples = options.samples;

  TopoFeatures out;
  const std::size_t n = images.size();
  out.count = n;
  out.max_holes = options.max_holes;
  out.hole_width = options.hole_width();
  out.hog = FeatureMatrix(n, hc.descriptor_size(options.patch, options.patch));
  out.zernike = FeatureMatrix(n, zc.descriptor_size());
  out.holes.assign(n * out.max_holes * out.hole_width, 0.0);
  out.hole_valid.assign(n * out.max_holes, 0);
  out.hole_count.assign(n, 0);
  out.empty.assign(n, 0);

  parallel_for(n, workers, [&](std::size_t i) {
    const PrimitiveSet prim = extract_primitives(images[i], po);
    const GrayImage patch = normalize_glyph(images[i], prim, options.patch);
    const auto z = spz.descriptor(patch);
    const auto h = hog_descriptor(patch, hc);
    std::copy(z.begin(), z.end(), out.zernike.row(i).begin());
    std::copy(h.begin(), h.end(), out.hog.row(i).begin());
    out.empty[i] = prim.empty ? 1 : 0;
    out.hole_count[i] = prim.hole_count;
    for (std::size_t k = 0; k < prim.holes.size() && k < out.max_holes; ++k) {
      const auto v = prim.holes[k].to_vector();
      std::copy(v.begin(), v.end(), out.holes.begin() + static_cast<std::ptrdiff_t>((i * out.max_holes + k) * out.hole_width));
      out.hole_valid[i * out.max_holes + k] = 1;
    }
  }, 4);
  return out;
}

// ---------------------------------------------------------------------------
// Encoders and scores

std::array<Hypervector, kChannels> TopoEncoders::make_roles(const RunConfig& config) {
  return {Hypervector::random(config.dim, config.role_hog_seed),
          Hypervector::random(config.dim, config.role_zernike_seed),
          Hypervector::random(config.dim, config.role_holes_seed)};
}

TopoEncoders TopoEncoders::fit(const TopoFeatures& train, const RunConfig& config) {
  TopoEncoders e;
  e.hog = ProjectionEncoder::fit(train.hog, config.dim, config.hog_projection_seed);
  e.zernike = ProjectionEncoder::fit(train.zernike, config.dim, config.zernike_projection_seed);
  std::vector<std::size_t> all(train.count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  e.holes = HoleSetEncoder::fit(train.valid_hole_rows(all), train.hole_width, config.dim, config.levels, config.hole_seed);
  e.roles = make_roles(config);
  return e;
}

ChannelCodes encode_channels(const TopoEncoders& encoders, const TopoFeatures& features, unsigned workers) {
  ChannelCodes out;
  out.codes[kHog] = encoders.hog.encode_batch(features.hog, workers);
  out.codes[kZernike] = encoders.zernike.encode_batch(features.zernike, workers);
  out.codes[kHoles].resize(features.count);
  parallel_for(features.count, workers, [&](std::size_t i) {
    out.codes[kHog][i] = bind(out.codes[kHog][i], encoders.roles[kHog]);
    out.codes[kZernike][i] = bind(out.codes[kZernike][i], encoders.roles[kZernike]);
    out.codes[kHoles][i] =
        bind(encoders.holes.encode(features.hole_rows(i), features.hole_mask(i)), encoders.roles[kHoles]);
  });
  return out;
}

ChannelScores score_channels(const Banks& banks, const ChannelCodes& codes, unsigned workers) {
  ChannelScores out;
  out.count = codes.size();
  out.classes = banks[0].classes();
  for (auto& s : out.scores) s.assign(out.count * out.classes, 0.0);
  parallel_for(out.count, workers, [&](std::size_t i) {
    for (std::size_t t = 0; t < kChannels; ++t) {
      const auto s = banks[t].scores(codes.codes[t][i]);
      std::copy(s.begin(), s.end(), out.scores[t].begin() + static_cast<std::ptrdiff_t>(i * out.classes));
    }
  });
  return out;
}

std::size_t fuse_and_predict(const double* hog, const double* zer, const double* hole, std::size_t classes,
                             FusionWeights weights) {
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double s = hog[c] + weights.alpha * zer[c] + weights.beta * hole[c];
    if (c == 0 || s > best_score) {
      best = c;
      best_score = s;
    }
  }
  return best;
}

std::vector<std::size_t> fuse_and_predict(const ChannelScores& scores, FusionWeights weights) {
  std::vector<std::size_t> out(scores.count);
  for (std::size_t i = 0; i < scores.count; ++i) {
    out[i] = fuse_and_predict(scores.row(kHog, i), scores.row(kZernike, i), scores.row(kHoles, i), scores.classes,
                              weights);
  }
  return out;
}

GridSearchResult grid_search_weights(const ChannelScores& val, const std::vector<int>& labels,
                                     const std::vector<double>& grid) {
  if (val.count == 0) throw std::invalid_argument("grid search needs a nonempty validation set");
  if (labels.size() != val.count) throw std::invalid_argument("grid search: label count mismatch");
  if (grid.empty()) throw std::invalid_argument("grid search: empty grid");
  GridSearchResult out;
  out.accuracies.reserve(grid.size() * grid.size());
  std::size_t best_correct = 0, best_i = 0, best_j = 0;
  bool first = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const FusionWeights w{grid[i], grid[j]};
      std::size_t correct = 0;
      for (std::size_t k = 0; k < val.count; ++k) {
        const auto p = fuse_and_predict(val.row(kHog, k), val.row(kZernike, k), val.row(kHoles, k), val.classes, w);
        correct += static_cast<int>(p) == labels[k] ? 1 : 0;
      }
      out.accuracies.push_back(static_cast<double>(correct) / static_cast<double>(val.count));
      // Sums such as 0.1 + 0.2 and 0.3 + 0.0 must compare as equal.
      const double sum = grid[i] + grid[j], best_sum = grid[best_i] + grid[best_j];
      const bool same_sum = std::abs(sum - best_sum) <= 1e-9;
      const bool better = first || correct > best_correct ||
                          (correct == best_correct &&
                           ((!same_sum && sum < best_sum) || (same_sum && grid[i] < grid[best_i])));
      if (better) {
        best_correct = correct;
        best_i = i;
        best_j = j;
        first = false;
      }
    }
  }
  out.weights = {grid[best_i], grid[best_j]};
  out.accuracy = static_cast<double>(best_correct) / static_cast<double>(val.count);
  return out;
}

// ---------------------------------------------------------------------------
// Training

PrototypeBank train_prototypes(Channel channel, const std::vector<Hypervector>& codes, const std::vector<int>& labels,
                               std::size_t classes, std::size_t batch, unsigned workers) {
  if (codes.size() != labels.size()) throw std::invalid_argument("train_prototypes: label count mismatch");
  if (batch == 0) throw std::invalid_argument("train_prototypes: batch must be positive");
  const std::size_t dim = codes.empty() ? 0 : codes[0].dim();
  PrototypeBank bank(channel, classes, std::max<std::size_t>(dim, 1));
  if (codes.empty()) return bank;
  bank = PrototypeBank(channel, classes, dim);
  const std::size_t batches = (codes.size() + batch - 1) / batch;
  std::vector<PrototypeBank> partial(batches);
  parallel_for(batches, workers, [&](std::size_t b) {
    PrototypeBank p(channel, classes, dim);
    for (std::size_t i = b * batch; i < std::min(codes.size(), (b + 1) * batch); ++i) {
      p.accumulate(codes[i], static_cast<std::size_t>(labels[i]));
    }
    partial[b] = std::move(p);
  }, 1);
  for (const auto& p : partial) bank.merge(p);
  return bank;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, epoch));
  shuffle(order, rng);
  return order;
}

std::vector<std::size_t> online_train(PrototypeBank& bank, const std::vector<Hypervector>& codes,
                                      const std::vector<int>& labels, std::size_t epochs, std::int32_t eta,
                                      std::size_t batch, std::uint64_t seed) {
  if (codes.size() != labels.size()) throw std::invalid_argument("online_train: label count mismatch");
  if (batch == 0) throw std::invalid_argument("online_train: batch must be positive");
  std::vector<std::size_t> updates;
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto order = epoch_order(codes.size(), seed, e);
    std::size_t changed = 0;
    // Mini-batches only group the visiting order; updates stay serial.
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        if (bank.online_update(codes[i], static_cast<std::size_t>(labels[i]), eta)) ++changed;
      }
    }
    updates.push_back(changed);
  }
  return updates;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

double accuracy(const std::vector<std::size_t>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size()) throw std::invalid_argument("accuracy: size mismatch");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += static_cast<int>(predicted[i]) == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<std::size_t> confusion_matrix(const std::vector<std::size_t>& predicted, const std::vector<int>& labels,
                                          std::size_t classes) {
  if (predicted.size() != labels.size()) throw std::invalid_argument("confusion: size mismatch");
  std::vector<std::size_t> m(classes * classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) ++m.at(static_cast<std::size_t>(labels[i]) * classes + predicted[i]);
  return m;
}

std::vector<GrayImage> corrupt_all(const CorruptionSpec& spec, const std::vector<GrayImage>& images, unsigned workers) {
  std::vector<GrayImage> out(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) { out[i] = apply(spec, images[i], i); });
  return out;
}

TopoTraining train_topo(const TopoFeatures& train, const std::vector<int>& train_labels, const TopoFeatures& val,
                        const std::vector<int>& val_labels, const RunConfig& config, Timing* timing,
                        const Progress& progress) {
  const unsigned workers = config.resolved_workers();
  const std::size_t classes = config.classes();
  Stopwatch clock;
  TopoTraining m;
  note(progress, "topo: fitting encoders");
  m.encoders = TopoEncoders::fit(train, config);
  note(progress, "topo: encoding train/val");
  const ChannelCodes tr = encode_channels(m.encoders, train, workers);
  const ChannelCodes va = encode_channels(m.encoders, val, workers);
  if (timing) timing->add("topo_fit_encode", clock.lap());

  const Channel channels[kChannels] = {Channel::hog, Channel::zernike, Channel::holes};
  for (std::size_t t = 0; t < kChannels; ++t) {
    m.before[t] = train_prototypes(channels[t], tr.codes[t], train_labels, classes, config.batch, workers);
  }
  m.val_before = score_channels(m.before, va, workers);
  m.search_before = grid_search_weights(m.val_before, val_labels, config.grid());
  if (timing) timing->add("topo_accumulate_search", clock.lap());

  note(progress, "topo: online training");
  m.after = m.before;
  parallel_for(kChannels, workers, [&](std::size_t t) {
    m.online_updates[t] = online_train(m.after[t], tr.codes[t], train_labels, config.epochs, config.eta, config.batch,
                                       config.shuffle_seed);
  }, 1);
  m.val_after = score_channels(m.after, va, workers);
  m.search_after = grid_search_weights(m.val_after, val_labels, config.grid());
  if (timing) timing->add("topo_online", clock.lap());
  return m;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> predict_topo(const TopoTraining& model,
                                                                           const TopoFeatures& test,
                                                                           unsigned workers) {
  const ChannelCodes codes = encode_channels(model.encoders, test, workers);
  return {fuse_and_predict(score_channels(model.before, codes, workers), model.search_before.weights),
          fuse_and_predict(score_channels(model.after, codes, workers), model.search_after.weights)};
}

NaiveTraining train_naive(const std::vector<GrayImage>& train, const std::vector<int>& labels, const RunConfig& config,
                          std::size_t classes, Timing* timing) {
  if (train.empty()) throw std::invalid_argument("naive baseline needs training images");
  const unsigned workers = config.resolved_workers();
  Stopwatch clock;
  NaiveTraining m;
  m.encoder = NaiveEncoder(config.dim, train[0].height, train[0].width, config.levels, config.naive_seed);
  const auto codes = m.encoder.encode_batch(train, workers);
  m.before = train_prototypes(Channel::pixel, codes, labels, classes, config.batch, workers);
  m.after = m.before;
  m.online_updates = online_train(m.after, codes, labels, config.epochs, config.eta, config.batch, config.shuffle_seed);
  if (timing) timing->add("naive_train", clock.lap());
  return m;
}

std::pair<LabeledDataset, LabeledDataset> load_datasets(const RunConfig& config) {
  LabeledDataset train, test;
  if (config.dataset == "emnist") {
    train = load_emnist_letters(config.emnist_dir, "train");
    test = load_emnist_letters(config.emnist_dir, "test");
  } else {
    train = load_mnist(config.mnist_dir, "train");
    test = load_mnist(config.mnist_dir, "t10k");
  }
  if (config.train_limit > 0) train = train.head(config.train_limit);
  if (config.test_limit > 0) test = test.head(config.test_limit);
  return {std::move(train), std::move(test)};
}

RunReport run_experiment(const RunConfig& config, const LabeledDataset& train, const LabeledDataset& test,
                         const Progress& progress) {
  config.validate();
  const unsigned workers = config.resolved_workers();
  const std::size_t classes = config.classes();
  Stopwatch clock, total;
  RunReport report;
  report.config = config;
  report.version = kVersion;
  report.classes = classes;
  report.has_topo = config.run_topo;
  report.has_naive = config.run_naive;

  const Split split = stratified_split(train.labels, classes, config.val_fraction, config.split_seed);
  const auto train_labels = pick(train.labels, split.train);
  const auto val_labels = pick(train.labels, split.val);
  report.train_count = split.train.size();
  report.val_count = split.val.size();
  report.test_count = test.size();
  std::vector<int> test_labels = test.labels;
  {
    LabeledDataset counted = test;
    counted.classes = classes;
    report.test_class_counts = counted.class_counts();
  }
  report.timing.add("split", clock.lap());

  const FeatureOptions fo = FeatureOptions::from(config);
  TopoTraining topo;
  if (config.run_topo) {
    note(progress, "topo: extracting training features");
    const TopoFeatures all = extract_features(train.images, fo, workers);
    report.timing.add("topo_train_features", clock.lap());
    topo = train_topo(all.select(split.train), train_labels, all.select(split.val), val_labels, config, &report.timing,
                      progress);
    report.weights_before = topo.search_before.weights;
    report.weights_after = topo.search_after.weights;
    report.val_accuracy_before = topo.search_before.accuracy;
    report.val_accuracy_after = topo.search_after.accuracy;
    report.topo_updates = topo.online_updates;
    report.val_scores_before = topo.val_before;
    report.val_scores_after = topo.val_after;
    report.val_labels = val_labels;
    clock.lap();
  }

  NaiveTraining naive;
  if (config.run_naive) {
    note(progress, "naive: training");
    naive = train_naive(pick(train.images, split.train), train_labels, config, classes, &report.timing);
    report.naive_updates = naive.online_updates;
    clock.lap();
  }

  for (const auto& spec : config.suite) {
    note(progress, "evaluating " + spec.label());
    SettingResult r;
    r.spec = spec;
    const auto images = corrupt_all(spec, test.images, workers);
    if (config.run_topo) {
      const auto [before, after] = predict_topo(topo, extract_features(images, fo, workers), workers);
      r.has_topo = true;
      r.topo = {accuracy(before, test_labels), accuracy(after, test_labels),
                confusion_matrix(before, test_labels, classes), confusion_matrix(after, test_labels, classes)};
    }
    if (config.run_naive) {
      const auto codes = naive.encoder.encode_batch(images, workers);
      std::vector<std::size_t> before(codes.size()), after(codes.size());
      parallel_for(codes.size(), workers, [&](std::size_t i) {
        before[i] = naive.before.predict(codes[i]);
        after[i] = naive.after.predict(codes[i]);
      });
      r.has_naive = true;
      r.naive = {accuracy(before, test_labels), accuracy(after, test_labels),
                 confusion_matrix(before, test_labels, classes), confusion_matrix(after, test_labels, classes)};
    }
    report.settings.push_back(std::move(r));
    report.timing.add("eval_" + spec.label(), clock.lap());
  }
  report.timing.add("total", total.lap());
  return report;
}

RunReport run_experiment(const RunConfig& config, const Progress& progress) {
  const auto [train, test] = load_datasets(config);
  return run_experiment(config, train, test, progress);
}

}  // namespace topohd
