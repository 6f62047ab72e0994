#pragma once

// End-to-end runner: stratified split, per-image feature extraction, encoder
// fitting, prototype accumulation, late-fusion weight search, OnlineHD
// adaptation and evaluation under a corruption suite, for the topology-guided
// model and the naive pixel baseline.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "topohd/config.hpp"
#include "topohd/corruptions.hpp"
#include "topohd/dataset.hpp"
#include "topohd/encoders.hpp"
#include "topohd/hypervector.hpp"
#include "topohd/prototype_bank.hpp"

namespace topohd {

inline constexpr const char* kVersion = "1.0.0";

using Progress = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Splits

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Per class, round(fraction * n_c) samples (at least one, at most n_c - 1)
// go to validation, chosen by a seeded shuffle. Both index lists are sorted.
// Throws for fraction outside (0, 1) or a class with fewer than two samples.
Split stratified_split(const std::vector<int>& labels, std::size_t classes, double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Features

struct FeatureOptions {
  std::size_t patch = 32;
  int zernike_order = 8;
  std::size_t max_holes = 4;
  std::size_t harmonics = 12;
  std::size_t samples = 64;

  static FeatureOptions from(const RunConfig& config);
  std::size_t hole_width() const { return harmonics + 4; }
};

// Channel features for a set of images. Hole descriptors are padded or
// truncated to max_holes slots with a validity mask.
struct TopoFeatures {
  std::size_t count = 0;
  std::size_t max_holes = 0;
  std::size_t hole_width = 0;
  FeatureMatrix hog;
  FeatureMatrix zernike;
  std::vector<double> holes;           // count x max_holes x hole_width
  std::vector<std::uint8_t> hole_valid;  // count x max_holes
  std::vector<std::size_t> hole_count;   // before truncation
  std::vector<std::uint8_t> empty;       // no foreground

  std::span<const double> hole_rows(std::size_t i) const {
    return {holes.data() + i * max_holes * hole_width, max_holes * hole_width};
  }
  std::span<const std::uint8_t> hole_mask(std::size_t i) const {
    return {hole_valid.data() + i * max_holes, max_holes};
  }
  // Valid descriptors of the selected images, flattened (n_valid x width).
  std::vector<double> valid_hole_rows(const std::vector<std::size_t>& rows) const;
  TopoFeatures select(const std::vector<std::size_t>& rows) const;
};

TopoFeatures extract_features(const std::vector<GrayImage>& images, const FeatureOptions& options, unsigned workers);

// ---------------------------------------------------------------------------
// Topology-guided model

enum ChannelIndex : std::size_t { kHog = 0, kZernike = 1, kHoles = 2 };
inline constexpr std::size_t kChannels = 3;

struct FusionWeights {
  double alpha = 0.0;  // Zernike channel
  double beta = 0.0;   // hole channel
  bool operator==(const FusionWeights&) const = default;
};

struct TopoEncoders {
  ProjectionEncoder hog;
  ProjectionEncoder zernike;
  HoleSetEncoder holes;
  std::array<Hypervector, kChannels> roles;

  static TopoEncoders fit(const TopoFeatures& train, const RunConfig& config);
  static std::array<Hypervector, kChannels> make_roles(const RunConfig& config);
};

// Role-bound channel hypervectors, one list per channel.
struct ChannelCodes {
  std::array<std::vector<Hypervector>, kChannels> codes;
  std::size_t size() const noexcept { return codes[0].size(); }
};

ChannelCodes encode_channels(const TopoEncoders& encoders, const TopoFeatures& features, unsigned workers);

using Banks = std::array<PrototypeBank, kChannels>;

// Per-channel cosine scores, each n x C row-major.
struct ChannelScores {
  std::size_t count = 0;
  std::size_t classes = 0;
  std::array<std::vector<double>, kChannels> scores;

  const double* row(std::size_t channel, std::size_t i) const { return scores[channel].data() + i * classes; }
};

ChannelScores score_channels(const Banks& banks, const ChannelCodes& codes, unsigned workers);

// argmax_c hog_c + alpha zer_c + beta hole_c, lowest class on ties.
std::size_t fuse_and_predict(const double* hog, const double* zer, const double* hole, std::size_t classes,
                             FusionWeights weights);
std::vector<std::size_t> fuse_and_predict(const ChannelScores& scores, FusionWeights weights);

struct GridSearchResult {
  FusionWeights weights;
  double accuracy = 0.0;
  std::vector<double> accuracies;  // grid.size() x grid.size(), alpha-major
};

// Exhaustive search over grid x grid; ties go to the smallest alpha + beta,
// then the smallest alpha. Throws for an empty validation set.
GridSearchResult grid_search_weights(const ChannelScores& val, const std::vector<int>& labels,
                                     const std::vector<double>& grid);

// One accumulation pass in batches of `batch`, each batch summed into a
// partial bank in parallel and merged in order.
PrototypeBank train_prototypes(Channel channel, const std::vector<Hypervector>& codes, const std::vector<int>& labels,
                               std::size_t classes, std::size_t batch, unsigned workers);

// Epoch permutation used by online_train.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

// OnlineHD epochs with serial semantics: every epoch visits a seeded
// permutation in mini-batches of `batch`, updating one sample at a time.
// Returns the number of updates per epoch.
std::vector<std::size_t> online_train(PrototypeBank& bank, const std::vector<Hypervector>& codes,
                                      const std::vector<int>& labels, std::size_t epochs, std::int32_t eta,
                                      std::size_t batch, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Naive pixel baseline

class NaiveEncoder {
 public:
  NaiveEncoder() = default;
  NaiveEncoder(std::size_t dim, std::size_t height, std::size_t width, std::size_t levels, std::uint64_t seed);

  // sign(sum_p position_p * level(quantize(I_p))), unit weights.
  Hypervector encode(const GrayImage& img) const;
  std::vector<Hypervector> encode_batch(const std::vector<GrayImage>& images, unsigned workers) const;

  std::size_t dim() const noexcept { return levels_.dim(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  const Hypervector& position(std::size_t pixel) const { return positions_.at(pixel); }
  const LevelTable& levels() const noexcept { return levels_; }

  static constexpr std::uint64_t kLevelTag = 0x4c4556454c53ULL;  // "LEVELS"

 private:
  std::uint64_t seed_ = 0;
  std::size_t height_ = 0, width_ = 0;
  std::vector<Hypervector> positions_;
  LevelTable levels_;
};

// ---------------------------------------------------------------------------
// Experiment

struct ModelResult {
  double before = 0.0;
  double after = 0.0;
  std::vector<std::size_t> confusion_before;  // C x C, rows = true class
  std::vector<std::size_t> confusion_after;
};

struct SettingResult {
  CorruptionSpec spec;
  bool has_topo = false, has_naive = false;
  ModelResult topo;
  ModelResult naive;
};

struct TopoTraining {
  TopoEncoders encoders;
  Banks before;
  Banks after;
  GridSearchResult search_before;
  GridSearchResult search_after;
  ChannelScores val_before;
  ChannelScores val_after;
  std::array<std::vector<std::size_t>, kChannels> online_updates;
};

struct NaiveTraining {
  NaiveEncoder encoder;
  PrototypeBank before;
  PrototypeBank after;
  std::vector<std::size_t> online_updates;
};

struct Timing {
  std::vector<std::pair<std::string, double>> seconds;
  void add(std::string stage, double s) { seconds.emplace_back(std::move(stage), s); }
};

struct RunReport {
  RunConfig config;
  std::string version;
  std::size_t classes = 0;
  std::size_t train_count = 0, val_count = 0, test_count = 0;
  std::vector<std::size_t> test_class_counts;
  bool has_topo = false, has_naive = false;
  FusionWeights weights_before, weights_after;
  double val_accuracy_before = 0.0, val_accuracy_after = 0.0;
  std::array<std::vector<std::size_t>, kChannels> topo_updates;
  std::vector<std::size_t> naive_updates;
  std::vector<SettingResult> settings;
  Timing timing;

  // Kept in memory for verification, not serialized.
  ChannelScores val_scores_before, val_scores_after;
  std::vector<int> val_labels;
};

double accuracy(const std::vector<std::size_t>& predicted, const std::vector<int>& labels);
std::vector<std::size_t> confusion_matrix(const std::vector<std::size_t>& predicted, const std::vector<int>& labels,
                                          std::size_t classes);

TopoTraining train_topo(const TopoFeatures& train, const std::vector<int>& train_labels, const TopoFeatures& val,
                        const std::vector<int>& val_labels, const RunConfig& config, Timing* timing = nullptr,
                        const Progress& progress = {});
// Predictions before and after online training for one test set.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> predict_topo(const TopoTraining& model,
                                                                           const TopoFeatures& test,
                                                                           unsigned workers);

NaiveTraining train_naive(const std::vector<GrayImage>& train, const std::vector<int>& labels,
                          const RunConfig& config, std::size_t classes, Timing* timing = nullptr);

std::vector<GrayImage> corrupt_all(const CorruptionSpec& spec, const std::vector<GrayImage>& images, unsigned workers);

// Loads the configured dataset (train/test limits applied).
std::pair<LabeledDataset, LabeledDataset> load_datasets(const RunConfig& config);

RunReport run_experiment(const RunConfig& config, const LabeledDataset& train, const LabeledDataset& test,
                         const Progress& progress = {});
RunReport run_experiment(const RunConfig& config, const Progress& progress = {});

}  // namespace topohd
