#pragma once

// Run configuration: flat "key = value" text with '#' comments. Defaults
// follow the reference hyperparameters; every key can be overridden from the
// command line with the same name.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "topohd/corruptions.hpp"

namespace topohd {

struct RunConfig {
  // Hypervectors and training.
  std::size_t dim = 10000;
  std::size_t batch = 512;
  std::size_t epochs = 20;
  std::int32_t eta = 1;
  double val_fraction = 0.1;
  std::size_t grid_steps = 10;  // fusion grid {0, 1/steps, ..., 1}

  // Hole channel.
  std::size_t max_holes = 4;
  std::size_t shape_harmonics = 12;
  std::size_t signature_samples = 64;
  std::size_t levels = 101;

  // Outer-shape channels.
  std::size_t patch = 32;
  int zernike_order = 8;

  // Seeds.
  std::uint64_t role_zernike_seed = 999;
  std::uint64_t role_hog_seed = 1000;
  std::uint64_t role_holes_seed = 1001;
  std::uint64_t hog_projection_seed = 2;
  std::uint64_t zernike_projection_seed = 1;
  std::uint64_t hole_seed = 123;
  std::uint64_t naive_seed = 7;
  std::uint64_t split_seed = 17;
  std::uint64_t shuffle_seed = 29;
  std::uint64_t corruption_seed = 31;

  // Data.
  std::string dataset = "mnist";  // mnist | emnist
  std::string mnist_dir = "data/mnist-desk";
  std::string emnist_dir = "data/emnist";
  std::size_t train_limit = 5000;  // 0 = all
  std::size_t test_limit = 2000;   // 0 = all

  // Test-time corruption settings evaluated by `run`.
  std::vector<CorruptionSpec> suite = default_suite(31);
  bool run_topo = true;
  bool run_naive = true;

  // Runtime only: never affects results, excluded from report comparisons.
  std::string output_dir = "out";
  unsigned workers = 0;  // 0 = hardware concurrency

  std::size_t classes() const { return dataset == "emnist" ? 26 : 10; }
  std::size_t hole_width() const { return shape_harmonics + 4; }
  unsigned resolved_workers() const;
  std::vector<double> grid() const;

  // Clean, rotation 20, Gaussian 0.1 and 0.2, salt-and-pepper 0.1, cutout 4,
  // zoom 0.75.
  static std::vector<CorruptionSpec> default_suite(std::uint64_t seed);

  // Throws std::invalid_argument for out-of-range values.
  void validate() const;

  // key/value view used for files, CLI overrides and the report echo.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> entries(bool include_runtime) const;
};

// "kind=rotation,param=20; kind=gaussian,param=0.1"; entries without an
// explicit seed get `default_seed`.
std::vector<CorruptionSpec> parse_suite(const std::string& text, std::uint64_t default_seed);
std::string format_suite(const std::vector<CorruptionSpec>& suite);

// Applies a config file on top of `config`. Errors name the file and line.
void load_config_file(const std::filesystem::path& path, RunConfig& config);
std::string to_config_text(const RunConfig& config);

}  // namespace topohd
