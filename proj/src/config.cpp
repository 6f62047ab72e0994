#include "topohd/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace topohd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config: bad value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + value + "' for " + key);
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

unsigned RunConfig::resolved_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> RunConfig::grid() const {
  std::vector<double> out;
  for (std::size_t i = 0; i <= grid_steps; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(grid_steps));
  return out;
}

std::vector<CorruptionSpec> RunConfig::default_suite(std::uint64_t seed) {
  return {
      CorruptionSpec(CorruptionKind::none, 0.0, seed),      CorruptionSpec(CorruptionKind::rotation, 20.0, seed),
      CorruptionSpec(CorruptionKind::gaussian, 0.1, seed),  CorruptionSpec(CorruptionKind::gaussian, 0.2, seed),
      CorruptionSpec(CorruptionKind::salt_pepper, 0.1, seed), CorruptionSpec(CorruptionKind::cutout, 4.0, seed),
      CorruptionSpec(CorruptionKind::zoom, 0.75, seed),
  };
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (dim == 0) fail("dim must be positive");
  if (batch == 0) fail("batch must be positive");
  if (eta < 1) fail("eta must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must lie in (0, 1)");
  if (grid_steps == 0) fail("grid_steps must be positive");
  if (levels < 2) fail("levels must be >= 2");
  if (signature_samples < 16) fail("signature_samples must be >= 16");
  if (2 * shape_harmonics >= signature_samples) fail("shape_harmonics must be < signature_samples / 2");
  if (patch == 0 || patch % 8 != 0) fail("patch must be a positive multiple of 8");
  if (zernike_order < 0) fail("zernike_order must be nonnegative");
  if (dataset != "mnist" && dataset != "emnist") fail("dataset must be mnist or emnist");
  if (suite.empty()) fail("suite must not be empty");
}

std::vector<CorruptionSpec> parse_suite(const std::string& text, std::uint64_t default_seed) {
  std::vector<CorruptionSpec> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item.find("seed=") == std::string::npos) item += ",seed=" + std::to_string(default_seed);
    out.push_back(CorruptionSpec::parse(item));
  }
  return out;
}

std::string format_suite(const std::vector<CorruptionSpec>& suite) {
  std::string out;
  for (const auto& s : suite) {
    if (!out.empty()) out += "; ";
    out += s.to_string();
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  using Setter = std::function<void(const std::string&)>;
  auto size = [&](std::size_t& field) -> Setter { return [&field, key](const std::string& v) { field = parse_number<std::size_t>(key, v); }; };
  auto u64 = [&](std::uint64_t& field) -> Setter { return [&field, key](const std::string& v) { field = parse_number<std::uint64_t>(key, v); }; };
  auto real = [&](double& field) -> Setter { return [&field, key](const std::string& v) { field = parse_number<double>(key, v); }; };
  auto text = [&](std::string& field) -> Setter { return [&field](const std::string& v) { field = v; }; };
  auto flag = [&](bool& field) -> Setter { return [&field, key](const std::string& v) { field = parse_bool(key, v); }; };
  const std::map<std::string, Setter> setters = {
      {"dim", size(dim)},
      {"batch", size(batch)},
      {"epochs", size(epochs)},
      {"eta", [this, key](const std::string& v) { eta = parse_number<std::int32_t>(key, v); }},
      {"val_fraction", real(val_fraction)},
      {"grid_steps", size(grid_steps)},
      {"max_holes", size(max_holes)},
      {"shape_harmonics", size(shape_harmonics)},
      {"signature_samples", size(signature_samples)},
      {"levels", size(levels)},
      {"patch", size(patch)},
      {"zernike_order", [this, key](const std::string& v) { zernike_order = parse_number<int>(key, v); }},
      {"role_zernike_seed", u64(role_zernike_seed)},
      {"role_hog_seed", u64(role_hog_seed)},
      {"role_holes_seed", u64(role_holes_seed)},
      {"hog_projection_seed", u64(hog_projection_seed)},
      {"zernike_projection_seed", u64(zernike_projection_seed)},
      {"hole_seed", u64(hole_seed)},
      {"naive_seed", u64(naive_seed)},
      {"split_seed", u64(split_seed)},
      {"shuffle_seed", u64(shuffle_seed)},
      {"corruption_seed",
       [this, key](const std::string& v) {
         const auto old = corruption_seed;
         corruption_seed = parse_number<std::uint64_t>(key, v);
         // Entries that carried the previous default follow the new one.
         for (auto& s : suite) {
           if (s.seed() == old) s = CorruptionSpec(s.kind(), s.param(), corruption_seed);
         }
       }},
      {"dataset", text(dataset)},
      {"mnist_dir", text(mnist_dir)},
      {"emnist_dir", text(emnist_dir)},
      {"train_limit", size(train_limit)},
      {"test_limit", size(test_limit)},
      {"suite", [this](const std::string& v) { suite = parse_suite(v, corruption_seed); }},
      {"run_topo", flag(run_topo)},
      {"run_naive", flag(run_naive)},
      {"output_dir", text(output_dir)},
      {"workers", [this, key](const std::string& v) { workers = parse_number<unsigned>(key, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second(value);
}

std::map<std::string, std::string> RunConfig::entries(bool include_runtime) const {
  std::map<std::string, std::string> out = {
      {"dim", std::to_string(dim)},
      {"batch", std::to_string(batch)},
      {"epochs", std::to_string(epochs)},
      {"eta", std::to_string(eta)},
      {"val_fraction", format_double(val_fraction)},
      {"grid_steps", std::to_string(grid_steps)},
      {"max_holes", std::to_string(max_holes)},
      {"shape_harmonics", std::to_string(shape_harmonics)},
      {"signature_samples", std::to_string(signature_samples)},
      {"levels", std::to_string(levels)},
      {"patch", std::to_string(patch)},
      {"zernike_order", std::to_string(zernike_order)},
      {"role_zernike_seed", std::to_string(role_zernike_seed)},
      {"role_hog_seed", std::to_string(role_hog_seed)},
      {"role_holes_seed", std::to_string(role_holes_seed)},
      {"hog_projection_seed", std::to_string(hog_projection_seed)},
      {"zernike_projection_seed", std::to_string(zernike_projection_seed)},
      {"hole_seed", std::to_string(hole_seed)},
      {"naive_seed", std::to_string(naive_seed)},
      {"split_seed", std::to_string(split_seed)},
      {"shuffle_seed", std::to_string(shuffle_seed)},
      {"corruption_seed", std::to_string(corruption_seed)},
      {"dataset", dataset},
      {"train_limit", std::to_string(train_limit)},
      {"test_limit", std::to_string(test_limit)},
      {"suite", format_suite(suite)},
      {"run_topo", run_topo ? "true" : "false"},
      {"run_naive", run_naive ? "true" : "false"},
  };
  if (include_runtime) {
    out["mnist_dir"] = mnist_dir;
    out["emnist_dir"] = emnist_dir;
    out["output_dir"] = output_dir;
    out["workers"] = std::to_string(workers);
  }
  return out;
}

void load_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config file");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.entries(true)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace topohd
