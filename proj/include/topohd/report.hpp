#pragma once

// Report artifacts (report.json, accuracy.csv, confusion matrices) and
// model persistence in the THDC1 container.

#include <filesystem>
#include <string>

#include "topohd/config.hpp"
#include "topohd/pipeline.hpp"

namespace topohd {

// Pretty-printed JSON. With include_runtime = false the "runtime" block
// (timing, worker count, paths) is left out; everything else is a pure
// function of the config and the data.
std::string report_json(const RunReport& report, bool include_runtime = true);

// accuracy.csv: one row per setting, columns model x before/after.
std::string accuracy_csv(const RunReport& report);
// C x C integer counts, rows = true class.
std::string confusion_csv(const std::vector<std::size_t>& matrix, std::size_t classes);

// Writes report.json, accuracy.csv and confusion_<setting>_<model>.csv into
// dir (created if needed). Returns the files written.
std::vector<std::filesystem::path> write_report(const RunReport& report, const std::filesystem::path& dir);

// Trained models as produced by `train` and consumed by `eval`.
struct SavedModel {
  RunConfig config;
  bool has_topo = false;
  bool has_naive = false;
  TopoTraining topo;    // val scores are not persisted
  NaiveTraining naive;  // update counts are not persisted
};

void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace topohd
