#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppd {

struct ExperimentInfo {
  std::string id;
  std::string figure;
  std::string summary;
  /// Every tunable parameter with its default value.
  nlohmann::json defaults;
  /// CSV files written into the output directory.
  std::vector<std::string> outputs;
};

const std::vector<ExperimentInfo>& experiment_registry();
/// Throws std::invalid_argument for unknown ids.
const ExperimentInfo& find_experiment(const std::string& id);

struct ExperimentSpec {
  std::string id;
  /// Overrides merged onto the defaults; unknown keys are rejected.
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  unsigned jobs = 0;
};

struct ExperimentReport {
  std::vector<std::filesystem::path> files;
  /// Headline numbers (also stored in the metadata record).
  nlohmann::json summary;
  /// Contents of metadata.json: id, seed, effective config, version,
  /// compiler, wall time, files and summary.
  nlohmann::json metadata;
  /// Human-readable table for the terminal.
  std::string table;
};

/// Runs one experiment and writes its CSVs plus `metadata.json` into
/// `out_dir` (created if needed). Output files depend only on the id, the
/// effective config and the seed.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Rebuilds the spec recorded in a metadata.json so the run can be repeated.
ExperimentSpec spec_from_metadata(const nlohmann::json& metadata);

std::string library_version();

}  // namespace ppd
