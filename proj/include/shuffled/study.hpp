#pragma once

#include <filesystem>
#include <string>

#include "shuffled/bench.hpp"
#include "shuffled/config.hpp"

namespace shuffled {

/// Tables produced by one study run. Nothing here depends on wall-clock time,
/// so identical configs give byte-identical files.
struct StudyOutput {
  std::string kind;
  std::string figure;  ///< stem of the figure-named data file, e.g. "fig5"
  Table results;
  Table figure_table;
  Json manifest;
};

/// Study kinds: sweep, consistency, replication, noise_adjustment,
/// regularization, protocol, control. The JSON object names the kind under
/// "study"; the remaining keys are the study's parameters. Relative dataset
/// paths resolve against `base_dir`.
StudyOutput run_study(const Json& config, const std::filesystem::path& base_dir = {});

/// Writes results.csv, <figure>.csv and manifest.json into `out_dir`,
/// creating it when needed.
void write_study(const StudyOutput& output, const std::filesystem::path& out_dir);

}  // namespace shuffled
