#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mwi/acquisition.hpp"
#include "mwi/inversion.hpp"
#include "mwi/io.hpp"
#include "mwi/model.hpp"
#include "mwi/sensitivity.hpp"

namespace mwi {

// Run description read from a sectioned key = value file:
//
//   # comment
//   [inversion]
//   method = mwi
//   mu = 1
//
// Only inversion.method is required. Relative paths resolve against the
// manifest's directory. A model entry is either a path to an MWI-MODEL file
// or one of the built-in generators camembert, two-layer, homogeneous.
struct ModelSource {
  std::string generator;     // empty when `file` is set
  std::filesystem::path file;
};

struct RunManifest {
  std::filesystem::path location;

  // [experiment]
  OutputSpec output;

  // [model]
  std::optional<ModelSource> true_model;
  ModelSource initial_model{"homogeneous", {}};
  double h = 71.0;
  int nx = 0, nz = 0;  // homogeneous generator; 0 follows the true model
  double width = 0.0, depth = 0.0;  // 0 keeps the generator's extent
  double initial_velocity = 4000.0;
  double background_velocity = 4000.0;
  double anomaly_velocity = 4600.0;
  double camembert_diameter = 0.4;
  double interface_depth = 600.0;
  double top_velocity = 2000.0;
  double bottom_velocity = 4000.0;
  std::optional<double> vmin, vmax;  // bounds as velocities

  // [acquisition]
  int sources = 14;
  Side source_side = Side::top;
  int receivers = 85;
  Side receiver_side = Side::bottom;
  int standoff = 2;
  double peak_frequency = 10.0;
  std::vector<double> frequencies;  // explicit list overrides num_frequencies
  int num_frequencies = 8;
  PmlConfig pml;
  double source_scale = 1.0;

  // [data]
  std::optional<std::filesystem::path> observed;

  // [inversion] and [reg]
  RunConfig run;
  std::vector<std::vector<double>> schedule;  // stages; empty means single stage
  int cycles = 1;
};

/// Throws ConfigError naming the file and line for syntax errors, unknown
/// sections or keys, bad values and missing inversion.method; referenced
/// input files must exist.
RunManifest parse_manifest(const std::filesystem::path& path);
RunManifest parse_manifest_text(const std::string& text, const std::filesystem::path& location = "<string>");

/// Everything needed to run: models, acquisition and observed data
/// (synthesized from the true model when no data file is given).
struct Problem {
  std::optional<Model> truth;
  Model initial;
  Acquisition acquisition;
  ShotData observed;
  RunConfig run;
  FrequencySchedule schedule;
};

/// Generators take their grid and extent from the manifest; `homogeneous`
/// uses `velocity` and copies the shape of `reference` when nx/nz are unset.
Model build_model(const RunManifest& m, const ModelSource& src, double velocity,
                  const Model* reference = nullptr);
Problem build_problem(const RunManifest& m);

}  // namespace mwi
