#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mwi/inversion.hpp"
#include "mwi/model.hpp"
#include "mwi/sensitivity.hpp"

namespace mwi {

namespace fs = std::filesystem;

// File formats. Every file starts with one text line, followed by raw
// little-endian binary payload.
//
//   MWI-MODEL nx nz h            velocity (m/s) as float32, row-major from shallow to deep
//   MWI-DATA ns nf nr TYPE f...  TYPE is complex128 or complex64, ordered (s, f, r)
//   MWI-CHECKPOINT k alpha mu nx nz h   m, m_min, m_max as float64; multipliers in <stem>.data

/// Velocity is stored in single precision and bounds are not stored, so a
/// loaded model carries its own value range as bounds.
void save_model(const fs::path& path, const Model& model);
Model load_model(const fs::path& path);

enum class DataPrecision { complex128, complex64 };

void save_data(const fs::path& path, const ShotData& data, DataPrecision precision = DataPrecision::complex128);
ShotData load_data(const fs::path& path);

/// Writes <stem>.ckpt and <stem>.data; resuming from them is exact.
void save_checkpoint(const fs::path& stem, const InversionState& state, double mu);
InversionState load_checkpoint(const fs::path& stem, double* mu = nullptr);

/// iter,E_true,E_multiplier,grad_norm,model_rmse; model_rmse is blank
/// without a truth model.
void write_convergence_csv(const fs::path& path, const std::vector<IterationRecord>& log);

/// 8-bit binary graymap (P5), linear between the image min and max; the
/// scaling goes to <path>.range as "min max". Row 0 is the top of the model.
void write_pgm(const fs::path& path, const RealGrid& image);

/// Writes to a temporary sibling and renames on success; the temporary is
/// removed if `body` throws or the stream fails.
void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body);

struct OutputSpec {
  fs::path dir = "out";
  std::string name = "run";
  int snapshot_every = 0;  // 0: final model only
  std::vector<int> shot_dump_sources;
};

/// <dir>/<name>_iter0005.model and matching .pgm.
void write_snapshot(const OutputSpec& spec, const InversionState& state);

/// Final model (.model and velocity .pgm), convergence CSV and one complex64
/// gather per selected source taken from `predicted`, if given.
void emit_outputs(const InversionState& state, const OutputSpec& spec, const ShotData* predicted = nullptr);

}  // namespace mwi
