#pragma once

#include <cstdint>
#include <vector>

#include "mwi/inversion.hpp"

namespace mwi {

/// Central finite-difference check of the adjoint-state gradient on a
/// randomly perturbed homogeneous model, pad held fixed.
struct GradcheckOptions {
  int nx = 20, nz = 20;
  double h = 50.0;
  double velocity = 2000.0;
  double perturbation = 0.05;  // relative, uniform in [-p, p]
  int sources = 2;
  std::vector<double> frequencies{3.0, 4.0, 5.0};
  int cells = 20;
  double relative_step = 1e-4;
  std::uint64_t seed = 7;
};

struct GradcheckCell {
  int ix = 0, iz = 0;
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct GradcheckResult {
  std::vector<GradcheckCell> cells;
  double max_relative_error = 0.0;
};

GradcheckResult gradient_check(const GradcheckOptions& opts = {});

/// Runs the scaled multiplier iteration, its unscaled Lagrange-multiplier
/// counterpart and a one-step FWI/MWI pair on a small transmission problem.
struct EquivalenceOptions {
  int n = 16;
  double h = 50.0;
  int iterations = 5;
  double mu = 10.0;
  /// Tikhonov strength as 2 * (alpha / mu) * weight, fixed after alpha is known.
  double smoothing = 0.05;
};

struct EquivalenceResult {
  double max_model_difference = 0.0;       // max_k ||m_k - m~_k||_inf / ||m_k||_inf
  double max_multiplier_difference = 0.0;  // max_k ||mu (d_k - d*) - lambda_k|| / ||lambda_k||
  bool first_iterate_identical = false;    // FWI and MWI m_1, bitwise
  int iterations = 0;
};

EquivalenceResult equivalence_check(const EquivalenceOptions& opts = {});

}  // namespace mwi
