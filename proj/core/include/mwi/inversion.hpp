#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mwi/acquisition.hpp"
#include "mwi/model.hpp"
#include "mwi/regularizers.hpp"
#include "mwi/sensitivity.hpp"

namespace mwi {

enum class Method { fwi, mwi };

Method parse_method(const std::string& s);
std::string to_string(Method m);

struct RunConfig {
  Method method = Method::mwi;
  double mu = 1.0;
  int iterations = 0;
  /// Active frequencies; empty means all frequencies of the acquisition.
  std::vector<double> frequencies;
  Regularizer reg;
  bool bounds = true;
  bool gn_data_hessian = false;
  double gn_epsilon = 0.0;  // <= 0: automatic
  /// alpha is chosen once so that max|alpha * direction| equals
  /// step_fraction * max(m_max - m_min); a positive step_length overrides it.
  double step_fraction = 0.02;
  double step_length = 0.0;
  double hessian_damping = 1e-3;  // beta in diag + beta * max(diag)
  ModelingOptions modeling;
  std::optional<Model> truth;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double misfit_true = 0.0;        // 1/2 ||S(m_k) b* - d*||^2
  double misfit_multiplier = 0.0;  // 1/2 ||S(m_k) b* - d_k||^2
  double gradient_norm = 0.0;
  std::optional<double> model_rmse;  // m/s, when a truth model is set
};

struct InversionState {
  int k = 0;
  Model model;
  /// Scaled multipliers d_k ("effective data"); pinned to the observed data
  /// for FWI.
  ShotData multipliers;
  double alpha = 0.0;  // 0 until the first model step fixes it
  std::vector<IterationRecord> log;
};

InversionState initial_state(const Model& initial, const ShotData& observed);

struct ModelStep {
  Model model;
  double alpha = 0.0;
  double misfit = 0.0;
  double gradient_norm = 0.0;
};

/// One preconditioned gradient step on 1/2 ||S(m) b* - d_k||^2 followed by
/// the prox of R (scale alpha / mu) and, if enabled, bound projection.
ModelStep model_step(const InversionState& state, const RunConfig& cfg, const Acquisition& acq);

/// d_k + observed - S(model_next) b*.
ShotData multiplier_step(const InversionState& state, const Model& model_next, const Acquisition& acq,
                         const ShotData& observed, const ModelingOptions& opts = {});

using IterationObserver = std::function<void(const InversionState&)>;

/// Runs cfg.iterations outer iterations. Each iteration costs one forward and
/// one adjoint solve per source and frequency: the predicted data computed for
/// the gradient at m_k also feed the multiplier update that produced d_k.
InversionState run_inversion(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed,
                             const Model& initial, const IterationObserver& observer = {});

/// Lagrange-multiplier form: one gradient step on
/// R(m) - <lambda_k, S(m)b* - d*> + mu/2 ||S(m)b* - d*||^2, then
/// lambda_{k+1} = lambda_k - mu (S(m_{k+1})b* - d*), with lambda_0 = 0.
struct UnscaledState {
  int k = 0;
  Model model;
  ShotData lambda;
  double alpha = 0.0;
  std::vector<Model> models;         // m_0 .. m_k
  std::vector<ShotData> multipliers;  // lambda_0 .. lambda_k
};

UnscaledState unscaled_al_iteration(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed,
                                    const Model& initial);

/// Scaled-form run that also records every model iterate and multiplier, for
/// comparisons against the unscaled iteration.
struct ScaledTrace {
  InversionState state;
  std::vector<Model> models;          // m_0 .. m_k
  std::vector<ShotData> multipliers;  // d_0 .. d_k
};
ScaledTrace run_inversion_traced(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed,
                                 const Model& initial);

using FrequencySchedule = std::vector<std::vector<double>>;

/// Stages in order, repeated `cycles` times.
FrequencySchedule continuation_schedule(const std::vector<std::vector<double>>& stages, int cycles);

/// Runs one inversion per stage, chaining models and resetting the
/// multipliers to that stage's observed data. The returned state carries
/// the concatenated log.
InversionState frequency_continuation(const FrequencySchedule& schedule, const RunConfig& cfg,
                                      const Acquisition& acq, const ShotData& observed,
                                      const Model& initial, const IterationObserver& observer = {},
                                      std::vector<Model>* stage_models = nullptr);

}  // namespace mwi
