#include "mwi/inversion.hpp"

#include <algorithm>
#include <cmath>

#include "mwi/errors.hpp"

namespace mwi {

Method parse_method(const std::string& s) {
  if (s == "fwi") return Method::fwi;
  if (s == "mwi") return Method::mwi;
  throw ConfigError("unknown method '" + s + "' (expected fwi or mwi)");
}

std::string to_string(Method m) { return m == Method::fwi ? "fwi" : "mwi"; }

void RunConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (!(step_fraction > 0.0)) throw ConfigError("step_fraction must be positive");
  if (step_length < 0.0) throw ConfigError("step_length must be non-negative");
  if (!(hessian_damping >= 0.0)) throw ConfigError("hessian_damping must be non-negative");
  if (!(reg.weight >= 0.0)) throw ConfigError("reg.weight must be non-negative");
}

InversionState initial_state(const Model& initial, const ShotData& observed) {
  InversionState s;
  s.model = initial;
  s.multipliers = observed;
  return s;
}

namespace {

struct StepOutcome {
  Model model;
  double alpha = 0.0;
};

// m+ = P_B(prox_{alpha * prox_factor * R}(m - alpha * g / (H + beta max H))).
StepOutcome take_step(const Model& model, const RealGrid& gradient, const RealGrid& pseudo_hessian,
                      double alpha, double prox_factor, const RunConfig& cfg) {
  const RealGrid denom = damped_pseudo_hessian(pseudo_hessian, cfg.hessian_damping);
  RealGrid direction(gradient.nx(), gradient.nz());
  for (std::size_t i = 0; i < direction.size(); ++i) {
    if (!(denom[i] > 0.0)) throw NumericalError("pseudo-Hessian vanishes: no illumination");
    direction[i] = gradient[i] / denom[i];
  }
  if (cfg.step_length > 0.0) {
    alpha = cfg.step_length;
  } else if (!(alpha > 0.0)) {
    double range = 0.0;
    for (std::size_t i = 0; i < model.m().size(); ++i)
      range = std::max(range, model.m_max()[i] - model.m_min()[i]);
    const double dmax = max_abs(direction);
    alpha = dmax > 0.0 ? cfg.step_fraction * range / dmax : 0.0;
  }

  StepOutcome out{model, alpha};
  if (!(alpha > 0.0)) return out;
  RealGrid m = model.m();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] -= alpha * direction[i];
  m = apply_prox(cfg.reg, m, alpha * prox_factor);
  if (cfg.bounds) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::clamp(m[i], model.m_min()[i], model.m_max()[i]);
  }
  for (double v : m) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("model step produced a non-positive squared slowness; reduce the step");
    }
  }
  out.model.set_m(std::move(m));
  return out;
}

detail::EvaluationRequest request_for(const RunConfig& cfg) {
  detail::EvaluationRequest req;
  req.pseudo_hessian = true;
  req.gn_data_hessian = cfg.gn_data_hessian;
  req.gn_epsilon = cfg.gn_epsilon;
  return req;
}

struct RunSetup {
  Acquisition acq;
  ShotData observed;
};

RunSetup prepare(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed, const Model& initial) {
  cfg.validate();
  RunSetup s;
  if (cfg.frequencies.empty()) {
    s.acq = acq;
    s.observed = observed.frequencies() == acq.frequencies ? observed
                                                           : observed.select_frequencies(acq.frequencies);
  } else {
    s.acq = acq.with_frequencies(cfg.frequencies);
    s.observed = observed.select_frequencies(cfg.frequencies);
  }
  s.acq.validate(initial.nx(), initial.nz());
  s.observed.check_matches(s.acq);
  check_dispersion(s.acq, initial);
  if (cfg.truth && !cfg.truth->m().same_shape(initial.m())) {
    throw ConfigError("truth model shape differs from the initial model");
  }
  return s;
}

double residual_half_norm(const ShotData& a, const ShotData& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) sum += std::norm(a.values()[i] - b.values()[i]);
  return 0.5 * sum;
}

// (d + observed) - predicted, shared by every multiplier update.
void update_multipliers(std::size_t f, const ShotData& previous, const ShotData& observed,
                        const ShotData& predicted, ShotData& next) {
  for (std::size_t s = 0; s < predicted.ns(); ++s)
    for (std::size_t r = 0; r < predicted.nr(); ++r)
      next(s, f, r) = (previous(s, f, r) + observed(s, f, r)) - predicted(s, f, r);
}

struct ScaledRecorder {
  std::vector<Model>* models = nullptr;
  std::vector<ShotData>* multipliers = nullptr;
};

InversionState run_scaled(const RunConfig& cfg_in, const Acquisition& acq_in, const ShotData& observed_in,
                          const Model& initial, const IterationObserver& observer, ScaledRecorder rec) {
  const RunSetup setup = prepare(cfg_in, acq_in, observed_in, initial);
  // The PML medium stays that of the starting model, so every gradient is
  // the exact derivative of the misfit being reduced.
  RunConfig cfg = cfg_in;
  if (!cfg.modeling.pad_reference) cfg.modeling.pad_reference = &initial;
  const Acquisition& acq = setup.acq;
  const ShotData& obs = setup.observed;
  const bool mwi = cfg.method == Method::mwi;

  InversionState state = initial_state(initial, obs);
  if (rec.models) rec.models->push_back(state.model);
  if (rec.multipliers) rec.multipliers->push_back(state.multipliers);

  for (int k = 0; k < cfg.iterations; ++k) {
    const bool update = mwi && k > 0;
    ShotData next = update ? ShotData::zeros_like(obs) : ShotData{};
    const ShotData& prev = state.multipliers;
    auto residual_fn = [&](std::size_t f, const ShotData& pred, ShotData& res) {
      if (update) update_multipliers(f, prev, obs, pred, next);
      const ShotData& target = update ? next : prev;
      for (std::size_t s = 0; s < pred.ns(); ++s)
        for (std::size_t r = 0; r < pred.nr(); ++r) res(s, f, r) = pred(s, f, r) - target(s, f, r);
    };
    auto ev = detail::evaluate(state.model, acq, cfg.modeling, residual_fn, request_for(cfg));
    if (update) {
      state.multipliers = std::move(next);
      if (rec.multipliers) rec.multipliers->push_back(state.multipliers);
    }

    IterationRecord record;
    record.iteration = k;
    record.misfit_true = residual_half_norm(ev.predicted, obs);
    record.misfit_multiplier = ev.bundle.misfit;
    record.gradient_norm = l2_norm(ev.bundle.gradient);
    if (cfg.truth) record.model_rmse = velocity_rmse(state.model, *cfg.truth);
    state.log.push_back(record);

    auto step = take_step(state.model, ev.bundle.gradient, ev.bundle.pseudo_hessian, state.alpha,
                          1.0 / cfg.mu, cfg);
    state.model = std::move(step.model);
    state.alpha = step.alpha;
    state.k = k + 1;
    if (rec.models) rec.models->push_back(state.model);
    if (observer) observer(state);
  }

  if (mwi && cfg.iterations > 0) {
    state.multipliers = multiplier_step(state, state.model, acq, obs, cfg.modeling);
    if (rec.multipliers) rec.multipliers->push_back(state.multipliers);
  }
  return state;
}

}  // namespace

ModelStep model_step(const InversionState& state, const RunConfig& cfg, const Acquisition& acq) {
  cfg.validate();
  state.multipliers.check_matches(acq);
  auto ev = detail::evaluate(
      state.model, acq, cfg.modeling,
      [&](std::size_t f, const ShotData& pred, ShotData& res) {
        for (std::size_t s = 0; s < pred.ns(); ++s)
          for (std::size_t r = 0; r < pred.nr(); ++r) res(s, f, r) = pred(s, f, r) - state.multipliers(s, f, r);
      },
      request_for(cfg));
  auto step = take_step(state.model, ev.bundle.gradient, ev.bundle.pseudo_hessian, state.alpha,
                        1.0 / cfg.mu, cfg);
  return ModelStep{std::move(step.model), step.alpha, ev.bundle.misfit, l2_norm(ev.bundle.gradient)};
}

ShotData multiplier_step(const InversionState& state, const Model& model_next, const Acquisition& acq,
                         const ShotData& observed, const ModelingOptions& opts) {
  state.multipliers.check_matches(acq);
  observed.check_matches(acq);
  const ShotData pred = forward_map(model_next, acq, opts);
  ShotData next = ShotData::zeros_like(observed);
  for (std::size_t f = 0; f < pred.nf(); ++f) update_multipliers(f, state.multipliers, observed, pred, next);
  return next;
}

InversionState run_inversion(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed,
                             const Model& initial, const IterationObserver& observer) {
  return run_scaled(cfg, acq, observed, initial, observer, {});
}

ScaledTrace run_inversion_traced(const RunConfig& cfg, const Acquisition& acq, const ShotData& observed,
                                 const Model& initial) {
  ScaledTrace t;
  t.state = run_scaled(cfg, acq, observed, initial, {}, {&t.models, &t.multipliers});
  return t;
}

UnscaledState unscaled_al_iteration(const RunConfig& cfg_in, const Acquisition& acq_in, const ShotData& observed_in,
                                    const Model& initial) {
  const RunSetup setup = prepare(cfg_in, acq_in, observed_in, initial);
  RunConfig cfg = cfg_in;
  if (!cfg.modeling.pad_reference) cfg.modeling.pad_reference = &initial;
  const Acquisition& acq = setup.acq;
  const ShotData& obs = setup.observed;
  const double mu = cfg.mu;

  UnscaledState state;
  state.model = initial;
  state.lambda = ShotData::zeros_like(obs);
  state.models.push_back(initial);
  state.multipliers.push_back(state.lambda);

  auto lambda_update = [&](std::size_t f, const ShotData& prev, const ShotData& pred, ShotData& next) {
    for (std::size_t s = 0; s < pred.ns(); ++s)
      for (std::size_t r = 0; r < pred.nr(); ++r)
        next(s, f, r) = prev(s, f, r) - mu * (pred(s, f, r) - obs(s, f, r));
  };

  for (int k = 0; k < cfg.iterations; ++k) {
    const bool update = k > 0;
    ShotData next = update ? ShotData::zeros_like(obs) : ShotData{};
    const ShotData& prev = state.lambda;
    // J^T [mu (S(m) b* - d*) - lambda_k]: the misfit part of the augmented
    // Lagrangian gradient. R enters through the prox.
    auto residual_fn = [&](std::size_t f, const ShotData& pred, ShotData& res) {
      if (update) lambda_update(f, prev, pred, next);
      const ShotData& lam = update ? next : prev;
      for (std::size_t s = 0; s < pred.ns(); ++s)
        for (std::size_t r = 0; r < pred.nr(); ++r)
          res(s, f, r) = mu * (pred(s, f, r) - obs(s, f, r)) - lam(s, f, r);
    };
    auto ev = detail::evaluate(state.model, acq, cfg.modeling, residual_fn, request_for(cfg));
    if (update) {
      state.lambda = std::move(next);
      state.multipliers.push_back(state.lambda);
    }
    auto step = take_step(state.model, ev.bundle.gradient, ev.bundle.pseudo_hessian, state.alpha, 1.0, cfg);
    state.model = std::move(step.model);
    state.alpha = step.alpha;
    state.k = k + 1;
    state.models.push_back(state.model);
  }
  if (cfg.iterations > 0) {
    const ShotData pred = forward_map(state.model, acq, cfg.modeling);
    ShotData next = ShotData::zeros_like(obs);
    for (std::size_t f = 0; f < pred.nf(); ++f) lambda_update(f, state.lambda, pred, next);
    state.lambda = std::move(next);
    state.multipliers.push_back(state.lambda);
  }
  return state;
}

FrequencySchedule continuation_schedule(const std::vector<std::vector<double>>& stages, int cycles) {
  if (stages.empty()) throw ConfigError("frequency schedule needs at least one stage");
  if (cycles < 1) throw ConfigError("frequency schedule needs at least one cycle");
  FrequencySchedule out;
  for (int c = 0; c < cycles; ++c) out.insert(out.end(), stages.begin(), stages.end());
  return out;
}

InversionState frequency_continuation(const FrequencySchedule& schedule, const RunConfig& cfg,
                                      const Acquisition& acq, const ShotData& observed,
                                      const Model& initial, const IterationObserver& observer,
                                      std::vector<Model>* stage_models) {
  if (schedule.empty()) throw ConfigError("frequency schedule is empty");
  Model current = initial;
  InversionState combined;
  int offset = 0;
  for (const auto& stage : schedule) {
    if (stage.empty()) throw ConfigError("frequency schedule contains an empty stage");
    RunConfig stage_cfg = cfg;
    stage_cfg.frequencies = stage;
    if (!stage_cfg.modeling.pad_reference) stage_cfg.modeling.pad_reference = &initial;
    auto stage_observer = [&](const InversionState& s) {
      if (!observer) return;
      InversionState view = s;
      view.k += offset;
      observer(view);
    };
    InversionState s = run_inversion(stage_cfg, acq, observed, current, stage_observer);
    for (auto rec : s.log) {
      rec.iteration += offset;
      combined.log.push_back(rec);
    }
    offset += s.k;
    current = s.model;
    if (stage_models) stage_models->push_back(current);
    combined.model = std::move(s.model);
    combined.multipliers = std::move(s.multipliers);
    combined.alpha = s.alpha;
  }
  combined.k = offset;
  return combined;
}

}  // namespace mwi
