#include "mwi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mwi/errors.hpp"

namespace mwi {

GradcheckResult gradient_check(const GradcheckOptions& o) {
  if (o.cells < 1) throw ConfigError("gradcheck needs at least one cell");
  const Model base = make_homogeneous(o.nx, o.nz, o.h, o.velocity);

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> jitter(-o.perturbation, o.perturbation);
  RealGrid v(o.nx, o.nz);
  for (double& x : v) x = o.velocity * (1.0 + jitter(rng));
  Model model = Model::from_velocity(o.h, v);

  Acquisition acq;
  acq.sources = line_positions(o.sources, Side::top, o.nx, o.nz, 2);
  acq.receivers = line_positions(o.nx, Side::bottom, o.nx, o.nz, 2);
  acq.frequencies = o.frequencies;
  acq.validate(o.nx, o.nz);

  ModelingOptions mo;
  mo.pad_reference = &base;
  const ShotData observed = forward_map(base, acq, mo);
  const GradientBundle g = misfit_and_gradient(model, acq, observed, mo);

  GradcheckResult res;
  std::uniform_int_distribution<int> pick(0, o.nx * o.nz - 1);
  std::vector<int> chosen;
  while (static_cast<int>(chosen.size()) < std::min(o.cells, o.nx * o.nz)) {
    const int c = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
  }
  for (int c : chosen) {
    const double delta = o.relative_step * model.m()[c];
    auto misfit_at = [&](double shift) {
      Model p = model;
      RealGrid m = p.m();
      m[c] += shift;
      p.set_m(std::move(m));
      return (forward_map(p, acq, mo) - observed).half_norm_squared();
    };
    const double fd = (misfit_at(delta) - misfit_at(-delta)) / (2.0 * delta);
    GradcheckCell cell{c % o.nx, c / o.nx, g.gradient[c], fd, 0.0};
    cell.relative_error = std::abs(cell.adjoint - fd) / std::max(std::abs(fd), 1e-300);
    res.max_relative_error = std::max(res.max_relative_error, cell.relative_error);
    res.cells.push_back(cell);
  }
  return res;
}

namespace {

double inf_norm_diff(const RealGrid& a, const RealGrid& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

EquivalenceResult equivalence_check(const EquivalenceOptions& o) {
  const int n = o.n;
  const double bg = 2000.0;
  RealGrid vt(n, n, bg);
  const double c = 0.5 * (n - 1), r = 0.25 * n;
  for (int iz = 0; iz < n; ++iz)
    for (int ix = 0; ix < n; ++ix)
      if (std::hypot(ix - c, iz - c) <= r) vt(ix, iz) = 2300.0;
  const Model truth = Model::from_velocity(o.h, vt);
  Model initial = make_homogeneous(n, n, o.h, bg);
  initial.set_velocity_bounds(1800.0, 2600.0);

  Acquisition acq;
  acq.sources = line_positions(2, Side::top, n, n, 2);
  acq.receivers = line_positions(n, Side::bottom, n, n, 2);
  acq.frequencies = {3.0, 4.0, 5.0};
  const ShotData observed = forward_map(truth, acq);

  RunConfig cfg;
  cfg.method = Method::mwi;
  cfg.mu = o.mu;
  cfg.iterations = o.iterations;
  cfg.reg.kind = RegKind::tikhonov;
  {
    // alpha is set by the first step; pick the Tikhonov weight so the prox
    // smooths by a fixed amount regardless of the gradient scale.
    RunConfig probe = cfg;
    probe.reg.weight = 0.0;
    const ModelStep s = model_step(initial_state(initial, observed), probe, acq);
    cfg.reg.weight = s.alpha > 0.0 ? o.smoothing * o.mu / (2.0 * s.alpha) : 0.0;
  }

  const ScaledTrace scaled = run_inversion_traced(cfg, acq, observed, initial);
  const UnscaledState unscaled = unscaled_al_iteration(cfg, acq, observed, initial);

  EquivalenceResult res;
  res.iterations = o.iterations;
  for (std::size_t k = 0; k < scaled.models.size() && k < unscaled.models.size(); ++k) {
    const RealGrid& a = scaled.models[k].m();
    res.max_model_difference =
        std::max(res.max_model_difference, inf_norm_diff(a, unscaled.models[k].m()) / max_abs(a));
  }
  for (std::size_t k = 1; k < scaled.multipliers.size() && k < unscaled.multipliers.size(); ++k) {
    ShotData implied = scaled.multipliers[k] - observed;
    implied *= o.mu;
    const ShotData diff = implied - unscaled.multipliers[k];
    const double denom = std::sqrt(unscaled.multipliers[k].half_norm_squared());
    res.max_multiplier_difference =
        std::max(res.max_multiplier_difference, std::sqrt(diff.half_norm_squared()) / denom);
  }

  RunConfig one = cfg;
  one.iterations = 1;
  one.method = Method::fwi;
  const InversionState fwi = run_inversion(one, acq, observed, initial);
  one.method = Method::mwi;
  const InversionState mwi = run_inversion(one, acq, observed, initial);
  res.first_iterate_identical = fwi.model.m() == mwi.model.m();
  return res;
}

}  // namespace mwi
