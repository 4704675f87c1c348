#include "mwi/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mwi/errors.hpp"
#include "mwi/parallel.hpp"

extern "C" {
void zpotrf_(const char* uplo, const int* n, std::complex<double>* a, const int* lda, int* info);
void zpotrs_(const char* uplo, const int* n, const int* nrhs, const std::complex<double>* a,
             const int* lda, std::complex<double>* b, const int* ldb, int* info);
}

namespace mwi {

// ---------------------------------------------------------------- ShotData

ShotData::ShotData(std::size_t ns, std::vector<double> frequencies, std::size_t nr)
    : ns_(ns), nr_(nr), freqs_(std::move(frequencies)), v_(ns_ * freqs_.size() * nr_, cplx{}) {}

void ShotData::check_matches(const Acquisition& acq) const {
  if (ns_ != acq.num_sources() || nr_ != acq.num_receivers() || freqs_ != acq.frequencies) {
    std::ostringstream os;
    os << "shot data (" << ns_ << " x " << nf() << " x " << nr_ << ") does not match acquisition ("
       << acq.num_sources() << " x " << acq.num_frequencies() << " x " << acq.num_receivers() << ")";
    throw ConfigError(os.str());
  }
}

ShotData ShotData::select_frequencies(const std::vector<double>& freqs) const {
  std::vector<std::size_t> idx;
  for (double f : freqs) {
    auto it = std::find(freqs_.begin(), freqs_.end(), f);
    if (it == freqs_.end()) {
      throw ConfigError("frequency " + std::to_string(f) + " Hz is not present in the data");
    }
    idx.push_back(static_cast<std::size_t>(it - freqs_.begin()));
  }
  ShotData out(ns_, freqs, nr_);
  out.wavelet_applied = wavelet_applied;
  for (std::size_t s = 0; s < ns_; ++s)
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t r = 0; r < nr_; ++r) out(s, k, r) = (*this)(s, idx[k], r);
  return out;
}

ShotData ShotData::select_source(std::size_t s) const {
  if (s >= ns_) throw ConfigError("select_source: index out of range");
  ShotData out(1, freqs_, nr_);
  out.wavelet_applied = wavelet_applied;
  for (std::size_t f = 0; f < nf(); ++f)
    for (std::size_t r = 0; r < nr_; ++r) out(0, f, r) = (*this)(s, f, r);
  return out;
}

double ShotData::half_norm_squared() const {
  double sum = 0.0;
  for (const auto& v : v_) sum += std::norm(v);
  return 0.5 * sum;
}

ShotData& ShotData::operator+=(const ShotData& o) {
  if (!same_layout(o)) throw ConfigError("ShotData: layout mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

ShotData& ShotData::operator-=(const ShotData& o) {
  if (!same_layout(o)) throw ConfigError("ShotData: layout mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

ShotData& ShotData::operator*=(cplx a) {
  for (auto& v : v_) v *= a;
  return *this;
}

ShotData operator+(ShotData a, const ShotData& b) { return a += b; }
ShotData operator-(ShotData a, const ShotData& b) { return a -= b; }

// ---------------------------------------------------------------- kernels

namespace {

double angular(double f_hz) { return 2.0 * std::numbers::pi * f_hz; }

struct FrequencyPass {
  DiscreteOperator op;
  Factorization fac;
  FieldBatch u;  // one column per source

  FrequencyPass(const Model& model, const Acquisition& acq, const ModelingOptions& opts, double f_hz)
      : op(assemble(model, angular(f_hz), opts.pml, opts.pad_reference)),
        fac(op),
        u(op.geometry(), static_cast<int>(acq.num_sources())) {
    const auto& g = op.geometry();
    const cplx amp = ricker_spectrum(acq.peak_frequency, f_hz) * opts.source_scale / (g.h * g.h);
    for (std::size_t s = 0; s < acq.num_sources(); ++s) u(g.node(acq.sources[s]), static_cast<int>(s)) += amp;
    fac.solve(u);
  }
};

// Runs `body` over the interior cells: (cell index on the interior grid, padded node).
template <typename F>
void for_each_interior(const PaddedGeometry& g, F&& body) {
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix)
      body(static_cast<std::size_t>(iz) * g.nx + ix, g.node({ix, iz}));
}

void check_inputs(const Model& model, const Acquisition& acq) {
  acq.validate(model.nx(), model.nz());
  if (acq.frequencies.empty()) throw ConfigError("acquisition has no active frequencies");
}

// Column-major nr x nr Hermitian matrix and its Cholesky factor.
struct DataHessianFactor {
  int nr = 0;
  double epsilon = 0.0;
  std::vector<cplx> q;        // column-major, full
  std::vector<cplx> factor;   // zpotrf output
};

DataHessianFactor build_data_hessian(const Factorization& fac, const Acquisition& acq, double eps,
                                     bool do_factor) {
  const auto& g = fac.geometry();
  const int nr = static_cast<int>(acq.num_receivers());
  FieldBatch x(g, nr);
  for (int r = 0; r < nr; ++r) x(g.node(acq.receivers[r]), r) = 1.0;
  fac.solve_adjoint(x);

  DataHessianFactor out;
  out.nr = nr;
  out.q.assign(static_cast<std::size_t>(nr) * nr, cplx{});
  for_each_interior(g, [&](std::size_t, std::size_t node) {
    const cplx* row = &x.values[node * nr];
    for (int j = 0; j < nr; ++j) {
      const cplx xj = row[j];
      for (int i = 0; i < nr; ++i) out.q[static_cast<std::size_t>(j) * nr + i] += std::conj(row[i]) * xj;
    }
  });
  if (!(eps > 0.0)) {
    double mean = 0.0;
    for (int i = 0; i < nr; ++i) mean += out.q[static_cast<std::size_t>(i) * nr + i].real();
    eps = 1e-2 * mean / nr;
    if (!(eps > 0.0)) throw NumericalError("data-domain Hessian: vanishing receiver sensitivity");
  }
  out.epsilon = eps;
  for (int i = 0; i < nr; ++i) out.q[static_cast<std::size_t>(i) * nr + i] += eps;

  if (do_factor) {
    out.factor = out.q;
    int info = 0;
    const char uplo = 'U';
    zpotrf_(&uplo, &nr, out.factor.data(), &nr, &info);
    if (info != 0) {
      throw NumericalError("data-domain Hessian is not positive definite (zpotrf info " +
                           std::to_string(info) + ")");
    }
  }
  return out;
}

struct FrequencyResult {
  double misfit = 0.0;
  ComplexGrid correlation;
  RealGrid pseudo_hessian;
};

}  // namespace

namespace detail {

Evaluation evaluate(const Model& model, const Acquisition& acq, const ModelingOptions& opts,
                    const ResidualFn& residual_fn, const EvaluationRequest& request) {
  check_inputs(model, acq);
  const std::size_t ns = acq.num_sources(), nr = acq.num_receivers(), nf = acq.num_frequencies();

  Evaluation ev;
  ev.predicted = ShotData(ns, acq.frequencies, nr);
  if (request.gradient) ev.residual = ShotData(ns, acq.frequencies, nr);
  std::vector<FrequencyResult> per_freq(nf);

  parallel_for(nf, [&](std::size_t f) {
    FrequencyPass pass(model, acq, opts, acq.frequencies[f]);
    const auto& g = pass.op.geometry();
    const double w2 = pass.op.omega() * pass.op.omega();
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t r = 0; r < nr; ++r)
        ev.predicted(s, f, r) = pass.u(g.node(acq.receivers[r]), static_cast<int>(s));

    FrequencyResult& out = per_freq[f];
    if (request.pseudo_hessian) {
      out.pseudo_hessian = RealGrid(g.nx, g.nz);
      for_each_interior(g, [&](std::size_t cell, std::size_t node) {
        double acc = 0.0;
        for (std::size_t s = 0; s < ns; ++s) acc += std::norm(w2 * pass.u(node, static_cast<int>(s)));
        out.pseudo_hessian[cell] = acc;
      });
    }
    if (!request.gradient) return;

    residual_fn(f, ev.predicted, ev.residual);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t r = 0; r < nr; ++r) out.misfit += 0.5 * std::norm(ev.residual(s, f, r));

    // Adjoint sources P^T rho (optionally rho <- Q^{-1} rho), one per source.
    std::vector<cplx> rho(nr * ns);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t r = 0; r < nr; ++r) rho[s * nr + r] = ev.residual(s, f, r);
    if (request.gn_data_hessian) {
      const auto q = build_data_hessian(pass.fac, acq, request.gn_epsilon, true);
      const int n = q.nr, nrhs = static_cast<int>(ns);
      int info = 0;
      const char uplo = 'U';
      zpotrs_(&uplo, &n, &nrhs, q.factor.data(), &n, rho.data(), &n, &info);
      if (info != 0) throw NumericalError("zpotrs failed on the data-domain Hessian");
    }
    FieldBatch v(g, static_cast<int>(ns));
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t r = 0; r < nr; ++r) v(g.node(acq.receivers[r]), static_cast<int>(s)) += rho[s * nr + r];
    pass.fac.solve_adjoint(v);

    out.correlation = ComplexGrid(g.nx, g.nz);
    for_each_interior(g, [&](std::size_t cell, std::size_t node) {
      cplx acc{};
      for (std::size_t s = 0; s < ns; ++s)
        acc += std::conj(pass.u(node, static_cast<int>(s))) * v(node, static_cast<int>(s));
      out.correlation[cell] = w2 * acc;
    });
  });

  // Fixed-order reduction keeps results independent of the worker count.
  auto& b = ev.bundle;
  if (request.gradient) {
    b.correlation = ComplexGrid(model.nx(), model.nz());
    b.gradient = RealGrid(model.nx(), model.nz());
  }
  if (request.pseudo_hessian) b.pseudo_hessian = RealGrid(model.nx(), model.nz());
  for (const auto& r : per_freq) {
    if (request.gradient) {
      b.misfit += r.misfit;
      for (std::size_t i = 0; i < b.correlation.size(); ++i) b.correlation[i] += r.correlation[i];
    }
    if (request.pseudo_hessian)
      for (std::size_t i = 0; i < b.pseudo_hessian.size(); ++i) b.pseudo_hessian[i] += r.pseudo_hessian[i];
  }
  if (request.gradient)
    for (std::size_t i = 0; i < b.gradient.size(); ++i) b.gradient[i] = b.correlation[i].real();
  return ev;
}

}  // namespace detail

ShotData forward_map(const Model& model, const Acquisition& acq, const ModelingOptions& opts) {
  detail::EvaluationRequest req;
  req.gradient = false;
  return detail::evaluate(model, acq, opts, {}, req).predicted;
}

namespace {

detail::ResidualFn residual_against(const ShotData& target) {
  return [&target](std::size_t f, const ShotData& pred, ShotData& res) {
    for (std::size_t s = 0; s < pred.ns(); ++s)
      for (std::size_t r = 0; r < pred.nr(); ++r) res(s, f, r) = pred(s, f, r) - target(s, f, r);
  };
}

}  // namespace

GradientBundle misfit_and_gradient(const Model& model, const Acquisition& acq, const ShotData& target,
                                   const ModelingOptions& opts, bool with_pseudo_hessian) {
  target.check_matches(acq);
  detail::EvaluationRequest req;
  req.pseudo_hessian = with_pseudo_hessian;
  return detail::evaluate(model, acq, opts, residual_against(target), req).bundle;
}

GradientBundle gn_modified_gradient(const Model& model, const Acquisition& acq, const ShotData& target,
                                    double eps, const ModelingOptions& opts, bool with_pseudo_hessian) {
  target.check_matches(acq);
  detail::EvaluationRequest req;
  req.pseudo_hessian = with_pseudo_hessian;
  req.gn_data_hessian = true;
  req.gn_epsilon = eps;
  return detail::evaluate(model, acq, opts, residual_against(target), req).bundle;
}

ComplexGrid jacobian_adjoint_apply(const Model& model, const Acquisition& acq, const ShotData& data,
                                   const ModelingOptions& opts) {
  data.check_matches(acq);
  detail::EvaluationRequest req;
  auto copy = [&data](std::size_t f, const ShotData& pred, ShotData& res) {
    for (std::size_t s = 0; s < pred.ns(); ++s)
      for (std::size_t r = 0; r < pred.nr(); ++r) res(s, f, r) = data(s, f, r);
  };
  return detail::evaluate(model, acq, opts, copy, req).bundle.correlation;
}

ShotData jacobian_apply(const Model& model, const Acquisition& acq, const RealGrid& dm,
                        const ModelingOptions& opts) {
  check_inputs(model, acq);
  if (!dm.same_shape(model.m())) throw ConfigError("jacobian_apply: perturbation shape mismatch");
  const std::size_t ns = acq.num_sources(), nr = acq.num_receivers();
  ShotData out(ns, acq.frequencies, nr);
  parallel_for(acq.num_frequencies(), [&](std::size_t f) {
    FrequencyPass pass(model, acq, opts, acq.frequencies[f]);
    const auto& g = pass.op.geometry();
    const double w2 = pass.op.omega() * pass.op.omega();
    FieldBatch rhs(g, static_cast<int>(ns));
    for_each_interior(g, [&](std::size_t cell, std::size_t node) {
      for (std::size_t s = 0; s < ns; ++s)
        rhs(node, static_cast<int>(s)) = w2 * dm[cell] * pass.u(node, static_cast<int>(s));
    });
    pass.fac.solve(rhs);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t r = 0; r < nr; ++r) out(s, f, r) = rhs(g.node(acq.receivers[r]), static_cast<int>(s));
  });
  return out;
}

RealGrid pseudo_hessian_diag(const Model& model, const Acquisition& acq, const ModelingOptions& opts) {
  detail::EvaluationRequest req;
  req.gradient = false;
  req.pseudo_hessian = true;
  return detail::evaluate(model, acq, opts, {}, req).bundle.pseudo_hessian;
}

RealGrid damped_pseudo_hessian(const RealGrid& diag, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("pseudo-Hessian damping must be non-negative");
  const double shift = beta * max_abs(diag);
  RealGrid out = diag;
  for (auto& v : out) v += shift;
  return out;
}

DataHessian data_domain_hessian(const Model& model, const Acquisition& acq, std::size_t freq_index,
                                double eps, const ModelingOptions& opts) {
  check_inputs(model, acq);
  if (freq_index >= acq.num_frequencies()) throw ConfigError("data_domain_hessian: bad frequency index");
  const auto op = assemble(model, angular(acq.frequencies[freq_index]), opts.pml, opts.pad_reference);
  const Factorization fac(op);
  const auto q = build_data_hessian(fac, acq, eps, false);
  DataHessian out;
  out.nr = static_cast<std::size_t>(q.nr);
  out.epsilon = q.epsilon;
  out.q.resize(out.nr * out.nr);
  for (std::size_t i = 0; i < out.nr; ++i)
    for (std::size_t j = 0; j < out.nr; ++j) out.q[i * out.nr + j] = q.q[j * out.nr + i];
  return out;
}

}  // namespace mwi
