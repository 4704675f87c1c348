#pragma once

#include <functional>
#include <vector>

#include "mwi/acquisition.hpp"
#include "mwi/grid.hpp"
#include "mwi/helmholtz.hpp"
#include "mwi/model.hpp"

namespace mwi {

/// Complex data cube indexed (source, frequency, receiver).
class ShotData {
 public:
  ShotData() = default;
  ShotData(std::size_t ns, std::vector<double> frequencies, std::size_t nr);

  static ShotData zeros_like(const ShotData& o) { return ShotData(o.ns_, o.freqs_, o.nr_); }

  std::size_t ns() const { return ns_; }
  std::size_t nf() const { return freqs_.size(); }
  std::size_t nr() const { return nr_; }
  const std::vector<double>& frequencies() const { return freqs_; }

  std::size_t index(std::size_t s, std::size_t f, std::size_t r) const {
    return (s * nf() + f) * nr_ + r;
  }
  cplx& operator()(std::size_t s, std::size_t f, std::size_t r) { return v_[index(s, f, r)]; }
  cplx operator()(std::size_t s, std::size_t f, std::size_t r) const { return v_[index(s, f, r)]; }

  std::vector<cplx>& values() { return v_; }
  const std::vector<cplx>& values() const { return v_; }

  bool same_layout(const ShotData& o) const {
    return ns_ == o.ns_ && nr_ == o.nr_ && freqs_ == o.freqs_;
  }
  /// Throws ConfigError unless the cube matches the acquisition's counts and
  /// frequency list.
  void check_matches(const Acquisition& acq) const;

  /// Sub-cube with the listed frequencies, which must all be present.
  ShotData select_frequencies(const std::vector<double>& freqs) const;
  /// Single-source cube.
  ShotData select_source(std::size_t s) const;

  /// 1/2 sum |d|^2.
  double half_norm_squared() const;

  ShotData& operator+=(const ShotData& o);
  ShotData& operator-=(const ShotData& o);
  ShotData& operator*=(cplx a);

  bool operator==(const ShotData&) const = default;

  /// Ricker weighting already folded into the source term.
  bool wavelet_applied = true;

 private:
  std::size_t ns_ = 0, nr_ = 0;
  std::vector<double> freqs_;
  std::vector<cplx> v_;
};

ShotData operator+(ShotData a, const ShotData& b);
ShotData operator-(ShotData a, const ShotData& b);

struct ModelingOptions {
  PmlConfig pml;
  /// Non-owning. When set, PML pad cells are taken from this model instead of
  /// the model being evaluated, which makes every derivative below the exact
  /// derivative with the pad held fixed.
  const Model* pad_reference = nullptr;
  /// Multiplies the Ricker amplitude of every source.
  double source_scale = 1.0;
};

struct GradientBundle {
  double misfit = 0.0;       // 1/2 sum |S(m) b - d|^2
  RealGrid gradient;         // dE/dm on interior cells
  ComplexGrid correlation;   // J^H rho before taking the real part
  RealGrid pseudo_hessian;   // sum omega^4 |u|^2 (empty unless requested)
};

/// S(m) b* for every source and frequency: one factorisation per frequency,
/// shared by all sources.
ShotData forward_map(const Model& model, const Acquisition& acq, const ModelingOptions& opts = {});

/// E = 1/2 ||S(m)b* - target||^2 and its gradient by the adjoint-state method.
GradientBundle misfit_and_gradient(const Model& model, const Acquisition& acq, const ShotData& target,
                                   const ModelingOptions& opts = {}, bool with_pseudo_hessian = false);

/// J dm = P A^{-1} (omega^2 dm o u) for a perturbation on the interior grid.
ShotData jacobian_apply(const Model& model, const Acquisition& acq, const RealGrid& dm,
                        const ModelingOptions& opts = {});

/// J^H applied to a data-space vector (real part: the gradient pairing).
ComplexGrid jacobian_adjoint_apply(const Model& model, const Acquisition& acq, const ShotData& data,
                                   const ModelingOptions& opts = {});

/// diag(L^H L): sum over sources and frequencies of |omega^2 u|^2, undamped.
RealGrid pseudo_hessian_diag(const Model& model, const Acquisition& acq, const ModelingOptions& opts = {});

/// Preconditioner denominator diag + beta * max(diag); strictly positive
/// whenever any cell is illuminated.
RealGrid damped_pseudo_hessian(const RealGrid& diag, double beta = 1e-3);

/// Data-domain Gauss-Newton matrix for one frequency, restricted to the
/// interior cells that carry model parameters: Q = S S^H + eps I (nr x nr,
/// row-major). eps <= 0 selects 1e-2 * mean(diag(S S^H)).
struct DataHessian {
  std::size_t nr = 0;
  double epsilon = 0.0;
  std::vector<cplx> q;
  cplx operator()(std::size_t i, std::size_t j) const { return q[i * nr + j]; }
};
DataHessian data_domain_hessian(const Model& model, const Acquisition& acq, std::size_t freq_index,
                                double eps = 0.0, const ModelingOptions& opts = {});

/// Gradient of the quadratic model whose residuals are replaced by
/// Q^{-1}(S(m)b* - target), Q built once per frequency and reused for all
/// sources.
GradientBundle gn_modified_gradient(const Model& model, const Acquisition& acq, const ShotData& target,
                                    double eps = 0.0, const ModelingOptions& opts = {},
                                    bool with_pseudo_hessian = false);

/// Lower-level fused evaluation shared by the inversion loops.
namespace detail {

/// Fills residual(s, f, r) for one frequency index f from predicted(s, f, r).
/// Called once per frequency, possibly concurrently for distinct f.
using ResidualFn = std::function<void(std::size_t f, const ShotData& predicted, ShotData& residual)>;

struct EvaluationRequest {
  bool gradient = true;
  bool pseudo_hessian = false;
  bool gn_data_hessian = false;
  double gn_epsilon = 0.0;
};

struct Evaluation {
  ShotData predicted;
  ShotData residual;  // as produced by the ResidualFn (before any Q^{-1})
  GradientBundle bundle;
};

Evaluation evaluate(const Model& model, const Acquisition& acq, const ModelingOptions& opts,
                    const ResidualFn& residual_fn, const EvaluationRequest& request);

}  // namespace detail

}  // namespace mwi
