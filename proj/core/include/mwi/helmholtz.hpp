#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mwi/acquisition.hpp"
#include "mwi/banded_lu.hpp"
#include "mwi/grid.hpp"
#include "mwi/model.hpp"

namespace mwi {

struct PmlConfig {
  int cells = 12;
  /// Theoretical normal-incidence reflection; 1 disables damping.
  double reflection = 1e-3;
};

/// Interior grid surrounded by `pml` absorbing cells on all four sides.
struct PaddedGeometry {
  int nx = 0;
  int nz = 0;
  int pml = 0;
  double h = 0.0;

  int Nx() const { return nx + 2 * pml; }
  int Nz() const { return nz + 2 * pml; }
  std::size_t size() const { return static_cast<std::size_t>(Nx()) * Nz(); }
  std::size_t node(GridPoint p) const {
    return static_cast<std::size_t>(p.iz + pml) * Nx() + (p.ix + pml);
  }
  bool is_interior(int ix_padded, int iz_padded) const {
    return ix_padded >= pml && ix_padded < pml + nx && iz_padded >= pml && iz_padded < pml + nz;
  }
  bool operator==(const PaddedGeometry&) const = default;
};

/// Complex wavefield on the padded grid, row-major (x fastest).
struct Field {
  PaddedGeometry geometry;
  std::vector<cplx> values;

  explicit Field(const PaddedGeometry& g) : geometry(g), values(g.size(), cplx{}) {}
  cplx& at(GridPoint p) { return values[geometry.node(p)]; }
  cplx at(GridPoint p) const { return values[geometry.node(p)]; }
};

/// Several fields sharing one geometry: `values[node * count + k]`.
struct FieldBatch {
  PaddedGeometry geometry;
  int count = 0;
  std::vector<cplx> values;

  FieldBatch(const PaddedGeometry& g, int n)
      : geometry(g), count(n), values(g.size() * static_cast<std::size_t>(n), cplx{}) {}
  cplx& operator()(std::size_t node, int k) { return values[node * count + k]; }
  cplx operator()(std::size_t node, int k) const { return values[node * count + k]; }
  Field field(int k) const;
};

/// Five-point discretisation of  -omega^2 m s_x s_z u - d_x(s_z/s_x d_x u)
/// - d_z(s_x/s_z d_z u)  with s = 1 + i sigma/omega. Multiplying through by
/// s_x s_z keeps the matrix complex symmetric; in the interior it reduces to
/// (4/h^2 - omega^2 m) on the diagonal and -1/h^2 on the four neighbours.
class DiscreteOperator {
 public:
  const PaddedGeometry& geometry() const { return geom_; }
  double omega() const { return omega_; }

  cplx diagonal(int ix, int iz) const { return diag_(ix, iz); }
  /// Coupling between padded nodes (ix, iz) and (ix + 1, iz).
  cplx coupling_x(int ix, int iz) const { return cx_(ix, iz); }
  /// Coupling between padded nodes (ix, iz) and (ix, iz + 1).
  cplx coupling_z(int ix, int iz) const { return cz_(ix, iz); }
  /// Complex-stretch product s_x s_z at a padded node (multiplies m).
  cplx stretch(int ix, int iz) const { return stretch_(ix, iz); }

  /// y = A x.
  Field apply(const Field& x) const;

  /// Points per wavelength of the slowest cell at this frequency.
  double min_points_per_wavelength() const { return min_ppw_; }
  bool dispersion_warning() const { return min_ppw_ < 6.0; }
  double min_velocity() const { return vmin_; }
  double max_velocity() const { return vmax_; }

 private:
  friend DiscreteOperator assemble(const Model&, double, const PmlConfig&, const Model*);
  PaddedGeometry geom_;
  double omega_ = 0.0;
  ComplexGrid diag_, cx_, cz_, stretch_;
  double min_ppw_ = 0.0;
  double vmin_ = 0.0, vmax_ = 0.0;
};

/// Assembles A(m, omega). Pad cells copy the nearest edge cell of
/// `pad_reference` (the model itself when null), and the PML strength is set
/// from its fastest velocity, so derivatives with respect to interior cells
/// hold the pad fixed when a reference is given.
DiscreteOperator assemble(const Model& model, double omega, const PmlConfig& pml,
                          const Model* pad_reference = nullptr);

/// Banded LU of an assembled operator, lexicographically ordered along the
/// shorter padded axis so the bandwidth is min(Nx, Nz).
class Factorization {
 public:
  explicit Factorization(const DiscreteOperator& op);

  const PaddedGeometry& geometry() const { return geom_; }
  double omega() const { return omega_; }
  int bandwidth() const { return band_; }
  const BandedLU& lu() const { return lu_; }

  /// In place: A X = B.
  void solve(FieldBatch& b) const;
  /// In place: A^H X = B, through the same factors (A is complex symmetric,
  /// so A^H X = B is conj(A^{-1} conj(B))).
  void solve_adjoint(FieldBatch& b) const;

 private:
  PaddedGeometry geom_;
  double omega_ = 0.0;
  bool x_fast_ = true;
  int band_ = 0;
  BandedLU lu_;
};

inline Factorization factorize(const DiscreteOperator& op) { return Factorization(op); }

Field solve_forward(const Factorization& fac, const Field& source);
Field solve_adjoint(const Factorization& fac, const Field& source);

/// Nodal values at the given interior points.
std::vector<cplx> sample(const Field& field, std::span<const GridPoint> points);
/// Point loads values[i] / h^2 at the given points (duplicates accumulate).
/// With the cell-area inner product <u, v> = h^2 sum conj(u) v on fields this
/// is the exact adjoint of sample().
Field inject(std::span<const cplx> values, std::span<const GridPoint> points,
             const PaddedGeometry& geometry);

inline std::vector<cplx> sample(const Field& f, const Acquisition& acq) {
  return sample(f, acq.receivers);
}
inline Field inject(std::span<const cplx> values, const Acquisition& acq, const PaddedGeometry& g) {
  return inject(values, acq.receivers, g);
}

PaddedGeometry padded_geometry(const Model& model, const PmlConfig& pml);

}  // namespace mwi
