#include "mwi/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <sstream>

#include "mwi/errors.hpp"

namespace mwi {

namespace {

constexpr cplx kI{0.0, 1.0};

// Quadratic damping profile over the pad; `pos` is a padded node coordinate
// (possibly a half node) along one axis of an interior of n nodes.
double sigma_at(double pos, int n, int pml, double sigma_max) {
  if (pml == 0) return 0.0;
  const double x = pos - pml;  // interior spans [0, n-1]
  double depth = 0.0;
  if (x < 0.0) depth = -x;
  if (x > n - 1) depth = x - (n - 1);
  depth = std::min(depth, static_cast<double>(pml));
  const double r = depth / pml;
  return sigma_max * r * r;
}

}  // namespace

PaddedGeometry padded_geometry(const Model& model, const PmlConfig& pml) {
  if (pml.cells < 0) throw ConfigError("PML width must be non-negative");
  return PaddedGeometry{model.nx(), model.nz(), pml.cells, model.h()};
}

Field FieldBatch::field(int k) const {
  Field f(geometry);
  for (std::size_t n = 0; n < geometry.size(); ++n) f.values[n] = values[n * count + k];
  return f;
}

DiscreteOperator assemble(const Model& model, double omega, const PmlConfig& pml,
                          const Model* pad_reference) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ConfigError("assemble: angular frequency must be positive and finite");
  }
  if (pml.cells < 8 && pml.reflection < 1.0) {
    throw ConfigError("assemble: PML needs at least 8 cells, got " + std::to_string(pml.cells));
  }
  if (!(pml.reflection > 0.0 && pml.reflection <= 1.0)) {
    throw ConfigError("assemble: PML reflection must lie in (0, 1]");
  }
  const Model& pad = pad_reference ? *pad_reference : model;
  if (!pad.m().same_shape(model.m())) throw ConfigError("assemble: pad reference shape mismatch");

  DiscreteOperator op;
  op.geom_ = padded_geometry(model, pml);
  op.omega_ = omega;
  const auto& g = op.geom_;
  const int Nx = g.Nx(), Nz = g.Nz(), p = g.pml;
  const double h = g.h;
  const double inv_h2 = 1.0 / (h * h);

  // PML strength from the fastest pad-reference velocity.
  double vmax_pad = 0.0;
  for (double m : pad.m()) vmax_pad = std::max(vmax_pad, 1.0 / std::sqrt(m));
  const double thickness = p * h;
  const double sigma_max =
      (p > 0 && pml.reflection < 1.0) ? 3.0 * vmax_pad * std::log(1.0 / pml.reflection) / (2.0 * thickness)
                                      : 0.0;

  auto stretch = [&](double pos, int n) { return 1.0 + kI * sigma_at(pos, n, p, sigma_max) / omega; };

  std::vector<cplx> sx(Nx), sx_half(Nx + 1), sz(Nz), sz_half(Nz + 1);
  for (int i = 0; i < Nx; ++i) sx[i] = stretch(i, g.nx);
  for (int i = 0; i <= Nx; ++i) sx_half[i] = stretch(i - 0.5, g.nx);  // node i-1/2
  for (int j = 0; j < Nz; ++j) sz[j] = stretch(j, g.nz);
  for (int j = 0; j <= Nz; ++j) sz_half[j] = stretch(j - 0.5, g.nz);

  op.diag_ = ComplexGrid(Nx, Nz);
  op.cx_ = ComplexGrid(Nx, Nz);
  op.cz_ = ComplexGrid(Nx, Nz);
  op.stretch_ = ComplexGrid(Nx, Nz);

  double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
  for (int j = 0; j < Nz; ++j) {
    for (int i = 0; i < Nx; ++i) {
      const int ix = std::clamp(i - p, 0, g.nx - 1);
      const int iz = std::clamp(j - p, 0, g.nz - 1);
      const double m = g.is_interior(i, j) ? model.m()(ix, iz) : pad.m()(ix, iz);
      if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("assemble: non-finite model value");
      const double v = 1.0 / std::sqrt(m);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);

      const cplx s = sx[i] * sz[j];
      op.stretch_(i, j) = s;
      const cplx east = sz[j] / sx_half[i + 1];
      const cplx west = sz[j] / sx_half[i];
      const cplx south = sx[i] / sz_half[j + 1];
      const cplx north = sx[i] / sz_half[j];
      op.diag_(i, j) = (east + west + south + north) * inv_h2 - omega * omega * m * s;
      op.cx_(i, j) = i + 1 < Nx ? -east * inv_h2 : cplx{};
      op.cz_(i, j) = j + 1 < Nz ? -south * inv_h2 : cplx{};
    }
  }
  op.vmin_ = vmin;
  op.vmax_ = vmax;
  const double f = omega / (2.0 * std::numbers::pi);
  op.min_ppw_ = vmin / (f * h);
  return op;
}

Field DiscreteOperator::apply(const Field& x) const {
  if (!(x.geometry == geom_)) throw ConfigError("DiscreteOperator::apply: geometry mismatch");
  const int Nx = geom_.Nx(), Nz = geom_.Nz();
  Field y(geom_);
  auto u = [&](int i, int j) { return x.values[static_cast<std::size_t>(j) * Nx + i]; };
  for (int j = 0; j < Nz; ++j) {
    for (int i = 0; i < Nx; ++i) {
      cplx acc = diag_(i, j) * u(i, j);
      if (i + 1 < Nx) acc += cx_(i, j) * u(i + 1, j);
      if (i > 0) acc += cx_(i - 1, j) * u(i - 1, j);
      if (j + 1 < Nz) acc += cz_(i, j) * u(i, j + 1);
      if (j > 0) acc += cz_(i, j - 1) * u(i, j - 1);
      y.values[static_cast<std::size_t>(j) * Nx + i] = acc;
    }
  }
  return y;
}

Factorization::Factorization(const DiscreteOperator& op)
    : geom_(op.geometry()), omega_(op.omega()) {
  const int Nx = geom_.Nx(), Nz = geom_.Nz();
  x_fast_ = Nx <= Nz;
  band_ = x_fast_ ? Nx : Nz;
  const int n = Nx * Nz;
  auto order = [&](int i, int j) { return x_fast_ ? j * Nx + i : i * Nz + j; };

  BandMatrix a(n, band_, band_);
  for (int j = 0; j < Nz; ++j) {
    for (int i = 0; i < Nx; ++i) {
      const int r = order(i, j);
      a.set(r, r, op.diagonal(i, j));
      if (i + 1 < Nx) {
        const int c = order(i + 1, j);
        a.set(r, c, op.coupling_x(i, j));
        a.set(c, r, op.coupling_x(i, j));
      }
      if (j + 1 < Nz) {
        const int c = order(i, j + 1);
        a.set(r, c, op.coupling_z(i, j));
        a.set(c, r, op.coupling_z(i, j));
      }
    }
  }
  try {
    lu_ = BandedLU::factor(std::move(a));
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << e.what() << " [frequency " << omega_ / (2.0 * std::numbers::pi) << " Hz, grid " << geom_.nx
       << "x" << geom_.nz << " + " << geom_.pml << " PML, velocity range " << op.min_velocity() << "-"
       << op.max_velocity() << " m/s]";
    throw NumericalError(os.str());
  }
}

namespace {

// Natural (x-fastest) node index <-> solver row.
template <typename F>
void for_each_row(const PaddedGeometry& g, bool x_fast, F&& f) {
  const int Nx = g.Nx(), Nz = g.Nz();
  for (int j = 0; j < Nz; ++j) {
    for (int i = 0; i < Nx; ++i) {
      const std::size_t natural = static_cast<std::size_t>(j) * Nx + i;
      const std::size_t row = x_fast ? natural : static_cast<std::size_t>(i) * Nz + j;
      f(natural, row);
    }
  }
}

}  // namespace

void Factorization::solve(FieldBatch& b) const {
  if (!(b.geometry == geom_)) throw ConfigError("Factorization::solve: geometry mismatch");
  if (b.count == 0) return;
  if (x_fast_) {
    lu_.solve(b.values, b.count);
    return;
  }
  std::vector<cplx> work(b.values.size());
  const std::size_t w = b.count;
  for_each_row(geom_, x_fast_, [&](std::size_t nat, std::size_t row) {
    std::copy_n(&b.values[nat * w], w, &work[row * w]);
  });
  lu_.solve(work, b.count);
  for_each_row(geom_, x_fast_, [&](std::size_t nat, std::size_t row) {
    std::copy_n(&work[row * w], w, &b.values[nat * w]);
  });
}

void Factorization::solve_adjoint(FieldBatch& b) const {
  for (auto& v : b.values) v = std::conj(v);
  solve(b);
  for (auto& v : b.values) v = std::conj(v);
}

namespace {

FieldBatch as_batch(const Field& f) {
  FieldBatch b(f.geometry, 1);
  b.values = f.values;
  return b;
}

}  // namespace

Field solve_forward(const Factorization& fac, const Field& source) {
  if (!(source.geometry == fac.geometry())) throw ConfigError("solve_forward: geometry mismatch");
  FieldBatch b = as_batch(source);
  fac.solve(b);
  Field out(source.geometry);
  out.values = std::move(b.values);
  return out;
}

Field solve_adjoint(const Factorization& fac, const Field& source) {
  if (!(source.geometry == fac.geometry())) throw ConfigError("solve_adjoint: geometry mismatch");
  FieldBatch b = as_batch(source);
  fac.solve_adjoint(b);
  Field out(source.geometry);
  out.values = std::move(b.values);
  return out;
}

namespace {

void check_points(std::span<const GridPoint> points, const PaddedGeometry& g) {
  for (const auto& p : points) {
    if (p.ix < 0 || p.ix >= g.nx || p.iz < 0 || p.iz >= g.nz) {
      throw ConfigError("point (" + std::to_string(p.ix) + ", " + std::to_string(p.iz) +
                        ") is outside the interior grid");
    }
  }
}

}  // namespace

std::vector<cplx> sample(const Field& field, std::span<const GridPoint> points) {
  check_points(points, field.geometry);
  std::vector<cplx> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(field.at(p));
  return out;
}

Field inject(std::span<const cplx> values, std::span<const GridPoint> points,
             const PaddedGeometry& geometry) {
  if (values.size() != points.size()) throw ConfigError("inject: value/point count mismatch");
  check_points(points, geometry);
  Field f(geometry);
  const double w = 1.0 / (geometry.h * geometry.h);
  for (std::size_t i = 0; i < points.size(); ++i) f.at(points[i]) += values[i] * w;
  return f;
}

}  // namespace mwi
