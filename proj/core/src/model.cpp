#include "mwi/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mwi/errors.hpp"

namespace mwi {

namespace {

void check_shape(int nx, int nz, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("model: grid spacing must be positive, got " + std::to_string(h));
  }
  if (nx < 3 || nz < 3) {
    throw ConfigError("model: need at least 3 points per axis, got " + std::to_string(nx) +
                      "x" + std::to_string(nz));
  }
}

void check_values(const RealGrid& m) {
  for (double v : m) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("model: squared slowness must be positive and finite");
    }
  }
}

RealGrid filled_like(const RealGrid& g, double v) { return RealGrid(g.nx(), g.nz(), v); }

std::pair<double, double> value_range(const RealGrid& g) {
  auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  return {*lo, *hi};
}

}  // namespace

Model::Model(double h, RealGrid m) : h_(h), m_(std::move(m)) {
  check_shape(m_.nx(), m_.nz(), h_);
  check_values(m_);
  auto [lo, hi] = value_range(m_);
  m_min_ = filled_like(m_, lo);
  m_max_ = filled_like(m_, hi);
}

Model::Model(double h, RealGrid m, RealGrid m_min, RealGrid m_max) : h_(h), m_(std::move(m)) {
  check_shape(m_.nx(), m_.nz(), h_);
  check_values(m_);
  set_bounds(std::move(m_min), std::move(m_max));
}

Model Model::from_velocity(double h, const RealGrid& velocity) {
  RealGrid m(velocity.nx(), velocity.nz());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = velocity[i];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("model: velocity must be positive and finite");
    }
    m[i] = 1.0 / (v * v);
  }
  return Model(h, std::move(m));
}

void Model::set_m(RealGrid m) {
  if (!m.same_shape(m_)) throw ConfigError("model: shape mismatch in set_m");
  check_values(m);
  m_ = std::move(m);
}

void Model::set_bounds(RealGrid m_min, RealGrid m_max) {
  if (!m_min.same_shape(m_) || !m_max.same_shape(m_)) {
    throw ConfigError("model: bound grids must match the model shape");
  }
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (!(m_min[i] > 0.0) || !std::isfinite(m_max[i]) || m_min[i] > m_max[i]) {
      throw ConfigError("model: bounds must satisfy 0 < m_min <= m_max");
    }
  }
  m_min_ = std::move(m_min);
  m_max_ = std::move(m_max);
}

void Model::set_velocity_bounds(double v_min, double v_max) {
  if (!(v_min > 0.0) || !(v_max >= v_min) || !std::isfinite(v_max)) {
    throw ConfigError("model: velocity bounds must satisfy 0 < v_min <= v_max");
  }
  set_bounds(filled_like(m_, 1.0 / (v_max * v_max)), filled_like(m_, 1.0 / (v_min * v_min)));
}

RealGrid Model::velocity() const {
  RealGrid v(nx(), nz());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / std::sqrt(m_[i]);
  return v;
}

double Model::slowest_admissible_velocity() const {
  return 1.0 / std::sqrt(*std::max_element(m_max_.begin(), m_max_.end()));
}

double Model::fastest_admissible_velocity() const {
  return 1.0 / std::sqrt(*std::min_element(m_min_.begin(), m_min_.end()));
}

int grid_count(double length, double h) {
  if (!(h > 0.0) || !(length > 0.0)) throw ConfigError("grid_count: non-positive length or spacing");
  // Guard against 4800/71.0-style ratios that land a hair above an integer.
  return static_cast<int>(std::ceil(length / h - 1e-9));
}

Model make_homogeneous(int nx, int nz, double h, double velocity) {
  check_shape(nx, nz, h);
  if (!(velocity > 0.0) || !std::isfinite(velocity)) {
    throw ConfigError("make_homogeneous: velocity must be positive, got " + std::to_string(velocity));
  }
  return Model(h, RealGrid(nx, nz, 1.0 / (velocity * velocity)));
}

Model make_camembert(double h, const CamembertOptions& opts) {
  const int nx = grid_count(opts.extent.width, h);
  const int nz = grid_count(opts.extent.depth, h);
  check_shape(nx, nz, h);
  if (!(opts.diameter_fraction > 0.0)) throw ConfigError("make_camembert: diameter must be positive");

  const double cx = 0.5 * (nx - 1) * h;
  const double cz = 0.5 * (nz - 1) * h;
  const double radius = 0.5 * opts.diameter_fraction * opts.extent.width;
  RealGrid v(nx, nz, opts.background_velocity);
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const double dx = ix * h - cx;
      const double dz = iz * h - cz;
      if (dx * dx + dz * dz <= radius * radius) v(ix, iz) = opts.anomaly_velocity;
    }
  }
  return Model::from_velocity(h, v);
}

Model make_two_layer(double h, const TwoLayerOptions& opts) {
  const int nx = grid_count(opts.extent.width, h);
  const int nz = grid_count(opts.extent.depth, h);
  check_shape(nx, nz, h);
  RealGrid v(nx, nz);
  for (int iz = 0; iz < nz; ++iz) {
    // Half-cell tolerance keeps the interface on the node row when h divides it.
    const bool top = iz * h < opts.interface_depth - 1e-6 * h;
    for (int ix = 0; ix < nx; ++ix) v(ix, iz) = top ? opts.top_velocity : opts.bottom_velocity;
  }
  return Model::from_velocity(h, v);
}

Model project_bounds(const Model& model) {
  RealGrid m = model.m();
  const auto& lo = model.m_min();
  const auto& hi = model.m_max();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::clamp(m[i], lo[i], hi[i]);
  Model out = model;
  out.set_m(std::move(m));
  return out;
}

namespace {

RealGrid block_average(const RealGrid& g) {
  const int nx = (g.nx() + 1) / 2;
  const int nz = (g.nz() + 1) / 2;
  RealGrid out(nx, nz);
  for (int jz = 0; jz < nz; ++jz) {
    for (int jx = 0; jx < nx; ++jx) {
      double sum = 0.0;
      int count = 0;
      for (int dz = 0; dz < 2; ++dz) {
        for (int dx = 0; dx < 2; ++dx) {
          const int ix = 2 * jx + dx;
          const int iz = 2 * jz + dz;
          if (ix < g.nx() && iz < g.nz()) {
            sum += g(ix, iz);
            ++count;
          }
        }
      }
      out(jx, jz) = sum / count;
    }
  }
  return out;
}

// Values live at cell centres (i + 1/2) h; refined centres sit at (j + 1/2) h/2.
RealGrid bilinear_refine(const RealGrid& g) {
  const int nx = 2 * g.nx();
  const int nz = 2 * g.nz();
  RealGrid out(nx, nz);
  auto coord = [](int j, int n_coarse, int& i0, int& i1, double& w) {
    const double x = (j + 0.5) / 2.0 - 0.5;  // in coarse-cell units
    const double xc = std::clamp(x, 0.0, static_cast<double>(n_coarse - 1));
    i0 = static_cast<int>(std::floor(xc));
    i1 = std::min(i0 + 1, n_coarse - 1);
    w = xc - i0;
  };
  for (int jz = 0; jz < nz; ++jz) {
    int z0, z1;
    double wz;
    coord(jz, g.nz(), z0, z1, wz);
    for (int jx = 0; jx < nx; ++jx) {
      int x0, x1;
      double wx;
      coord(jx, g.nx(), x0, x1, wx);
      const double top = (1.0 - wx) * g(x0, z0) + wx * g(x1, z0);
      const double bot = (1.0 - wx) * g(x0, z1) + wx * g(x1, z1);
      out(jx, jz) = (1.0 - wz) * top + wz * bot;
    }
  }
  return out;
}

}  // namespace

Model resample_model(const Model& model, double factor) {
  if (factor == 0.5) {
    return Model(2.0 * model.h(), block_average(model.m()), block_average(model.m_min()),
                 block_average(model.m_max()));
  }
  if (factor == 2.0) {
    return Model(0.5 * model.h(), bilinear_refine(model.m()), bilinear_refine(model.m_min()),
                 bilinear_refine(model.m_max()));
  }
  throw ConfigError("resample_model: factor must be 0.5 or 2.0, got " + std::to_string(factor));
}

double velocity_rmse(const Model& a, const Model& b) {
  if (!a.m().same_shape(b.m())) throw ConfigError("velocity_rmse: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.m().size(); ++i) {
    const double d = 1.0 / std::sqrt(a.m()[i]) - 1.0 / std::sqrt(b.m()[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.m().size()));
}

}  // namespace mwi
