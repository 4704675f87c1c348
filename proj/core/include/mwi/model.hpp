#pragma once

#include <optional>

#include "mwi/grid.hpp"

namespace mwi {

/// Subsurface model on a uniform square grid, stored as squared slowness
/// (s^2/m^2). Bounds are kept per cell; after project_bounds every value lies
/// inside [m_min, m_max].
class Model {
 public:
  Model() = default;

  /// Validates dimensions, spacing and strict positivity of every value.
  /// Bounds default to the value range of `m`.
  Model(double h, RealGrid m);
  Model(double h, RealGrid m, RealGrid m_min, RealGrid m_max);

  static Model from_velocity(double h, const RealGrid& velocity);

  int nx() const { return m_.nx(); }
  int nz() const { return m_.nz(); }
  double h() const { return h_; }

  const RealGrid& m() const { return m_; }
  const RealGrid& m_min() const { return m_min_; }
  const RealGrid& m_max() const { return m_max_; }

  /// Replaces the values; throws NumericalError if any is non-positive or
  /// non-finite.
  void set_m(RealGrid m);
  void set_bounds(RealGrid m_min, RealGrid m_max);
  /// Scalar bounds given as velocities (the fast bound is the small m).
  void set_velocity_bounds(double v_min, double v_max);

  RealGrid velocity() const;
  /// Slowest velocity admitted by the bounds, 1/sqrt(max m_max).
  double slowest_admissible_velocity() const;
  double fastest_admissible_velocity() const;

  bool operator==(const Model&) const = default;

 private:
  double h_ = 0.0;
  RealGrid m_;
  RealGrid m_min_;
  RealGrid m_max_;
};

struct Extent {
  double width;  // horizontal, meters
  double depth;  // vertical, meters
};

/// Grid count covering `length` at spacing h: ceil(length / h).
int grid_count(double length, double h);

Model make_homogeneous(int nx, int nz, double h, double velocity);

struct CamembertOptions {
  Extent extent{4800.0, 6000.0};
  double background_velocity = 4000.0;
  double anomaly_velocity = 4600.0;
  double diameter_fraction = 0.4;  // of model width
};
Model make_camembert(double h, const CamembertOptions& opts = {});

struct TwoLayerOptions {
  Extent extent{9000.0, 1500.0};
  double interface_depth = 600.0;
  double top_velocity = 2000.0;
  double bottom_velocity = 4000.0;
};
Model make_two_layer(double h, const TwoLayerOptions& opts = {});

Model project_bounds(const Model& model);

/// factor 0.5: 2x2 block averaging (spacing doubles). factor 2: bilinear
/// refinement of cell-centred values (spacing halves). Bounds follow the
/// same rule.
Model resample_model(const Model& model, double factor);

/// Root-mean-square velocity difference in m/s over all cells.
double velocity_rmse(const Model& a, const Model& b);

}  // namespace mwi
