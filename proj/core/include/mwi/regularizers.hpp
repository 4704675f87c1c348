#pragma once

#include <string>

#include "mwi/grid.hpp"

namespace mwi {

enum class RegKind { none, tikhonov, tv };

RegKind parse_reg_kind(const std::string& s);
std::string to_string(RegKind k);

struct Regularizer {
  RegKind kind = RegKind::none;
  double weight = 0.0;
  int tv_inner_iters = 50;
  double tv_tolerance = 1e-6;  // relative change between inner iterates
};

/// argmin_x 1/2 ||x - image||^2 + scale * weight * R(x).
RealGrid apply_prox(const Regularizer& reg, const RealGrid& image, double scale);

/// weight * R(image): ||D x||^2 for tikhonov, sum sqrt(dx^2 + dz^2) for tv,
/// with forward differences that vanish across the last row/column.
double reg_value(const Regularizer& reg, const RealGrid& image);

}  // namespace mwi
