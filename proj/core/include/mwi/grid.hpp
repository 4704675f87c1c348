#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mwi {

using cplx = std::complex<double>;

/// Dense 2D array stored row-major: index = iz * nx + ix (x fastest).
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int nx, int nz, T fill = T{})
      : nx_(nx), nz_(nz), data_(static_cast<std::size_t>(nx) * nz, fill) {}
  Grid2D(int nx, int nz, std::vector<T> values)
      : nx_(nx), nz_(nz), data_(std::move(values)) {
    assert(data_.size() == static_cast<std::size_t>(nx) * nz);
  }

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Grid2D& o) const { return nx_ == o.nx_ && nz_ == o.nz_; }

  std::size_t index(int ix, int iz) const {
    return static_cast<std::size_t>(iz) * nx_ + ix;
  }
  T& operator()(int ix, int iz) { return data_[index(ix, iz)]; }
  const T& operator()(int ix, int iz) const { return data_[index(ix, iz)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Grid2D&) const = default;

 private:
  int nx_ = 0;
  int nz_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid2D<double>;
using ComplexGrid = Grid2D<cplx>;

inline double max_abs(const RealGrid& g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const RealGrid& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

}  // namespace mwi
