#include "mwi/banded_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <sstream>

#include "mwi/errors.hpp"

extern "C" void zgbtrf_(const int* m, const int* n, const int* kl, const int* ku,
                        std::complex<double>* ab, const int* ldab, int* ipiv, int* info);

namespace mwi {

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(ldab_) * n, cplx{}) {
  if (n < 1 || kl < 0 || ku < 0) throw ConfigError("BandMatrix: invalid dimensions");
}

void BandMatrix::set(int i, int j, cplx v) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_) {
    throw ConfigError("BandMatrix::set: (" + std::to_string(i) + ", " + std::to_string(j) + ") is outside the band");
  }
  ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)] = v;
}

cplx BandMatrix::get(int i, int j) const {
  if (i - j > kl_ || j - i > ku_) return {};
  return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

double BandMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : ab_) m = std::max(m, std::abs(v));
  return m;
}

BandedLU BandedLU::factor(BandMatrix a, double pivot_tol) {
  BandedLU lu;
  lu.n_ = a.n();
  lu.kl_ = a.kl();
  lu.ku_ = a.ku();
  lu.ldab_ = a.ldab();
  const double scale = a.max_abs();
  lu.ab_ = std::move(a.storage());
  lu.ipiv_.resize(lu.n_);
  int info = 0;
  zgbtrf_(&lu.n_, &lu.n_, &lu.kl_, &lu.ku_, lu.ab_.data(), &lu.ldab_, lu.ipiv_.data(), &info);
  if (info < 0) throw NumericalError("zgbtrf: invalid argument " + std::to_string(-info));

  const int kv = lu.kl_ + lu.ku_;
  double min_pivot = std::numeric_limits<double>::infinity();
  int worst = 0;
  for (int j = 0; j < lu.n_; ++j) {
    const double p = std::abs(lu.ab_[static_cast<std::size_t>(j) * lu.ldab_ + kv]);
    if (p < min_pivot) {
      min_pivot = p;
      worst = j;
    }
  }
  lu.min_pivot_ = min_pivot;
  if (info > 0 || !(min_pivot >= pivot_tol * scale)) {
    std::ostringstream os;
    os << "banded LU: numerically singular matrix (pivot " << min_pivot << " at row " << worst
       << ", max coefficient " << scale << ")";
    throw NumericalError(os.str());
  }
  return lu;
}

// Same sweeps as zgbtrs('N') but with the right-hand sides interleaved so the
// innermost loop runs over contiguous memory.
void BandedLU::solve(std::span<cplx> b, int nrhs) const {
  if (b.size() != static_cast<std::size_t>(n_) * nrhs) {
    throw ConfigError("BandedLU::solve: right-hand side has wrong size");
  }
  const int kv = kl_ + ku_;
  double* x = reinterpret_cast<double*>(b.data());
  const double* ab = reinterpret_cast<const double*>(ab_.data());
  const std::size_t w = 2 * static_cast<std::size_t>(nrhs);

  // L solve with the recorded interchanges.
  for (int j = 0; j < n_ - 1; ++j) {
    const int p = ipiv_[j] - 1;
    double* xj = x + j * w;
    if (p != j) std::swap_ranges(xj, xj + w, x + p * w);
    const int lm = std::min(kl_, n_ - 1 - j);
    const double* col = ab + 2 * (static_cast<std::size_t>(j) * ldab_ + kv + 1);
    for (int t = 0; t < lm; ++t) {
      const double lr = col[2 * t], li = col[2 * t + 1];
      if (lr == 0.0 && li == 0.0) continue;
      double* xi = x + (j + 1 + t) * w;
      for (std::size_t k = 0; k < w; k += 2) {
        const double br = xj[k], bi = xj[k + 1];
        xi[k] -= lr * br - li * bi;
        xi[k + 1] -= lr * bi + li * br;
      }
    }
  }

  // U solve, column oriented.
  for (int j = n_ - 1; j >= 0; --j) {
    const double* col = ab + 2 * static_cast<std::size_t>(j) * ldab_;
    const double dr = col[2 * kv], di = col[2 * kv + 1];
    const double den = dr * dr + di * di;
    const double ir = dr / den, ii = -di / den;
    double* xj = x + j * w;
    for (std::size_t k = 0; k < w; k += 2) {
      const double br = xj[k], bi = xj[k + 1];
      xj[k] = br * ir - bi * ii;
      xj[k + 1] = br * ii + bi * ir;
    }
    const int i0 = std::max(0, j - kv);
    for (int i = i0; i < j; ++i) {
      const double ur = col[2 * (kv + i - j)], ui = col[2 * (kv + i - j) + 1];
      if (ur == 0.0 && ui == 0.0) continue;
      double* xi = x + i * w;
      for (std::size_t k = 0; k < w; k += 2) {
        const double br = xj[k], bi = xj[k + 1];
        xi[k] -= ur * br - ui * bi;
        xi[k + 1] -= ur * bi + ui * br;
      }
    }
  }
}

}  // namespace mwi
