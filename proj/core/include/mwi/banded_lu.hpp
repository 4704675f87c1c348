#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mwi/grid.hpp"

namespace mwi {

/// Square complex band matrix in LAPACK general-band storage with room for
/// the fill-in generated by partial pivoting (ldab = 2*kl + ku + 1).
class BandMatrix {
 public:
  BandMatrix(int n, int kl, int ku);

  int n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }
  int ldab() const { return ldab_; }

  /// A(i, j) for |i - j| inside the band.
  void set(int i, int j, cplx v);
  cplx get(int i, int j) const;
  double max_abs() const;

  std::vector<cplx>& storage() { return ab_; }
  const std::vector<cplx>& storage() const { return ab_; }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<cplx> ab_;
};

/// LU factors with row interchanges confined to the band (zgbtrf), plus
/// multi right-hand-side substitution on rows stored RHS-contiguous.
class BandedLU {
 public:
  BandedLU() = default;

  /// Throws NumericalError when a pivot falls below pivot_tol * max|A|.
  static BandedLU factor(BandMatrix a, double pivot_tol = 1e-14);

  int n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }
  double min_pivot() const { return min_pivot_; }

  /// Solves A X = B in place. `b` holds n rows of `nrhs` contiguous values.
  void solve(std::span<cplx> b, int nrhs) const;

  bool operator==(const BandedLU&) const = default;

 private:
  int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<cplx> ab_;
  std::vector<int> ipiv_;
  double min_pivot_ = 0.0;
};

}  // namespace mwi
