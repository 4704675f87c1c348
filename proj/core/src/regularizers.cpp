#include "mwi/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mwi/errors.hpp"

extern "C" void dpbsv_(const char* uplo, const int* n, const int* kd, const int* nrhs, double* ab,
                       const int* ldab, double* b, const int* ldb, int* info);

namespace mwi {

RegKind parse_reg_kind(const std::string& s) {
  if (s == "none") return RegKind::none;
  if (s == "tikhonov") return RegKind::tikhonov;
  if (s == "tv") return RegKind::tv;
  throw ConfigError("unknown regularizer '" + s + "' (expected none, tikhonov or tv)");
}

std::string to_string(RegKind k) {
  switch (k) {
    case RegKind::none: return "none";
    case RegKind::tikhonov: return "tikhonov";
    case RegKind::tv: return "tv";
  }
  return "?";
}

namespace {

void check_finite(const RealGrid& g) {
  for (double v : g)
    if (!std::isfinite(v)) throw NumericalError("regularizer: non-finite image value");
}

// Forward differences; zero across the last column/row.
void gradient(const RealGrid& x, RealGrid& gx, RealGrid& gz) {
  const int nx = x.nx(), nz = x.nz();
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      gx(ix, iz) = ix + 1 < nx ? x(ix + 1, iz) - x(ix, iz) : 0.0;
      gz(ix, iz) = iz + 1 < nz ? x(ix, iz + 1) - x(ix, iz) : 0.0;
    }
  }
}

// D^T (px, pz), the negative divergence.
void gradient_transpose(const RealGrid& px, const RealGrid& pz, RealGrid& out) {
  const int nx = px.nx(), nz = px.nz();
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      double v = 0.0;
      if (ix + 1 < nx) v -= px(ix, iz);
      if (ix > 0) v += px(ix - 1, iz);
      if (iz + 1 < nz) v -= pz(ix, iz);
      if (iz > 0) v += pz(ix, iz - 1);
      out(ix, iz) = v;
    }
  }
}

// (I + c D^T D) x = b, with D^T D the zero-flux grid Laplacian. Banded SPD
// solve ordered along the shorter axis.
RealGrid tikhonov_solve(const RealGrid& b, double c) {
  const int nx = b.nx(), nz = b.nz();
  const bool x_fast = nx <= nz;
  const int kd = x_fast ? nx : nz;
  const int n = nx * nz;
  const int ldab = kd + 1;
  auto order = [&](int ix, int iz) { return x_fast ? iz * nx + ix : ix * nz + iz; };
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  // Upper storage: A(i, j) at ab[kd + i - j + j * ldab] for i <= j.
  auto add = [&](int i, int j, double v) {
    if (i > j) std::swap(i, j);
    ab[static_cast<std::size_t>(j) * ldab + kd + i - j] += v;
  };
  std::vector<double> rhs(n);
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      const int r = order(ix, iz);
      rhs[r] = b(ix, iz);
      add(r, r, 1.0);
      if (ix + 1 < nx) {
        const int q = order(ix + 1, iz);
        add(r, r, c);
        add(q, q, c);
        add(r, q, -c);
      }
      if (iz + 1 < nz) {
        const int q = order(ix, iz + 1);
        add(r, r, c);
        add(q, q, c);
        add(r, q, -c);
      }
    }
  }
  int info = 0, nrhs = 1;
  const char uplo = 'U';
  dpbsv_(&uplo, &n, &kd, &nrhs, ab.data(), &ldab, rhs.data(), &n, &info);
  if (info != 0) throw NumericalError("tikhonov prox: banded solve failed");
  RealGrid x(nx, nz);
  for (int iz = 0; iz < nz; ++iz)
    for (int ix = 0; ix < nx; ++ix) x(ix, iz) = rhs[order(ix, iz)];
  return x;
}

// Fast gradient projection on the dual of the isotropic TV prox:
// x = b - lambda D^T p with |p_ij| <= 1.
RealGrid tv_prox(const RealGrid& b, double lambda, int max_iters, double tol) {
  const int nx = b.nx(), nz = b.nz();
  RealGrid px(nx, nz), pz(nx, nz), qx(nx, nz), qz(nx, nz);
  RealGrid px_old(nx, nz), pz_old(nx, nz);
  RealGrid x = b, x_prev = b, work(nx, nz), gx(nx, nz), gz(nx, nz);
  const double step = 1.0 / (8.0 * lambda);
  double t = 1.0;

  for (int it = 0; it < max_iters; ++it) {
    // Gradient step on the dual at the extrapolated point q.
    gradient_transpose(qx, qz, work);
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = b[i] - lambda * work[i];
    gradient(work, gx, gz);
    px_old = px;
    pz_old = pz;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double ax = qx[i] + step * gx[i];
      const double az = qz[i] + step * gz[i];
      const double nrm = std::max(1.0, std::sqrt(ax * ax + az * az));
      px[i] = ax / nrm;
      pz[i] = az / nrm;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < px.size(); ++i) {
      qx[i] = px[i] + beta * (px[i] - px_old[i]);
      qz[i] = pz[i] + beta * (pz[i] - pz_old[i]);
    }
    t = t_next;

    gradient_transpose(px, pz, work);
    x_prev = x;
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = b[i] - lambda * work[i];
      diff += (x[i] - x_prev[i]) * (x[i] - x_prev[i]);
      norm += x[i] * x[i];
    }
    if (it > 0 && std::sqrt(diff) <= tol * std::sqrt(norm)) break;
  }
  return x;
}

}  // namespace

RealGrid apply_prox(const Regularizer& reg, const RealGrid& image, double scale) {
  check_finite(image);
  if (!(scale > 0.0)) throw ConfigError("apply_prox: scale must be positive");
  if (!(reg.weight >= 0.0) || !std::isfinite(reg.weight)) {
    throw ConfigError("regularizer weight must be finite and non-negative");
  }
  const double lambda = scale * reg.weight;
  if (reg.kind == RegKind::none || lambda == 0.0) return image;
  if (reg.kind == RegKind::tikhonov) return tikhonov_solve(image, 2.0 * lambda);
  if (reg.tv_inner_iters < 1) throw ConfigError("tv_inner_iters must be at least 1");
  return tv_prox(image, lambda, reg.tv_inner_iters, reg.tv_tolerance);
}

double reg_value(const Regularizer& reg, const RealGrid& image) {
  check_finite(image);
  if (reg.kind == RegKind::none || reg.weight == 0.0) return 0.0;
  RealGrid gx(image.nx(), image.nz()), gz(image.nx(), image.nz());
  gradient(image, gx, gz);
  double sum = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double a = gx[i] * gx[i] + gz[i] * gz[i];
    sum += reg.kind == RegKind::tikhonov ? a : std::sqrt(a);
  }
  return reg.weight * sum;
}

}  // namespace mwi
