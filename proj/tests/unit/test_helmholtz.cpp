#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mwi/errors.hpp"
#include "mwi/helmholtz.hpp"

using namespace mwi;

namespace {

constexpr double kPi = std::numbers::pi;

Model random_model(int nx, int nz, double h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(1800.0, 2600.0);
  RealGrid v(nx, nz);
  for (double& x : v) x = u(rng);
  return Model::from_velocity(h, v);
}

Field random_field(const PaddedGeometry& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  Field f(g);
  for (auto& v : f.values) v = cplx(n(rng), n(rng));
  return f;
}

cplx dot_unconjugated(const Field& a, const Field& b) {
  cplx s{};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// Dense copy of the operator in natural (x-fastest) node order.
Eigen::MatrixXcd dense_operator(const DiscreteOperator& op) {
  const auto& g = op.geometry();
  const int Nx = g.Nx(), Nz = g.Nz();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(g.size(), g.size());
  auto id = [&](int i, int j) { return static_cast<Eigen::Index>(j) * Nx + i; };
  for (int j = 0; j < Nz; ++j)
    for (int i = 0; i < Nx; ++i) {
      a(id(i, j), id(i, j)) = op.diagonal(i, j);
      if (i + 1 < Nx) a(id(i, j), id(i + 1, j)) = a(id(i + 1, j), id(i, j)) = op.coupling_x(i, j);
      if (j + 1 < Nz) a(id(i, j), id(i, j + 1)) = a(id(i, j + 1), id(i, j)) = op.coupling_z(i, j);
    }
  return a;
}

double residual(const DiscreteOperator& op, const Field& x, const Field& b) {
  const Field ax = op.apply(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    num += std::norm(ax.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(Helmholtz, InteriorStencil) {
  const double h = 10.0, v = 1500.0, omega = 2.0 * kPi * 8.0;
  const Model m = make_homogeneous(12, 12, h, v);
  const auto op = assemble(m, omega, PmlConfig{});
  const int i = 12 + 6, j = 12 + 5;  // well inside the interior
  const double mm = 1.0 / (v * v);
  EXPECT_NEAR(std::abs(op.diagonal(i, j) - cplx(4.0 / (h * h) - omega * omega * mm)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(op.coupling_x(i, j) - cplx(-1.0 / (h * h))), 0.0, 1e-17);
  EXPECT_NEAR(std::abs(op.coupling_z(i, j) - cplx(-1.0 / (h * h))), 0.0, 1e-17);
}

TEST(Helmholtz, NoDampingGivesPlainDiscretisation) {
  const double h = 20.0, omega = 2.0 * kPi * 3.0;
  const Model m = random_model(10, 9, h, 4);
  const auto op = assemble(m, omega, PmlConfig{8, 1.0});
  const auto& g = op.geometry();
  for (int j = 0; j < g.Nz(); ++j)
    for (int i = 0; i < g.Nx(); ++i) {
      const int ix = std::clamp(i - g.pml, 0, g.nx - 1), iz = std::clamp(j - g.pml, 0, g.nz - 1);
      EXPECT_EQ(op.stretch(i, j), cplx(1.0));
      EXPECT_NEAR(std::abs(op.diagonal(i, j) - cplx(4.0 / (h * h) - omega * omega * m.m()(ix, iz))), 0.0, 1e-14);
      if (i + 1 < g.Nx()) EXPECT_EQ(op.coupling_x(i, j), cplx(-1.0 / (h * h)));
      if (j + 1 < g.Nz()) EXPECT_EQ(op.coupling_z(i, j), cplx(-1.0 / (h * h)));
    }
}

TEST(Helmholtz, ComplexSymmetric) {
  const Model m = random_model(12, 12, 15.0, 8);
  const auto op = assemble(m, 2.0 * kPi * 6.0, PmlConfig{});
  const Field x = random_field(op.geometry(), 1), y = random_field(op.geometry(), 2);
  const cplx a = dot_unconjugated(op.apply(x), y), b = dot_unconjugated(x, op.apply(y));
  EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(Helmholtz, PmlParameterChecks) {
  const Model m = make_homogeneous(10, 10, 10.0, 2000.0);
  EXPECT_THROW(assemble(m, 10.0, PmlConfig{6, 1e-3}), ConfigError);
  EXPECT_NO_THROW(assemble(m, 10.0, PmlConfig{0, 1.0}));
  EXPECT_THROW(assemble(m, 0.0, PmlConfig{}), ConfigError);
  EXPECT_THROW(assemble(m, 10.0, PmlConfig{12, 0.0}), ConfigError);
}

TEST(Helmholtz, SolveResidual) {
  const Model m = make_homogeneous(12, 12, 20.0, 2000.0);
  const auto op = assemble(m, 2.0 * kPi * 5.0, PmlConfig{});
  const auto fac = factorize(op);
  const Field b = random_field(op.geometry(), 3);
  EXPECT_LE(residual(op, solve_forward(fac, b), b), 1e-10);
}

TEST(Helmholtz, FactorizationDeterministic) {
  const Model m = random_model(12, 12, 20.0, 5);
  const auto op = assemble(m, 2.0 * kPi * 5.0, PmlConfig{});
  EXPECT_EQ(factorize(op).lu(), factorize(op).lu());
}

TEST(Helmholtz, MatchesDenseOracle) {
  // Both orientations: Nx < Nz keeps natural order, Nx > Nz permutes.
  for (auto [nx, nz] : {std::pair{10, 10}, std::pair{12, 9}, std::pair{9, 13}}) {
    const Model m = random_model(nx, nz, 15.0, 9 + nx);
    const auto op = assemble(m, 2.0 * kPi * 7.0, PmlConfig{});
    const Field b = random_field(op.geometry(), 10);
    const Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(b.values.data(), b.values.size());
    const Eigen::VectorXcd expected = dense_operator(op).partialPivLu().solve(rhs);
    const Field x = solve_forward(factorize(op), b);
    const Eigen::VectorXcd got = Eigen::Map<const Eigen::VectorXcd>(x.values.data(), x.values.size());
    EXPECT_LE((got - expected).norm() / expected.norm(), 1e-9) << nx << "x" << nz;
  }
}

TEST(Helmholtz, AdjointDotTest) {
  const Model m = random_model(14, 11, 15.0, 12);
  const auto op = assemble(m, 2.0 * kPi * 6.0, PmlConfig{});
  const auto fac = factorize(op);
  const Field x = random_field(op.geometry(), 13), y = random_field(op.geometry(), 14);
  const cplx lhs = dot(solve_forward(fac, x).values, y.values);
  const cplx rhs = dot(x.values, solve_adjoint(fac, y).values);
  EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
}

TEST(Helmholtz, ZeroSourceZeroField) {
  const Model m = random_model(10, 10, 15.0, 15);
  const auto fac = factorize(assemble(m, 2.0 * kPi * 6.0, PmlConfig{}));
  const Field u = solve_forward(fac, Field(fac.geometry()));
  for (const auto& v : u.values) EXPECT_EQ(v, cplx{});
}

TEST(Helmholtz, BatchSolveMatchesSingleSolves) {
  const Model m = random_model(13, 10, 15.0, 16);
  const auto fac = factorize(assemble(m, 2.0 * kPi * 6.0, PmlConfig{}));
  FieldBatch batch(fac.geometry(), 3);
  std::vector<Field> singles;
  for (int k = 0; k < 3; ++k) {
    const Field b = random_field(fac.geometry(), 20 + k);
    for (std::size_t n = 0; n < b.values.size(); ++n) batch(n, k) = b.values[n];
    singles.push_back(solve_forward(fac, b));
  }
  fac.solve(batch);
  for (int k = 0; k < 3; ++k) {
    const Field f = batch.field(k);
    for (std::size_t n = 0; n < f.values.size(); ++n)
      EXPECT_LE(std::abs(f.values[n] - singles[k].values[n]), 1e-13 * std::abs(singles[k].values[n]) + 1e-300);
  }
}

TEST(Sampling, AdjointPair) {
  const PaddedGeometry g{15, 12, 8, 25.0};
  const std::vector<GridPoint> pts{{0, 0}, {3, 4}, {14, 11}, {3, 4}, {7, 2}};
  const Field u = random_field(g, 30);
  std::mt19937 rng(31);
  std::normal_distribution<double> n;
  std::vector<cplx> d(pts.size());
  for (auto& x : d) x = cplx(n(rng), n(rng));
  const cplx lhs = dot(sample(u, pts), d);
  const cplx rhs = g.h * g.h * dot(u.values, inject(d, pts, g).values);
  EXPECT_LE(std::abs(lhs - rhs), 1e-14 * std::abs(lhs));
}

TEST(Sampling, UnitFieldAndPointInjection) {
  const PaddedGeometry g{10, 10, 8, 10.0};
  Field ones(g);
  for (auto& v : ones.values) v = 1.0;
  const std::vector<GridPoint> pts{{1, 2}, {5, 5}, {9, 0}};
  for (const auto& s : sample(ones, pts)) EXPECT_EQ(s, cplx(1.0));

  const std::vector<cplx> e1{1.0, 0.0, 0.0};
  const Field f = inject(e1, pts, g);
  for (std::size_t n = 0; n < f.values.size(); ++n) {
    if (n == g.node(pts[0])) {
      EXPECT_EQ(f.values[n], cplx(1.0 / (g.h * g.h)));
    } else {
      EXPECT_EQ(f.values[n], cplx{});
    }
  }
}

TEST(Helmholtz, Reciprocity) {
  const Model m = random_model(16, 13, 15.0, 40);
  const auto fac = factorize(assemble(m, 2.0 * kPi * 6.0, PmlConfig{}));
  const std::vector<GridPoint> a{{2, 3}}, b{{13, 10}};
  const std::vector<cplx> one{1.0};
  const cplx ab = sample(solve_forward(fac, inject(one, a, fac.geometry())), b)[0];
  const cplx ba = sample(solve_forward(fac, inject(one, b, fac.geometry())), a)[0];
  EXPECT_LE(std::abs(ab - ba), 1e-10 * std::abs(ab));
}

// Homogeneous medium, 32 points per wavelength, probes 3 to 3.5 wavelengths
// from the source and 2 wavelengths from the absorbing layer.
TEST(Helmholtz, GreensFunctionOracle) {
  const double v = 2000.0, f = 5.0, lambda = v / f, h = lambda / 32.0;
  const int nx = 241, nz = 129;
  const GridPoint src{64, 64};
  const Model m = make_homogeneous(nx, nz, h, v);
  const auto fac = factorize(assemble(m, 2.0 * kPi * f, PmlConfig{}));
  const std::vector<cplx> one{1.0};
  const Field u = solve_forward(fac, inject(one, std::vector<GridPoint>{src}, fac.geometry()));

  const double k = 2.0 * kPi * f / v;
  int checked = 0;
  for (int ix = src.ix; ix < nx; ++ix) {
    const double r = (ix - src.ix) * h;
    const double to_pml = (nx - 1 - ix) * h;
    if (r < 3.0 * lambda || r > 3.5 * lambda || to_pml < 2.0 * lambda) continue;
    // e^{-i omega t}: G = (i/4) H0^(1)(k r).
    const cplx g = cplx(0.0, 0.25) * cplx(std::cyl_bessel_j(0.0, k * r), std::cyl_neumann(0.0, k * r));
    const cplx got = u.at({ix, src.iz});
    EXPECT_LE(std::abs(std::abs(got) / std::abs(g) - 1.0), 0.03) << "r = " << r;
    EXPECT_LE(std::abs(std::arg(got / g)), 0.05) << "r = " << r;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(Helmholtz, DoublingFrequencyHalvesWavelength) {
  const double v = 2000.0, h = 10.0;
  const int nx = 201, nz = 41;
  const GridPoint src{20, 20};
  const Model m = make_homogeneous(nx, nz, h, v);
  auto mean_spacing = [&](double f) {
    const auto fac = factorize(assemble(m, 2.0 * kPi * f, PmlConfig{}));
    const std::vector<cplx> one{1.0};
    const Field u = solve_forward(fac, inject(one, std::vector<GridPoint>{src}, fac.geometry()));
    std::vector<double> zeros;
    for (int ix = src.ix + 5; ix + 1 < nx - 5; ++ix) {
      const double a = u.at({ix, src.iz}).real(), b = u.at({ix + 1, src.iz}).real();
      if ((a < 0.0) != (b < 0.0)) zeros.push_back(ix + a / (a - b));
    }
    return (zeros.back() - zeros.front()) / (zeros.size() - 1);
  };
  const double s1 = mean_spacing(10.0), s2 = mean_spacing(20.0);
  EXPECT_NEAR(s1 / 2.0, s2, 1.0);
  EXPECT_NEAR(s1, v / 10.0 / 2.0 / h, 1.0);  // half a wavelength between crossings
}
