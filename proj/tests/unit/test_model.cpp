#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mwi/errors.hpp"
#include "mwi/model.hpp"

using namespace mwi;

namespace {

std::set<double> velocity_set(const Model& m) {
  std::set<double> out;
  for (double v : m.velocity()) out.insert(std::round(v * 1e6) / 1e6);
  return out;
}

}  // namespace

TEST(Model, HomogeneousValues) {
  const Model m = make_homogeneous(3, 3, 10.0, 1000.0);
  for (double x : m.m()) EXPECT_DOUBLE_EQ(x, 1e-6);
  EXPECT_THROW(make_homogeneous(3, 3, 10.0, 0.0), ConfigError);
  EXPECT_THROW(make_homogeneous(2, 3, 10.0, 1000.0), ConfigError);
  EXPECT_THROW(make_homogeneous(3, 3, 0.0, 1000.0), ConfigError);
}

TEST(Model, CamembertBackgroundGrid) {
  const Model m = make_homogeneous(136, 170, 35.5, 4000.0);
  EXPECT_EQ(m.nx(), 136);
  EXPECT_EQ(m.nz(), 170);
}

TEST(Model, CamembertGrids) {
  const Model fine = make_camembert(35.5);
  EXPECT_EQ(fine.nx(), 136);
  EXPECT_EQ(fine.nz(), 170);
  const Model coarse = make_camembert(71.0);
  EXPECT_EQ(coarse.nx(), 68);
  EXPECT_EQ(coarse.nz(), 85);
  const std::set<double> expected{4000.0, 4600.0};
  EXPECT_EQ(velocity_set(fine), expected);
  EXPECT_EQ(velocity_set(coarse), expected);
  for (double h : {50.0, 100.0, 120.0}) EXPECT_EQ(velocity_set(make_camembert(h)), expected) << h;
}

TEST(Model, CamembertDiskIsCentred) {
  const Model m = make_camembert(71.0);
  const RealGrid v = m.velocity();
  EXPECT_NEAR(v(m.nx() / 2, m.nz() / 2), 4600.0, 1e-9);
  EXPECT_NEAR(v(0, 0), 4000.0, 1e-9);
  // Mirror symmetry about both centre lines.
  for (int iz = 0; iz < m.nz(); ++iz)
    for (int ix = 0; ix < m.nx(); ++ix) {
      EXPECT_EQ(v(ix, iz), v(m.nx() - 1 - ix, iz));
      EXPECT_EQ(v(ix, iz), v(ix, m.nz() - 1 - iz));
    }
}

TEST(Model, TwoLayer) {
  const Model m = make_two_layer(30.0);
  EXPECT_EQ(m.nx(), 300);
  EXPECT_EQ(m.nz(), 50);
  EXPECT_DOUBLE_EQ(m.m()(10, 10), 1.0 / (2000.0 * 2000.0));  // 0.3 km
  EXPECT_DOUBLE_EQ(m.m()(10, 40), 1.0 / (4000.0 * 4000.0));  // 1.2 km
  EXPECT_DOUBLE_EQ(m.m()(0, 19), 1.0 / (2000.0 * 2000.0));   // 570 m
  EXPECT_DOUBLE_EQ(m.m()(0, 20), 1.0 / (4000.0 * 4000.0));   // 600 m
}

TEST(Model, GeneratorsDeterministic) {
  EXPECT_EQ(make_camembert(71.0), make_camembert(71.0));
  EXPECT_EQ(make_two_layer(60.0), make_two_layer(60.0));
}

TEST(Model, VelocityRoundTrip) {
  const Model m = make_camembert(71.0);
  for (double v : m.velocity()) {
    const double err = std::min(std::abs(v - 4000.0) / 4000.0, std::abs(v - 4600.0) / 4600.0);
    EXPECT_LE(err, 1e-12);
  }
}

TEST(Model, ProjectBounds) {
  Model m = make_homogeneous(4, 4, 10.0, 2000.0);
  m.set_velocity_bounds(1500.0, 3000.0);
  EXPECT_EQ(project_bounds(m), m);

  RealGrid twice = m.m_max();
  for (double& x : twice) x *= 2.0;
  m.set_m(twice);
  const Model p = project_bounds(m);
  EXPECT_EQ(p.m(), m.m_max());
  EXPECT_EQ(project_bounds(p), p);
}

TEST(Model, ProjectBoundsIsContraction) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1e-7, 6e-7);
  Model a = make_homogeneous(6, 5, 10.0, 2000.0), b = a;
  a.set_velocity_bounds(1500.0, 2500.0);
  b.set_velocity_bounds(1500.0, 2500.0);
  for (int trial = 0; trial < 50; ++trial) {
    RealGrid x(6, 5), y(6, 5);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
    a.set_m(x);
    b.set_m(y);
    const RealGrid pa = project_bounds(a).m(), pb = project_bounds(b).m();
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LE(std::abs(pa[i] - pb[i]), std::abs(x[i] - y[i]));
      EXPECT_GE(pa[i], a.m_min()[i]);
      EXPECT_LE(pa[i], a.m_max()[i]);
    }
  }
}

TEST(Model, ResampleBpGrid) {
  const Model coarse = make_homogeneous(80, 450, 150.0, 3000.0);
  const Model fine = resample_model(coarse, 2.0);
  EXPECT_EQ(fine.nx(), 160);
  EXPECT_EQ(fine.nz(), 900);
  EXPECT_DOUBLE_EQ(fine.h(), 75.0);

  const Model back = resample_model(fine, 0.5);
  EXPECT_EQ(back.nx(), 80);
  EXPECT_EQ(back.nz(), 450);
  EXPECT_DOUBLE_EQ(back.h(), 150.0);
  EXPECT_EQ(back.m(), coarse.m());
  for (double x : fine.m()) EXPECT_DOUBLE_EQ(x, coarse.m()[0]);
  EXPECT_THROW(resample_model(coarse, 3.0), ConfigError);
}

TEST(Model, BlockAverageValues) {
  RealGrid m(6, 6);
  for (int i = 0; i < 36; ++i) m[i] = 1.0 + i;
  const Model down = resample_model(Model(10.0, m), 0.5);
  ASSERT_EQ(down.nx(), 3);
  ASSERT_EQ(down.nz(), 3);
  EXPECT_DOUBLE_EQ(down.h(), 20.0);
  EXPECT_DOUBLE_EQ(down.m()(0, 0), (1.0 + 2.0 + 7.0 + 8.0) / 4.0);
  EXPECT_DOUBLE_EQ(down.m()(2, 2), (29.0 + 30.0 + 35.0 + 36.0) / 4.0);
}

TEST(Model, GridCountUsesCeiling) {
  EXPECT_EQ(grid_count(4800.0, 35.5), 136);
  EXPECT_EQ(grid_count(6000.0, 35.5), 170);
  EXPECT_EQ(grid_count(4800.0, 71.0), 68);
  EXPECT_EQ(grid_count(6000.0, 71.0), 85);
  EXPECT_EQ(grid_count(9000.0, 30.0), 300);
  EXPECT_EQ(grid_count(12000.0, 150.0), 80);
  EXPECT_EQ(grid_count(67500.0, 150.0), 450);
}

TEST(Model, VelocityRmse) {
  const Model a = make_homogeneous(4, 4, 10.0, 2000.0);
  RealGrid v(4, 4, 2000.0);
  v(1, 1) = 2400.0;
  const Model b = Model::from_velocity(10.0, v);
  EXPECT_NEAR(velocity_rmse(a, b), 400.0 / 4.0, 1e-9);
  EXPECT_EQ(velocity_rmse(a, a), 0.0);
}

TEST(Model, RejectsNonPositiveValues) {
  RealGrid m(3, 3, 1e-6);
  m(1, 1) = -1.0;
  EXPECT_THROW(Model(10.0, m), Error);
  Model ok = make_homogeneous(3, 3, 10.0, 1000.0);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ok.set_m(m), Error);
}
