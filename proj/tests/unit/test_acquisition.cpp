#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mwi/acquisition.hpp"
#include "mwi/errors.hpp"
#include "mwi/model.hpp"

using namespace mwi;

TEST(Ricker, ZeroAtDc) { EXPECT_EQ(ricker_spectrum(10.0, 0.0), 0.0); }

TEST(Ricker, PeakAtPeakFrequency) {
  const double fp = 10.0;
  double best_f = 0.0, best = -1.0;
  for (int i = 1; i <= 40000; ++i) {
    const double f = i * 1e-3;
    const double w = ricker_spectrum(fp, f);
    if (w > best) {
      best = w;
      best_f = f;
    }
  }
  EXPECT_NEAR(best_f, fp, 1e-3);
}

TEST(Ricker, ValueAtPeak) {
  for (double fp : {3.0, 5.0, 10.0}) {
    const double expected = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-1.0) / fp;
    EXPECT_NEAR(ricker_spectrum(fp, fp), expected, 1e-15 * expected);
  }
}

TEST(Ricker, BandSpansAndCaps) {
  const auto band = ricker_band(10.0, 8, 1e9, 10.0);
  ASSERT_EQ(band.size(), 8u);
  EXPECT_DOUBLE_EQ(band.front(), 4.0);
  EXPECT_DOUBLE_EQ(band.back(), 16.0);
  for (std::size_t i = 1; i < band.size(); ++i) EXPECT_NEAR(band[i] - band[i - 1], 12.0 / 7.0, 1e-12);

  const auto capped = ricker_band(10.0, 8, 4000.0, 71.0);
  EXPECT_NEAR(capped.back(), dispersion_limit(4000.0, 71.0), 1e-12);
  EXPECT_NEAR(capped.back(), 4000.0 / (6.0 * 71.0), 1e-12);
  EXPECT_DOUBLE_EQ(capped.front(), 4.0);
}

TEST(Acquisition, LinePositionsSpanTheSide) {
  const auto top = line_positions(14, Side::top, 68, 85, 2);
  ASSERT_EQ(top.size(), 14u);
  EXPECT_EQ(top.front(), (GridPoint{2, 2}));
  EXPECT_EQ(top.back(), (GridPoint{65, 2}));
  const auto bottom = line_positions(85, Side::bottom, 68, 85, 2);
  ASSERT_EQ(bottom.size(), 85u);
  for (const auto& p : bottom) EXPECT_EQ(p.iz, 82);
  for (std::size_t i = 1; i < bottom.size(); ++i) EXPECT_GE(bottom[i].ix, bottom[i - 1].ix);
  const auto left = line_positions(3, Side::left, 10, 21, 0);
  EXPECT_EQ(left[1], (GridPoint{0, 10}));
  const auto one = line_positions(1, Side::right, 10, 21, 1);
  EXPECT_EQ(one[0], (GridPoint{8, 10}));
}

TEST(Acquisition, Validation) {
  Acquisition acq;
  acq.sources = {{0, 0}};
  acq.receivers = {{9, 9}};
  acq.frequencies = {5.0};
  EXPECT_NO_THROW(acq.validate(10, 10));
  acq.receivers = {{10, 9}};
  EXPECT_THROW(acq.validate(10, 10), ConfigError);
  acq.receivers = {{9, 9}};
  acq.frequencies = {0.0};
  EXPECT_THROW(acq.validate(10, 10), ConfigError);
  EXPECT_THROW(parse_side("up"), ConfigError);
  EXPECT_EQ(parse_side(to_string(Side::left)), Side::left);
}

TEST(Acquisition, DispersionGuardUsesBounds) {
  Model m = make_homogeneous(10, 10, 50.0, 3000.0);
  Acquisition acq;
  acq.sources = {{5, 5}};
  acq.receivers = {{5, 6}};
  acq.frequencies = {9.9};
  EXPECT_NO_THROW(check_dispersion(acq, m));
  EXPECT_NEAR(min_points_per_wavelength(acq, m), 3000.0 / (9.9 * 50.0), 1e-12);
  m.set_velocity_bounds(2000.0, 3000.0);  // slowest admissible medium drives the check
  EXPECT_THROW(check_dispersion(acq, m), ConfigError);
}
