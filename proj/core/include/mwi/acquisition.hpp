#pragma once

#include <string>
#include <vector>

namespace mwi {

class Model;

/// Interior (non-PML) grid node.
struct GridPoint {
  int ix = 0;
  int iz = 0;
  bool operator==(const GridPoint&) const = default;
};

enum class Side { top, bottom, left, right };

Side parse_side(const std::string& s);
std::string to_string(Side s);

/// Source/receiver layout and the frequency set being inverted.
struct Acquisition {
  std::vector<GridPoint> sources;
  std::vector<GridPoint> receivers;
  double peak_frequency = 10.0;     // Ricker f_p, Hz
  std::vector<double> frequencies;  // Hz, active set

  std::size_t num_sources() const { return sources.size(); }
  std::size_t num_receivers() const { return receivers.size(); }
  std::size_t num_frequencies() const { return frequencies.size(); }

  /// Throws ConfigError unless every position lies inside an nx x nz grid and
  /// every frequency is positive.
  void validate(int nx, int nz) const;

  /// Same layout, different frequency subset.
  Acquisition with_frequencies(std::vector<double> freqs) const;
};

/// `count` equally spaced nodes along one side, `standoff` cells inside the
/// edge, spanning the side from standoff to n-1-standoff. Duplicates are kept
/// when count exceeds the number of available nodes.
std::vector<GridPoint> line_positions(int count, Side side, int nx, int nz, int standoff);

/// Amplitude spectrum of a zero-phase Ricker wavelet:
/// W(f) = 2/sqrt(pi) * f^2 / fp^3 * exp(-(f/fp)^2).
double ricker_spectrum(double peak_frequency, double f);

/// Highest frequency resolved with `ppw` points per wavelength.
double dispersion_limit(double slowest_velocity, double h, double ppw = 6.0);

/// `count` frequencies evenly spanning [0.4 fp, 1.6 fp], upper end capped by
/// the dispersion limit of the slowest admissible velocity.
std::vector<double> ricker_band(double peak_frequency, int count, double slowest_velocity, double h);

/// Minimum points per wavelength of the highest active frequency for the
/// slowest medium admitted by the model's bounds.
double min_points_per_wavelength(const Acquisition& acq, const Model& model);

/// Throws ConfigError when min_points_per_wavelength falls below `ppw`.
void check_dispersion(const Acquisition& acq, const Model& model, double ppw = 6.0);

}  // namespace mwi
