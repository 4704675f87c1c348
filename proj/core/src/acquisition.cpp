#include "mwi/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mwi/errors.hpp"
#include "mwi/model.hpp"

namespace mwi {

Side parse_side(const std::string& s) {
  if (s == "top") return Side::top;
  if (s == "bottom") return Side::bottom;
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw ConfigError("unknown side '" + s + "' (expected top, bottom, left or right)");
}

std::string to_string(Side s) {
  switch (s) {
    case Side::top: return "top";
    case Side::bottom: return "bottom";
    case Side::left: return "left";
    case Side::right: return "right";
  }
  return "?";
}

void Acquisition::validate(int nx, int nz) const {
  auto check = [&](const std::vector<GridPoint>& pts, const char* what) {
    for (const auto& p : pts) {
      if (p.ix < 0 || p.ix >= nx || p.iz < 0 || p.iz >= nz) {
        std::ostringstream os;
        os << what << " at (" << p.ix << ", " << p.iz << ") lies outside the " << nx << "x" << nz
           << " interior grid";
        throw ConfigError(os.str());
      }
    }
  };
  check(sources, "source");
  check(receivers, "receiver");
  if (!(peak_frequency > 0.0)) throw ConfigError("acquisition: peak frequency must be positive");
  for (double f : frequencies) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("acquisition: frequencies must be positive");
  }
}

Acquisition Acquisition::with_frequencies(std::vector<double> freqs) const {
  Acquisition out = *this;
  out.frequencies = std::move(freqs);
  return out;
}

std::vector<GridPoint> line_positions(int count, Side side, int nx, int nz, int standoff) {
  if (count < 1) throw ConfigError("line_positions: count must be at least 1");
  const bool horizontal = side == Side::top || side == Side::bottom;
  const int along = horizontal ? nx : nz;
  const int across = horizontal ? nz : nx;
  if (standoff < 0 || 2 * standoff >= along || standoff >= across) {
    throw ConfigError("line_positions: standoff does not fit the grid");
  }
  const int first = standoff;
  const int last = along - 1 - standoff;
  const int fixed = (side == Side::top || side == Side::left) ? standoff : across - 1 - standoff;

  std::vector<GridPoint> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    const int pos = static_cast<int>(std::lround(first + t * (last - first)));
    pts.push_back(horizontal ? GridPoint{pos, fixed} : GridPoint{fixed, pos});
  }
  return pts;
}

double ricker_spectrum(double peak_frequency, double f) {
  const double r = f / peak_frequency;
  return 2.0 / std::sqrt(std::numbers::pi) * f * f /
         (peak_frequency * peak_frequency * peak_frequency) * std::exp(-r * r);
}

double dispersion_limit(double slowest_velocity, double h, double ppw) {
  return slowest_velocity / (ppw * h);
}

std::vector<double> ricker_band(double peak_frequency, int count, double slowest_velocity, double h) {
  if (count < 1) throw ConfigError("ricker_band: need at least one frequency");
  const double lo = 0.4 * peak_frequency;
  const double hi = std::min(1.6 * peak_frequency, dispersion_limit(slowest_velocity, h));
  if (hi < lo) {
    throw ConfigError("ricker_band: grid too coarse for this wavelet (dispersion limit " +
                      std::to_string(hi) + " Hz below " + std::to_string(lo) + " Hz)");
  }
  std::vector<double> f(count);
  for (int i = 0; i < count; ++i) {
    f[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return f;
}

double min_points_per_wavelength(const Acquisition& acq, const Model& model) {
  if (acq.frequencies.empty()) return std::numeric_limits<double>::infinity();
  const double fmax = *std::max_element(acq.frequencies.begin(), acq.frequencies.end());
  return model.slowest_admissible_velocity() / (fmax * model.h());
}

void check_dispersion(const Acquisition& acq, const Model& model, double ppw) {
  const double got = min_points_per_wavelength(acq, model);
  if (got < ppw * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "dispersion guard: " << got << " points per wavelength at the highest frequency, need "
       << ppw;
    throw ConfigError(os.str());
  }
}

}  // namespace mwi
