#include "mwi/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "mwi/errors.hpp"

namespace mwi {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, const fs::path& path) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ConfigError(path.string() + ": bad number '" + tok + "' in header");
  }
  return v;
}

long parse_count(const std::string& tok, const fs::path& path) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || v <= 0) {
    throw ConfigError(path.string() + ": bad count '" + tok + "' in header");
  }
  return v;
}

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return to_little(v);
}

struct Reader {
  fs::path path;
  std::ifstream in;
  std::vector<std::string> header;

  Reader(const fs::path& p, const std::string& magic) : path(p), in(p, std::ios::binary) {
    if (!in) throw ConfigError("cannot open " + p.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(p.string() + ": empty file");
    std::istringstream ts(line);
    for (std::string t; ts >> t;) header.push_back(t);
    if (header.empty() || header[0] != magic) {
      throw ConfigError(p.string() + ": expected a " + magic + " header");
    }
  }

  void expect_payload(std::uintmax_t bytes) {
    const auto pos = static_cast<std::uintmax_t>(in.tellg());
    if (fs::file_size(path) - pos != bytes) {
      throw ConfigError(path.string() + ": payload size does not match the header");
    }
  }

  void check() {
    if (!in) throw ConfigError(path.string() + ": truncated payload");
  }
};

}  // namespace

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  try {
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw ConfigError("cannot write " + path.string());
      body(os);
      os.flush();
      if (!os) throw ConfigError("write failed for " + path.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void save_model(const fs::path& path, const Model& model) {
  const RealGrid v = model.velocity();
  write_atomically(path, [&](std::ostream& os) {
    os << "MWI-MODEL " << model.nx() << ' ' << model.nz() << ' ' << shortest(model.h()) << '\n';
    for (double x : v) put(os, static_cast<float>(x));
  });
}

Model load_model(const fs::path& path) {
  Reader r(path, "MWI-MODEL");
  if (r.header.size() != 4) throw ConfigError(path.string() + ": MWI-MODEL header needs nx nz h");
  const int nx = static_cast<int>(parse_count(r.header[1], path));
  const int nz = static_cast<int>(parse_count(r.header[2], path));
  const double h = parse_double(r.header[3], path);
  r.expect_payload(static_cast<std::uintmax_t>(nx) * nz * sizeof(float));
  RealGrid v(nx, nz);
  for (double& x : v) x = get<float>(r.in);
  r.check();
  return Model::from_velocity(h, v);
}

void save_data(const fs::path& path, const ShotData& data, DataPrecision precision) {
  write_atomically(path, [&](std::ostream& os) {
    os << "MWI-DATA " << data.ns() << ' ' << data.nf() << ' ' << data.nr() << ' '
       << (precision == DataPrecision::complex128 ? "complex128" : "complex64");
    for (double f : data.frequencies()) os << ' ' << shortest(f);
    os << '\n';
    for (const cplx& v : data.values()) {
      if (precision == DataPrecision::complex128) {
        put(os, v.real());
        put(os, v.imag());
      } else {
        put(os, static_cast<float>(v.real()));
        put(os, static_cast<float>(v.imag()));
      }
    }
  });
}

ShotData load_data(const fs::path& path) {
  Reader r(path, "MWI-DATA");
  if (r.header.size() < 5) throw ConfigError(path.string() + ": MWI-DATA header needs ns nf nr type freqs");
  const auto ns = static_cast<std::size_t>(parse_count(r.header[1], path));
  const auto nf = static_cast<std::size_t>(parse_count(r.header[2], path));
  const auto nr = static_cast<std::size_t>(parse_count(r.header[3], path));
  const std::string& type = r.header[4];
  if (type != "complex128" && type != "complex64") {
    throw ConfigError(path.string() + ": unknown sample type '" + type + "'");
  }
  if (r.header.size() != 5 + nf) throw ConfigError(path.string() + ": frequency list does not match nf");
  std::vector<double> freqs;
  for (std::size_t i = 0; i < nf; ++i) freqs.push_back(parse_double(r.header[5 + i], path));

  const bool wide = type == "complex128";
  ShotData d(ns, freqs, nr);
  r.expect_payload(d.values().size() * 2 * (wide ? sizeof(double) : sizeof(float)));
  for (cplx& v : d.values()) {
    if (wide) {
      const double re = get<double>(r.in);
      v = cplx(re, get<double>(r.in));
    } else {
      const float re = get<float>(r.in);
      v = cplx(re, get<float>(r.in));
    }
  }
  r.check();
  return d;
}

void save_checkpoint(const fs::path& stem, const InversionState& state, double mu) {
  fs::path data_path = stem, ckpt_path = stem;
  data_path += ".data";
  ckpt_path += ".ckpt";
  save_data(data_path, state.multipliers);
  const Model& m = state.model;
  write_atomically(ckpt_path, [&](std::ostream& os) {
    os << "MWI-CHECKPOINT " << state.k << ' ' << shortest(state.alpha) << ' ' << shortest(mu) << ' ' << m.nx()
       << ' ' << m.nz() << ' ' << shortest(m.h()) << '\n';
    for (const RealGrid* g : {&m.m(), &m.m_min(), &m.m_max()})
      for (double x : *g) put(os, x);
  });
}

InversionState load_checkpoint(const fs::path& stem, double* mu) {
  fs::path data_path = stem, ckpt_path = stem;
  data_path += ".data";
  ckpt_path += ".ckpt";
  Reader r(ckpt_path, "MWI-CHECKPOINT");
  if (r.header.size() != 7) throw ConfigError(ckpt_path.string() + ": header needs k alpha mu nx nz h");
  InversionState s;
  s.k = static_cast<int>(parse_double(r.header[1], ckpt_path));
  s.alpha = parse_double(r.header[2], ckpt_path);
  if (mu) *mu = parse_double(r.header[3], ckpt_path);
  const int nx = static_cast<int>(parse_count(r.header[4], ckpt_path));
  const int nz = static_cast<int>(parse_count(r.header[5], ckpt_path));
  const double h = parse_double(r.header[6], ckpt_path);
  r.expect_payload(3ull * nx * nz * sizeof(double));
  RealGrid g[3] = {RealGrid(nx, nz), RealGrid(nx, nz), RealGrid(nx, nz)};
  for (auto& grid : g)
    for (double& x : grid) x = get<double>(r.in);
  r.check();
  s.model = Model(h, std::move(g[0]), std::move(g[1]), std::move(g[2]));
  s.multipliers = load_data(data_path);
  return s;
}

void write_convergence_csv(const fs::path& path, const std::vector<IterationRecord>& log) {
  write_atomically(path, [&](std::ostream& os) {
    os << "iter,E_true,E_multiplier,grad_norm,model_rmse\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : log) {
      os << r.iteration << ',' << r.misfit_true << ',' << r.misfit_multiplier << ',' << r.gradient_norm << ',';
      if (r.model_rmse) os << *r.model_rmse;
      os << '\n';
    }
  });
}

void write_pgm(const fs::path& path, const RealGrid& image) {
  if (image.size() == 0) throw ConfigError("cannot render an empty image");
  const auto [lo_it, hi_it] = std::minmax_element(image.begin(), image.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo;
  write_atomically(path, [&](std::ostream& os) {
    os << "P5\n" << image.nx() << ' ' << image.nz() << "\n255\n";
    for (double v : image) {
      const double t = span > 0.0 ? (v - lo) / span : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
    }
  });
  fs::path range = path;
  range += ".range";
  write_atomically(range, [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << lo << ' ' << hi << '\n';
  });
}

namespace {

fs::path output_file(const OutputSpec& spec, const std::string& suffix) {
  return spec.dir / (spec.name + suffix);
}

std::string iteration_tag(int k) {
  std::ostringstream os;
  os << "_iter" << std::setw(4) << std::setfill('0') << k;
  return os.str();
}

}  // namespace

void write_snapshot(const OutputSpec& spec, const InversionState& state) {
  const std::string tag = iteration_tag(state.k);
  save_model(output_file(spec, tag + ".model"), state.model);
  write_pgm(output_file(spec, tag + ".pgm"), state.model.velocity());
}

void emit_outputs(const InversionState& state, const OutputSpec& spec, const ShotData* predicted) {
  save_model(output_file(spec, "_final.model"), state.model);
  write_pgm(output_file(spec, "_final.pgm"), state.model.velocity());
  write_convergence_csv(output_file(spec, "_convergence.csv"), state.log);
  if (!predicted) return;
  for (int s : spec.shot_dump_sources) {
    if (s < 0 || static_cast<std::size_t>(s) >= predicted->ns()) {
      throw ConfigError("shot dump source " + std::to_string(s) + " out of range");
    }
    save_data(output_file(spec, "_shot" + std::to_string(s) + ".data"),
              predicted->select_source(static_cast<std::size_t>(s)), DataPrecision::complex64);
  }
}

}  // namespace mwi
