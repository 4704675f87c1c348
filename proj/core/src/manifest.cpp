#include "mwi/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mwi/errors.hpp"

namespace mwi {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

// Value errors carry no position; the caller adds file and line.
struct BadValue {
  std::string what;
};

double as_double(const std::string& v) {
  double x = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw BadValue{"expected a number, got '" + v + "'"};
  return x;
}

int as_int(const std::string& v) {
  int x = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw BadValue{"expected an integer, got '" + v + "'"};
  return x;
}

bool as_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw BadValue{"expected true or false, got '" + v + "'"};
}

std::vector<double> as_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& t : split(v, ',')) out.push_back(as_double(t));
  if (out.empty()) throw BadValue{"expected a comma-separated list"};
  return out;
}

double positive(double x) {
  if (!(x > 0.0)) throw BadValue{"must be positive"};
  return x;
}

int non_negative(int x) {
  if (x < 0) throw BadValue{"must be non-negative"};
  return x;
}

template <class F>
auto wrap_config(F f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw BadValue{e.what()};
  }
}

const std::set<std::string> kGenerators{"camembert", "two-layer", "homogeneous"};

struct Context {
  fs::path base;
  RunManifest& m;

  fs::path existing(const std::string& v) const {
    fs::path p = fs::path(v).is_absolute() ? fs::path(v) : base / v;
    if (!fs::exists(p)) throw BadValue{"file not found: " + p.string()};
    return p;
  }
  ModelSource model_source(const std::string& v) const {
    if (kGenerators.count(v)) return {v, {}};
    return {{}, existing(v)};
  }
};

using Setter = std::function<void(Context&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.name", [](Context& c, const std::string& v) {
         if (v.empty()) throw BadValue{"name is empty"};
         c.m.output.name = v;
       }},
      {"experiment.output_dir", [](Context& c, const std::string& v) {
         fs::path p(v);
         c.m.output.dir = p.is_absolute() ? p : c.base / p;
       }},
      {"experiment.snapshot_every", [](Context& c, const std::string& v) { c.m.output.snapshot_every = non_negative(as_int(v)); }},
      {"experiment.shot_dump_sources", [](Context& c, const std::string& v) {
         c.m.output.shot_dump_sources.clear();
         for (const auto& t : split(v, ',')) c.m.output.shot_dump_sources.push_back(non_negative(as_int(t)));
       }},

      {"model.true", [](Context& c, const std::string& v) { c.m.true_model = c.model_source(v); }},
      {"model.initial", [](Context& c, const std::string& v) { c.m.initial_model = c.model_source(v); }},
      {"model.h", [](Context& c, const std::string& v) { c.m.h = positive(as_double(v)); }},
      {"model.nx", [](Context& c, const std::string& v) { c.m.nx = non_negative(as_int(v)); }},
      {"model.nz", [](Context& c, const std::string& v) { c.m.nz = non_negative(as_int(v)); }},
      {"model.width", [](Context& c, const std::string& v) { c.m.width = positive(as_double(v)); }},
      {"model.depth", [](Context& c, const std::string& v) { c.m.depth = positive(as_double(v)); }},
      {"model.initial_velocity", [](Context& c, const std::string& v) { c.m.initial_velocity = positive(as_double(v)); }},
      {"model.background_velocity", [](Context& c, const std::string& v) { c.m.background_velocity = positive(as_double(v)); }},
      {"model.anomaly_velocity", [](Context& c, const std::string& v) { c.m.anomaly_velocity = positive(as_double(v)); }},
      {"model.camembert_diameter", [](Context& c, const std::string& v) { c.m.camembert_diameter = positive(as_double(v)); }},
      {"model.interface_depth", [](Context& c, const std::string& v) { c.m.interface_depth = positive(as_double(v)); }},
      {"model.top_velocity", [](Context& c, const std::string& v) { c.m.top_velocity = positive(as_double(v)); }},
      {"model.bottom_velocity", [](Context& c, const std::string& v) { c.m.bottom_velocity = positive(as_double(v)); }},
      {"model.vmin", [](Context& c, const std::string& v) { c.m.vmin = positive(as_double(v)); }},
      {"model.vmax", [](Context& c, const std::string& v) { c.m.vmax = positive(as_double(v)); }},

      {"acquisition.sources", [](Context& c, const std::string& v) { c.m.sources = non_negative(as_int(v)); }},
      {"acquisition.source_side", [](Context& c, const std::string& v) { c.m.source_side = wrap_config([&] { return parse_side(v); }); }},
      {"acquisition.receivers", [](Context& c, const std::string& v) { c.m.receivers = non_negative(as_int(v)); }},
      {"acquisition.receiver_side", [](Context& c, const std::string& v) { c.m.receiver_side = wrap_config([&] { return parse_side(v); }); }},
      {"acquisition.standoff", [](Context& c, const std::string& v) { c.m.standoff = non_negative(as_int(v)); }},
      {"acquisition.peak_frequency", [](Context& c, const std::string& v) { c.m.peak_frequency = positive(as_double(v)); }},
      {"acquisition.frequencies", [](Context& c, const std::string& v) {
         c.m.frequencies = as_doubles(v);
         for (double f : c.m.frequencies) positive(f);
       }},
      {"acquisition.num_frequencies", [](Context& c, const std::string& v) {
         c.m.num_frequencies = as_int(v);
         if (c.m.num_frequencies < 1) throw BadValue{"must be at least 1"};
       }},
      {"acquisition.pml_cells", [](Context& c, const std::string& v) { c.m.pml.cells = non_negative(as_int(v)); }},
      {"acquisition.pml_reflection", [](Context& c, const std::string& v) { c.m.pml.reflection = positive(as_double(v)); }},
      {"acquisition.source_scale", [](Context& c, const std::string& v) { c.m.source_scale = positive(as_double(v)); }},

      {"data.observed", [](Context& c, const std::string& v) { c.m.observed = c.existing(v); }},

      {"inversion.method", [](Context& c, const std::string& v) { c.m.run.method = wrap_config([&] { return parse_method(v); }); }},
      {"inversion.mu", [](Context& c, const std::string& v) { c.m.run.mu = positive(as_double(v)); }},
      {"inversion.iterations", [](Context& c, const std::string& v) { c.m.run.iterations = non_negative(as_int(v)); }},
      {"inversion.step_fraction", [](Context& c, const std::string& v) { c.m.run.step_fraction = positive(as_double(v)); }},
      {"inversion.step_length", [](Context& c, const std::string& v) { c.m.run.step_length = positive(as_double(v)); }},
      {"inversion.bounds", [](Context& c, const std::string& v) { c.m.run.bounds = as_bool(v); }},
      {"inversion.gn_data_hessian", [](Context& c, const std::string& v) { c.m.run.gn_data_hessian = as_bool(v); }},
      {"inversion.gn_epsilon", [](Context& c, const std::string& v) { c.m.run.gn_epsilon = positive(as_double(v)); }},
      {"inversion.hessian_damping", [](Context& c, const std::string& v) {
         const double b = as_double(v);
         if (!(b >= 0.0)) throw BadValue{"must be non-negative"};
         c.m.run.hessian_damping = b;
       }},
      {"inversion.schedule", [](Context& c, const std::string& v) {
         c.m.schedule.clear();
         for (const auto& stage : split(v, ';')) {
           if (stage.empty()) throw BadValue{"empty schedule stage"};
           auto freqs = as_doubles(stage);
           for (double f : freqs) positive(f);
           c.m.schedule.push_back(std::move(freqs));
         }
       }},
      {"inversion.cycles", [](Context& c, const std::string& v) {
         c.m.cycles = as_int(v);
         if (c.m.cycles < 1) throw BadValue{"must be at least 1"};
       }},

      {"reg.kind", [](Context& c, const std::string& v) { c.m.run.reg.kind = wrap_config([&] { return parse_reg_kind(v); }); }},
      {"reg.weight", [](Context& c, const std::string& v) {
         const double w = as_double(v);
         if (!(w >= 0.0)) throw BadValue{"must be non-negative"};
         c.m.run.reg.weight = w;
       }},
      {"reg.tv_inner_iters", [](Context& c, const std::string& v) {
         c.m.run.reg.tv_inner_iters = as_int(v);
         if (c.m.run.reg.tv_inner_iters < 1) throw BadValue{"must be at least 1"};
       }},
  };
  return table;
}

}  // namespace

RunManifest parse_manifest_text(const std::string& text, const fs::path& location) {
  RunManifest m;
  m.location = location;
  Context ctx{location.has_parent_path() ? location.parent_path() : fs::path("."), m};
  m.output.dir = ctx.base / "out";

  std::istringstream in(text);
  std::string section, raw;
  std::set<std::string> seen;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(location.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections{"experiment", "model", "acquisition", "data", "inversion", "reg"};
      if (!sections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(full).second) fail("duplicate key '" + key + "'");
    try {
      it->second(ctx, value);
    } catch (const BadValue& e) {
      fail(full + ": " + e.what);
    }
  }
  if (!seen.count("inversion.method")) {
    throw ConfigError(location.string() + ": missing required key 'method' in [inversion]");
  }
  if (m.vmin && m.vmax && !(*m.vmin < *m.vmax)) {
    throw ConfigError(location.string() + ": model.vmin must be below model.vmax");
  }
  return m;
}

RunManifest parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest_text(ss.str(), path);
}

Model build_model(const RunManifest& m, const ModelSource& src, double velocity, const Model* reference) {
  if (src.generator.empty()) return load_model(src.file);
  if (src.generator == "camembert") {
    CamembertOptions o;
    if (m.width > 0.0) o.extent.width = m.width;
    if (m.depth > 0.0) o.extent.depth = m.depth;
    o.background_velocity = m.background_velocity;
    o.anomaly_velocity = m.anomaly_velocity;
    o.diameter_fraction = m.camembert_diameter;
    return make_camembert(m.h, o);
  }
  if (src.generator == "two-layer") {
    TwoLayerOptions o;
    if (m.width > 0.0) o.extent.width = m.width;
    if (m.depth > 0.0) o.extent.depth = m.depth;
    o.interface_depth = m.interface_depth;
    o.top_velocity = m.top_velocity;
    o.bottom_velocity = m.bottom_velocity;
    return make_two_layer(m.h, o);
  }
  int nx = m.nx, nz = m.nz;
  if (nx == 0 || nz == 0) {
    if (reference) {
      nx = reference->nx();
      nz = reference->nz();
    } else if (m.width > 0.0 && m.depth > 0.0) {
      nx = grid_count(m.width, m.h);
      nz = grid_count(m.depth, m.h);
    } else {
      throw ConfigError("homogeneous model needs model.nx and model.nz (or a true model to copy)");
    }
  }
  const double h = reference ? reference->h() : m.h;
  return make_homogeneous(nx, nz, h, velocity);
}

Problem build_problem(const RunManifest& m) {
  Problem p;
  if (m.true_model) p.truth = build_model(m, *m.true_model, m.background_velocity);
  p.initial = build_model(m, m.initial_model, m.initial_velocity, p.truth ? &*p.truth : nullptr);
  if (p.truth && !p.truth->m().same_shape(p.initial.m())) {
    throw ConfigError("true and initial models differ in shape");
  }
  if (p.truth && p.truth->h() != p.initial.h()) throw ConfigError("true and initial models differ in spacing");

  // Default bounds: 0.75x slowest to 1.5x fastest initial velocity.
  const RealGrid v0 = p.initial.velocity();
  const auto [lo, hi] = std::minmax_element(v0.begin(), v0.end());
  const double vmin = m.vmin.value_or(0.75 * *lo);
  const double vmax = m.vmax.value_or(1.5 * *hi);
  if (!(vmin < vmax)) throw ConfigError("velocity bounds are empty");
  p.initial.set_velocity_bounds(vmin, vmax);

  const int nx = p.initial.nx(), nz = p.initial.nz();
  Acquisition& acq = p.acquisition;
  acq.peak_frequency = m.peak_frequency;
  acq.sources = line_positions(m.sources, m.source_side, nx, nz, m.standoff);
  acq.receivers = line_positions(m.receivers, m.receiver_side, nx, nz, m.standoff);
  if (!m.frequencies.empty()) {
    acq.frequencies = m.frequencies;
  } else if (!m.schedule.empty()) {
    std::set<double> all;
    for (const auto& stage : m.schedule) all.insert(stage.begin(), stage.end());
    acq.frequencies.assign(all.begin(), all.end());
  } else {
    acq.frequencies = ricker_band(m.peak_frequency, m.num_frequencies, p.initial.slowest_admissible_velocity(),
                                  p.initial.h());
  }
  acq.validate(nx, nz);

  p.run = m.run;
  p.run.modeling.pml = m.pml;
  p.run.modeling.source_scale = m.source_scale;
  p.run.truth = p.truth;
  p.run.validate();

  if (!m.schedule.empty()) {
    for (const auto& stage : m.schedule)
      for (double f : stage)
        if (std::find(acq.frequencies.begin(), acq.frequencies.end(), f) == acq.frequencies.end()) {
          throw ConfigError("schedule frequency " + std::to_string(f) + " is not in the acquisition");
        }
    p.schedule = continuation_schedule(m.schedule, m.cycles);
  }

  if (m.observed) {
    ShotData d = load_data(*m.observed);
    p.observed = d.frequencies() == acq.frequencies ? std::move(d) : d.select_frequencies(acq.frequencies);
    p.observed.check_matches(acq);
  } else {
    if (!p.truth) throw ConfigError("no observed data: set data.observed or model.true");
    ModelingOptions opts = p.run.modeling;
    p.observed = forward_map(*p.truth, acq, opts);
  }
  return p;
}

}  // namespace mwi
