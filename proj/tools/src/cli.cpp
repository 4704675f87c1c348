#include <charconv>
#include "mwi_tools/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "mwi/diagnostics.hpp"
#include "mwi/errors.hpp"
#include "mwi/io.hpp"
#include "mwi/manifest.hpp"

namespace mwi::cli {
namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kNumerical = 2;

int parse_count(std::string_view s, const std::string& whole) {
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError("bad grid '" + whole + "', expected NXxNZ");
  }
  return v;
}

std::pair<int, int> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  const std::string_view v(s);
  if (x == std::string::npos) {
    const int n = parse_count(v, s);
    return {n, n};
  }
  return {parse_count(v.substr(0, x), s), parse_count(v.substr(x + 1), s)};
}

struct ModelMakeArgs {
  std::string kind;
  std::optional<double> h;
  int nx = 0, nz = 0;
  double velocity = 2000.0;
  std::string out, pgm;
};

int model_make(const ModelMakeArgs& a, std::ostream& out) {
  Model m;
  if (a.kind == "camembert") {
    m = make_camembert(a.h.value_or(71.0));
  } else if (a.kind == "two-layer") {
    m = make_two_layer(a.h.value_or(60.0));
  } else {
    if (a.nx <= 0 || a.nz <= 0) throw ConfigError("homogeneous model needs --nx and --nz");
    m = make_homogeneous(a.nx, a.nz, a.h.value_or(50.0), a.velocity);
  }
  save_model(a.out, m);
  if (!a.pgm.empty()) write_pgm(a.pgm, m.velocity());
  out << "wrote " << a.out << " (" << m.nx() << " x " << m.nz() << ", h = " << m.h() << ")\n";
  return kOk;
}

struct ForwardArgs {
  std::string manifest, model, out;
};

int forward(const ForwardArgs& a, std::ostream& out) {
  RunManifest man = parse_manifest(a.manifest);
  if (!a.model.empty()) man.true_model = ModelSource{{}, a.model};
  if (!man.true_model) throw ConfigError("forward needs model.true in the manifest or --model");
  man.observed.reset();
  const Problem p = build_problem(man);
  save_data(a.out, p.observed);
  out << "wrote " << a.out << " (" << p.observed.ns() << " sources, " << p.observed.nf() << " frequencies, "
      << p.observed.nr() << " receivers)\n";
  return kOk;
}

struct InvertArgs {
  std::string manifest, method, output_dir;
  std::optional<int> iterations;
  bool quiet = false;
};

int invert(const InvertArgs& a, std::ostream& out) {
  RunManifest man = parse_manifest(a.manifest);
  if (!a.method.empty()) man.run.method = parse_method(a.method);
  if (a.iterations) {
    if (*a.iterations < 0) throw ConfigError("--iterations must be non-negative");
    man.run.iterations = *a.iterations;
  }
  if (!a.output_dir.empty()) man.output.dir = a.output_dir;
  const Problem p = build_problem(man);
  const OutputSpec& spec = man.output;

  out << std::setprecision(6);
  auto observer = [&](const InversionState& s) {
    if (spec.snapshot_every > 0 && s.k % spec.snapshot_every == 0) write_snapshot(spec, s);
    if (a.quiet || s.log.empty()) return;
    const IterationRecord& r = s.log.back();
    out << "iter " << r.iteration << "  E_true " << r.misfit_true << "  E_mult " << r.misfit_multiplier;
    if (r.model_rmse) out << "  rmse " << *r.model_rmse;
    out << std::endl;  // long runs are usually watched through a pipe
  };

  InversionState state;
  Acquisition final_acq = p.acquisition;
  if (p.schedule.empty()) {
    state = run_inversion(p.run, p.acquisition, p.observed, p.initial, observer);
    if (!p.run.frequencies.empty()) final_acq = p.acquisition.with_frequencies(p.run.frequencies);
  } else {
    state = frequency_continuation(p.schedule, p.run, p.acquisition, p.observed, p.initial, observer);
    final_acq = p.acquisition.with_frequencies(p.schedule.back());
  }

  std::optional<ShotData> predicted;
  if (!spec.shot_dump_sources.empty()) predicted = forward_map(state.model, final_acq, p.run.modeling);
  emit_outputs(state, spec, predicted ? &*predicted : nullptr);

  out << to_string(p.run.method) << ": " << state.k << " iterations";
  if (p.truth) out << ", final model RMSE " << velocity_rmse(state.model, *p.truth) << " m/s";
  out << "\noutputs in " << spec.dir.string() << '\n';
  return kOk;
}

struct GradcheckArgs {
  std::string grid = "20x20";
  int cells = 20;
  std::uint64_t seed = 7;
  double tolerance = 1e-4;
};

int gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradcheckOptions o;
  std::tie(o.nx, o.nz) = parse_grid(a.grid);
  if (o.nx < 8 || o.nz < 8) throw ConfigError("gradcheck grid must be at least 8x8");
  o.cells = a.cells;
  o.seed = a.seed;
  const GradcheckResult r = gradient_check(o);
  out << std::scientific << std::setprecision(3);
  out << "cells checked: " << r.cells.size() << "\nmax relative FD error: " << r.max_relative_error << '\n';
  return r.max_relative_error <= a.tolerance ? kOk : kNumerical;
}

struct EquivalenceArgs {
  int n = 16;
  int iterations = 5;
  double mu = 10.0;
  double tolerance = 1e-10;
};

int equivalence(const EquivalenceArgs& a, std::ostream& out) {
  if (a.n < 8) throw ConfigError("equivalence-check grid must be at least 8");
  if (a.iterations < 1) throw ConfigError("--iterations must be at least 1");
  if (!(a.mu > 0.0)) throw ConfigError("--mu must be positive");
  EquivalenceOptions o;
  o.n = a.n;
  o.iterations = a.iterations;
  o.mu = a.mu;
  const EquivalenceResult r = equivalence_check(o);
  out << std::scientific << std::setprecision(3);
  out << "scaled vs unscaled model difference: " << r.max_model_difference
      << "\nmultiplier identity residual:        " << r.max_multiplier_difference
      << "\nFWI/MWI first iterate identical:     " << (r.first_iterate_identical ? "yes" : "no") << '\n';
  const bool ok = r.max_model_difference <= a.tolerance && r.max_multiplier_difference <= a.tolerance &&
                  r.first_iterate_identical;
  return ok ? kOk : kNumerical;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-domain acoustic waveform inversion (FWI and multiplier-based MWI)", "mwi"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); overrides MWI_THREADS");

  ModelMakeArgs mm;
  auto* model = app.add_subcommand("model", "Model utilities");
  model->require_subcommand(1);
  auto* make = model->add_subcommand("make", "Write a synthetic model file");
  make->set_help_flag("--help", "Print this help message and exit");
  make->add_option("kind", mm.kind, "camembert, two-layer or homogeneous")
      ->required()
      ->check(CLI::IsMember({"camembert", "two-layer", "homogeneous"}));
  make->add_option("--h", mm.h, "Grid spacing in meters");
  make->add_option("--nx", mm.nx, "Columns (homogeneous)");
  make->add_option("--nz", mm.nz, "Rows (homogeneous)");
  make->add_option("--velocity", mm.velocity, "Velocity in m/s (homogeneous)");
  make->add_option("--out", mm.out, "Output model file")->required();
  make->add_option("--pgm", mm.pgm, "Also write a velocity graymap");

  ForwardArgs fw;
  auto* fwd = app.add_subcommand("forward", "Synthesize shot data from a model");
  fwd->add_option("--manifest", fw.manifest, "Run manifest")->required();
  fwd->add_option("--model", fw.model, "Model file (default: model.true from the manifest)");
  fwd->add_option("--out", fw.out, "Output data file")->required();

  InvertArgs iv;
  auto* inv = app.add_subcommand("invert", "Run an inversion described by a manifest");
  inv->add_option("--manifest", iv.manifest, "Run manifest")->required();
  inv->add_option("--method", iv.method, "Override inversion.method (fwi or mwi)");
  inv->add_option("--iterations", iv.iterations, "Override inversion.iterations");
  inv->add_option("--output-dir", iv.output_dir, "Override experiment.output_dir");
  inv->add_flag("--quiet", iv.quiet, "No per-iteration progress");

  GradcheckArgs gc;
  auto* grad = app.add_subcommand("gradcheck", "Compare the adjoint gradient with central differences");
  grad->add_option("--grid", gc.grid, "Grid size NXxNZ")->capture_default_str();
  grad->add_option("--cells", gc.cells, "Number of random cells")->capture_default_str();
  grad->add_option("--seed", gc.seed, "Random seed")->capture_default_str();
  grad->add_option("--tolerance", gc.tolerance, "Pass threshold on the max relative error")->capture_default_str();

  EquivalenceArgs eq;
  auto* equiv = app.add_subcommand("equivalence-check",
                                   "Compare scaled and unscaled multiplier iterations and the FWI/MWI first step");
  equiv->add_option("--grid", eq.n, "Square grid size")->capture_default_str();
  equiv->add_option("--iterations", eq.iterations)->capture_default_str();
  equiv->add_option("--mu", eq.mu)->capture_default_str();
  equiv->add_option("--tolerance", eq.tolerance)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const auto* sub : {make, static_cast<CLI::App*>(model), fwd, inv, grad, equiv}) {
      if (sub->parsed()) {
        failed = sub;
        break;
      }
    }
    err << failed->help();
    return kConfig;
  }

  try {
    if (threads >= 0) {
      const std::string v = std::to_string(threads);
      setenv("MWI_THREADS", v.c_str(), 1);
    }
    if (*make) return model_make(mm, out);
    if (*fwd) return forward(fw, out);
    if (*inv) return invert(iv, out);
    if (*grad) return gradcheck(gc, out);
    if (*equiv) return equivalence(eq, out);
    err << app.help();
    return kConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumerical;
  }
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace mwi::cli
