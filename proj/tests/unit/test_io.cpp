#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mwi/errors.hpp"
#include "mwi/io.hpp"

using namespace mwi;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("mwi_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

std::string first_line(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Model random_model(int nx, int nz, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> v(1500.0, 4500.0);
  RealGrid g(nx, nz);
  for (double& x : g) x = v(rng);
  return Model::from_velocity(12.5, g);
}

ShotData noisy_data(unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  ShotData d(3, {2.5, 4.0}, 5);
  for (auto& v : d.values()) v = {n(rng), n(rng)};
  return d;
}

}  // namespace

using Io = TempDir;

TEST_F(Io, ModelHeaderAndSize) {
  const Model m = random_model(7, 4, 1);
  save_model(dir / "a.model", m);
  EXPECT_EQ(first_line(dir / "a.model"), "MWI-MODEL 7 4 12.5");
  EXPECT_EQ(fs::file_size(dir / "a.model"), std::string("MWI-MODEL 7 4 12.5\n").size() + 7 * 4 * 4);
}

TEST_F(Io, ModelRoundTripIsStableAfterFirstReload) {
  const Model m = random_model(9, 6, 2);
  save_model(dir / "a.model", m);
  const Model once = load_model(dir / "a.model");
  EXPECT_EQ(once.nx(), 9);
  EXPECT_EQ(once.nz(), 6);
  EXPECT_EQ(once.h(), 12.5);
  const RealGrid v0 = m.velocity(), v1 = once.velocity();
  for (std::size_t i = 0; i < v0.size(); ++i) EXPECT_NEAR(v1[i], v0[i], 1e-6 * v0[i]);

  save_model(dir / "b.model", once);
  EXPECT_EQ(slurp(dir / "a.model"), slurp(dir / "b.model"));
  EXPECT_EQ(load_model(dir / "b.model"), once);
}

TEST_F(Io, DataRoundTripExact) {
  const ShotData d = noisy_data(3);
  save_data(dir / "d.data", d);
  EXPECT_EQ(first_line(dir / "d.data"), "MWI-DATA 3 2 5 complex128 2.5 4");
  EXPECT_EQ(load_data(dir / "d.data"), d);
}

TEST_F(Io, DataSinglePrecision) {
  const ShotData d = noisy_data(4);
  save_data(dir / "d.data", d, DataPrecision::complex64);
  const ShotData back = load_data(dir / "d.data");
  ASSERT_TRUE(back.same_layout(d));
  for (std::size_t i = 0; i < d.values().size(); ++i) EXPECT_LE(std::abs(back.values()[i] - d.values()[i]), 1e-6);
}

TEST_F(Io, BadFilesAreConfigErrors) {
  EXPECT_THROW(load_model(dir / "missing.model"), ConfigError);
  std::ofstream(dir / "wrong.model") << "MWI-DATA 1 1 1 complex128 3\n";
  EXPECT_THROW(load_model(dir / "wrong.model"), ConfigError);
  std::ofstream(dir / "short.model", std::ios::binary) << "MWI-MODEL 4 4 10\nabc";
  EXPECT_THROW(load_model(dir / "short.model"), ConfigError);
  std::ofstream(dir / "type.data") << "MWI-DATA 1 1 1 complex32 3\n";
  EXPECT_THROW(load_data(dir / "type.data"), ConfigError);
}

TEST_F(Io, CheckpointResumesExactly) {
  InversionState s;
  s.k = 17;
  s.model = random_model(5, 5, 5);
  s.model.set_velocity_bounds(1400.0, 4600.0);
  s.multipliers = noisy_data(6);
  s.alpha = 3.25e-9;
  save_checkpoint(dir / "ck", s, 2.5);
  double mu = 0.0;
  const InversionState back = load_checkpoint(dir / "ck", &mu);
  EXPECT_EQ(mu, 2.5);
  EXPECT_EQ(back.k, 17);
  EXPECT_EQ(back.alpha, s.alpha);
  EXPECT_EQ(back.model, s.model);
  EXPECT_EQ(back.multipliers, s.multipliers);
}

TEST_F(Io, ConvergenceCsv) {
  write_convergence_csv(dir / "empty.csv", {});
  EXPECT_EQ(slurp(dir / "empty.csv"), "iter,E_true,E_multiplier,grad_norm,model_rmse\n");

  std::vector<IterationRecord> log(2);
  log[0] = {0, 1.5, 1.5, 2.0, 100.0};
  log[1] = {1, 0.5, 0.25, 1.0, std::nullopt};
  write_convergence_csv(dir / "c.csv", log);
  std::istringstream in(slurp(dir / "c.csv"));
  std::string header, l0, l1, extra;
  std::getline(in, header);
  std::getline(in, l0);
  std::getline(in, l1);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(l0.substr(0, 2), "0,");
  EXPECT_EQ(std::count(l0.begin(), l0.end(), ','), 4);
  EXPECT_EQ(l1.back(), ',');
}

TEST_F(Io, PgmScaling) {
  RealGrid g(3, 2);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 10.0 + 2.0 * i;
  write_pgm(dir / "a.pgm", g);
  const std::string body = slurp(dir / "a.pgm");
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(body.size(), header.size() + 6);
  EXPECT_EQ(body.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(body[header.size()]), 0);
  EXPECT_EQ(static_cast<unsigned char>(body.back()), 255);
  EXPECT_EQ(slurp(dir / "a.pgm.range").substr(0, 3), "10 ");

  write_pgm(dir / "flat.pgm", RealGrid(4, 4, 7.0));
  const std::string flat = slurp(dir / "flat.pgm");
  for (std::size_t i = flat.size() - 16; i < flat.size(); ++i) EXPECT_EQ(flat[i], '\0');
}

TEST_F(Io, AtomicWriteCleansUp) {
  const fs::path p = dir / "sub" / "x.txt";
  EXPECT_THROW(write_atomically(p, [](std::ostream& os) {
                 os << "partial";
                 throw std::runtime_error("boom");
               }),
               std::runtime_error);
  EXPECT_FALSE(fs::exists(p));
  for (const auto& e : fs::directory_iterator(dir / "sub")) ADD_FAILURE() << "leftover " << e.path();

  write_atomically(p, [](std::ostream& os) { os << "done"; });
  EXPECT_EQ(slurp(p), "done");
}

TEST_F(Io, EmitOutputs) {
  InversionState s;
  s.model = random_model(6, 4, 7);
  s.log.resize(3);
  const ShotData pred = noisy_data(8);
  OutputSpec spec{dir / "out", "t", 0, {0, 2}};
  emit_outputs(s, spec, &pred);
  for (const char* f : {"t_final.model", "t_final.pgm", "t_convergence.csv", "t_shot0.data", "t_shot2.data"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const ShotData shot = load_data(dir / "out" / "t_shot2.data");
  EXPECT_EQ(shot.ns(), 1u);
  EXPECT_EQ(shot.nr(), 5u);
  EXPECT_LE(std::abs(shot(0, 1, 3) - pred(2, 1, 3)), 1e-6);

  spec.shot_dump_sources = {5};
  EXPECT_THROW(emit_outputs(s, spec, &pred), ConfigError);
}

TEST_F(Io, SnapshotNames) {
  InversionState s;
  s.k = 5;
  s.model = random_model(4, 4, 9);
  write_snapshot({dir, "snap", 5, {}}, s);
  EXPECT_TRUE(fs::exists(dir / "snap_iter0005.model"));
  EXPECT_TRUE(fs::exists(dir / "snap_iter0005.pgm"));
}
