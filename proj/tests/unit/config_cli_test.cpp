#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "boltzmix/config.hpp"

using namespace boltzmix;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const std::string kMono = "[mixture]\nkind = mono\nmass = 1\n[model]\nC = 1\n";

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "boltzmix_cli_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(BOLTZMIX_CLI) + " " + args + " > " + (scratch() / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, ParsesMixture) {
  const RunConfig cfg = parse(
      "# comment\n[mixture]\nkind = mono, poly\nmass = 1, 2\ndof = 2, 4\ndensity = 1, 0.7\n"
      "[model]\nC = 1, 0.8; 0.8, 1.2\neta = 0.5\n[quadrature]\nradial_order = 12\n"
      "[run]\nsuites = galerkin, nu_bounds\ngrid_xi_max = 4\ntruncations = 2, 4\n");
  EXPECT_EQ(cfg.mixture.size(), 2u);
  EXPECT_TRUE(cfg.mixture[1].is_polyatomic());
  EXPECT_DOUBLE_EQ(cfg.mixture[1].number_density, 0.7);
  EXPECT_DOUBLE_EQ(cfg.model.C(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(cfg.model.eta(), 0.5);
  EXPECT_EQ(cfg.quad.radial_order, 12);
  EXPECT_EQ(cfg.suites.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.options.grid.xi_max, 4.0);
  EXPECT_EQ(cfg.options.truncations.size(), 2u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse(kMono + "bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse(kMono + "[extra]\n"), ConfigError);
  EXPECT_THROW(parse(kMono + "C = 2\n"), ConfigError);
  EXPECT_THROW(parse("mass = 1\n"), ConfigError);
  EXPECT_THROW(parse("[mixture]\nkind = gas\nmass = 1\n[model]\nC = 1\n"), ConfigError);
  EXPECT_THROW(parse("[mixture]\nkind = mono\nmass = x\n[model]\nC = 1\n"), ConfigError);
  EXPECT_THROW(parse(kMono + "[run]\nsuites = nonsense\n"), ConfigError);
  EXPECT_THROW(parse(kMono + "eta = 1\n"), ParameterError);
  EXPECT_THROW(parse("[mixture]\nkind = mono\nmass = 1\n[model]\nC = 0\n"), ParameterError);
  EXPECT_THROW(parse("[mixture]\nkind = mono, mono\nmass = 1, 1\n[model]\nC = 1, 2; 3, 1\n"), ParameterError);
  EXPECT_THROW(parse("[mixture]\nkind = poly, mono\nmass = 1, 1\ndof = 4, 2\n[model]\nC = 1\n"), ParameterError);
  EXPECT_THROW(load_config("/nonexistent/boltzmix.cfg"), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch() / "out";
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("verify"), 2);
  EXPECT_EQ(cli("verify --config " + (scratch() / "missing.cfg").string()), 2);
  const fs::path asym = write_config("asym.cfg", "[mixture]\nkind = mono, mono\nmass = 1, 2\n[model]\nC = 1, 2; 3, 1\n");
  EXPECT_EQ(cli("verify --config " + asym.string() + " --out " + out.string()), 2);
  const fs::path eta = write_config("eta.cfg", kMono + "eta = 1\n");
  EXPECT_EQ(cli("verify --config " + eta.string() + " --out " + out.string()), 2);
  const fs::path ok = write_config("ok.cfg", kMono);
  EXPECT_EQ(cli("verify --config " + ok.string() + " --out " + out.string() + " --suite nu_bounds --grid-xi-max 0"), 2);
  EXPECT_EQ(cli("verify --config " + ok.string() + " --out " + out.string() + " --suite galerkin --basis-order 1"), 2);
  EXPECT_EQ(cli("verify --config " + ok.string() + " --out " + out.string() + " --suite nonsense"), 2);
}

TEST(Cli, VerifyHardSpheres) {
  const fs::path out = scratch() / "mono";
  EXPECT_EQ(cli("verify --config " + std::string(BOLTZMIX_CONFIG_DIR) + "/mono_hard_sphere.cfg --out " + out.string()), 0);
  EXPECT_NE(read(out / "report.txt").find("ALL PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "galerkin.csv"));
  EXPECT_TRUE(fs::exists(out / "nu_bounds.csv"));
}

TEST(Cli, SpectrumKernelDimension) {
  const fs::path out = scratch() / "spectrum";
  const fs::path cfg = write_config("mix.cfg",
                                    "[mixture]\nkind = mono, poly\nmass = 1, 2\ndof = 2, 4\n[model]\nC = 1\n"
                                    "[quadrature]\nsphere_theta = 3\nsphere_phi = 6\nlegendre_R = 4\nlegendre_r = 3\n");
  EXPECT_EQ(cli("spectrum --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_NE(read(out / "spectrum_summary.txt").find("kernel count 6"), std::string::npos);
  EXPECT_EQ(cli("spectrum --config " + std::string(BOLTZMIX_CONFIG_DIR) + "/mono_hard_sphere.cfg --out " + out.string()), 0);
  EXPECT_NE(read(out / "spectrum_summary.txt").find("kernel count 5"), std::string::npos);
}

TEST(Cli, NuTable) {
  const fs::path out = scratch() / "nu";
  const fs::path cfg = write_config("nu.cfg", kMono + "[run]\ngrid_xi_step = 1\n");
  EXPECT_EQ(cli("nu-table --config " + cfg.string() + " --out " + out.string() + " --grid-xi-max 3 --grid-I-max 2"), 0);
  const std::string table = read(out / "nu_table.csv");
  EXPECT_EQ(table.rfind("species,xi,I,nu,ratio\n", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 1 + 4 * 3);
}
