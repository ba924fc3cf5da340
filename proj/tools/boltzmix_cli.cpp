// Command-line front end: verify, nu-table and spectrum.
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "boltzmix/boltzmix.hpp"

namespace fs = std::filesystem;
using namespace boltzmix;

namespace {

struct Args {
  std::string config;
  std::string out;
  std::vector<std::string> suites;
  std::optional<double> xi_max;
  std::optional<double> I_max;
  std::optional<int> basis_order;
};

fs::path output_dir(const RunConfig& cfg, const Args& args) {
  fs::path dir = args.out.empty() ? fs::path(cfg.out) : fs::path(args.out);
  fs::create_directories(dir);
  return dir;
}

void write_csv(const fs::path& path, const std::string& header, const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << header << '\n';
  for (const std::string& r : rows) out << r << '\n';
}

/// Dense matrix, one row per line, no header.
void write_matrix(const fs::path& path, const Eigen::MatrixXd& A) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << format_double(A(i, j));
    out << '\n';
  }
}

std::string describe(const SuiteResult& r) {
  std::ostringstream s;
  s << "[" << (r.passed() ? "PASS" : "FAIL") << "] " << r.name << " (" << r.seconds << " s)\n";
  for (const Check& c : r.checks) {
    s << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << format_double(c.value) << " (limit "
      << format_double(c.threshold) << ")";
    if (!c.note.empty()) s << " " << c.note;
    s << '\n';
  }
  return s.str();
}

void apply_overrides(RunConfig& cfg, const Args& args) {
  if (args.xi_max) cfg.options.grid.xi_max = *args.xi_max;
  if (args.I_max) cfg.options.grid.I_max = *args.I_max;
  if (args.basis_order) cfg.options.basis_order = *args.basis_order;
  if (!args.suites.empty()) cfg.suites = args.suites;
}

int cmd_verify(RunConfig cfg, const Args& args) {
  apply_overrides(cfg, args);
  const std::vector<std::string> suites = cfg.suites.empty() ? suite_names() : cfg.suites;
  for (const std::string& s : suites)
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite '" + s + "'");
  if (std::find(suites.begin(), suites.end(), "nu_bounds") != suites.end()) cfg.options.grid.validate();
  if (std::find(suites.begin(), suites.end(), "galerkin") != suites.end()) GalerkinBasis(cfg.mixture, cfg.options.basis_order);
  const fs::path dir = output_dir(cfg, args);
  const LinearizationContext ctx(cfg.mixture, cfg.model, cfg.quad);

  std::ofstream report(dir / "report.txt");
  bool all = true;
  for (const std::string& name : suites) {
    SuiteResult r;
    try {
      r = run_suite(name, ctx, cfg.options);
    } catch (const ParameterError&) {
      throw;
    } catch (const std::exception& e) {
      r.name = name;
      r.checks.push_back({"completed without error", 0.0, 1.0, false, e.what()});
    }
    write_csv(dir / (name + ".csv"), r.csv_header, r.csv_rows);
    const std::string text = describe(r);
    report << text;
    std::cout << text << std::flush;
    all = all && r.passed();
  }
  report << (all ? "ALL PASS\n" : "FAILURES\n");
  std::cout << (all ? "ALL PASS\n" : "FAILURES\n");
  return all ? 0 : 1;
}

int cmd_nu_table(RunConfig cfg, const Args& args) {
  apply_overrides(cfg, args);
  cfg.options.grid.validate();
  const fs::path dir = output_dir(cfg, args);
  const LinearizationContext ctx(cfg.mixture, cfg.model, cfg.quad);
  const NuBoundReport rep = nu_bound_scan(ctx, cfg.options.grid);
  std::vector<std::string> rows;
  for (const NuRow& r : rep.rows)
    rows.push_back(std::to_string(r.species + 1) + "," + format_double(r.xi) + "," + format_double(r.I) + "," +
                   format_double(r.nu) + "," + format_double(r.ratio));
  write_csv(dir / "nu_table.csv", "species,xi,I,nu,ratio", rows);
  std::ofstream summary(dir / "nu_summary.txt");
  summary << "exponent " << format_double(rep.exponent) << "\nc_min " << format_double(rep.c_min) << "\nc_max "
          << format_double(rep.c_max) << "\nc_max/c_min " << format_double(rep.spread()) << "\nouter relative slope "
          << format_double(rep.max_slope) << "\nall positive " << (rep.positive ? "yes" : "no")
          << "\nnondecreasing for |xi| >= 2 " << (rep.monotone ? "yes" : "no") << '\n';
  std::cout << rows.size() << " rows, c_max/c_min = " << format_double(rep.spread())
            << ", outer slope = " << format_double(rep.max_slope) << '\n';
  return 0;
}

int cmd_spectrum(RunConfig cfg, const Args& args) {
  apply_overrides(cfg, args);
  const fs::path dir = output_dir(cfg, args);
  const LinearizationContext ctx(cfg.mixture, cfg.model, cfg.quad);
  const GalerkinSystem sys = galerkin_assemble(ctx, cfg.options.basis_order);
  std::vector<std::string> rows;
  for (Eigen::Index i = 0; i < sys.eigenvalues.size(); ++i)
    rows.push_back(std::to_string(i) + "," + format_double(sys.eigenvalues(i)));
  write_csv(dir / "eigenvalues.csv", "index,eigenvalue", rows);
  write_matrix(dir / "L_matrix.csv", sys.L_matrix);
  write_matrix(dir / "nu_matrix.csv", sys.nu_matrix);
  write_matrix(dir / "K_matrix.csv", sys.K_matrix);
  std::vector<std::string> basis_rows;
  for (std::size_t i = 0; i < sys.basis.size(); ++i) {
    const BasisFunction& b = sys.basis[i];
    basis_rows.push_back(std::to_string(i) + "," + std::to_string(b.species + 1) + "," + std::to_string(b.k[0]) + "," +
                         std::to_string(b.k[1]) + "," + std::to_string(b.k[2]) + "," + std::to_string(b.l));
  }
  write_csv(dir / "basis.csv", "index,species,kx,ky,kz,l", basis_rows);

  SuiteResult r;
  r.name = "spectrum";
  const std::size_t expected = ctx.mixture.size() + 4;
  r.at_most("relative asymmetry", sys.asymmetry, 1e-8);
  r.at_least("min eigenvalue / ||L||", sys.min_eigenvalue() / sys.norm, -1e-8);
  r.checks.push_back({"eigenvalues below 1e-6 ||L||", double(sys.kernel_count), double(expected),
                      sys.kernel_count == expected, "must equal s+4"});
  r.at_most("invariant residual", sys.invariant_residual, 1e-6);
  std::ofstream summary(dir / "spectrum_summary.txt");
  summary << "basis functions " << sys.basis.size() << "\nnorm " << format_double(sys.norm) << "\nthreshold "
          << format_double(sys.threshold) << "\nkernel count " << sys.kernel_count << "\ngap ratio "
          << format_double(sys.gap_ratio) << "\ncoercivity " << format_double(sys.coercivity) << '\n'
          << describe(r);
  std::cout << "basis functions " << sys.basis.size() << ", gap ratio " << format_double(sys.gap_ratio) << '\n'
            << describe(r);
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision operators of monatomic and polyatomic gas mixtures"};
  app.require_subcommand(1);
  Args args;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "configuration file")->required();
    sub->add_option("--out", args.out, "output directory");
  };
  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  common(verify);
  verify->add_option("--suite", args.suites, "suite names (default: all)");
  verify->add_option("--basis-order", args.basis_order, "Galerkin basis order");
  verify->add_option("--grid-xi-max", args.xi_max, "largest |xi| of the nu grid");
  verify->add_option("--grid-I-max", args.I_max, "largest I of the nu grid");
  CLI::App* table = app.add_subcommand("nu-table", "tabulate the collision frequency");
  common(table);
  table->add_option("--grid-xi-max", args.xi_max, "largest |xi| of the grid");
  table->add_option("--grid-I-max", args.I_max, "largest I of the grid");
  CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalues of the Galerkin L");
  common(spectrum);
  spectrum->add_option("--basis-order", args.basis_order, "Galerkin basis order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(args.config);
    if (*verify) return cmd_verify(std::move(cfg), args);
    if (*table) return cmd_nu_table(std::move(cfg), args);
    return cmd_spectrum(std::move(cfg), args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
