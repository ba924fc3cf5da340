#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boltzmix/verification.hpp"

namespace boltzmix {

/// Parsed run configuration: plain key = value lines under [mixture], [model], [quadrature]
/// and [run] headers. '#' starts a comment. Lists are comma separated; rows of the C matrix
/// are separated by ';'.
///
///   [mixture]
///   kind = mono, poly
///   mass = 1, 2
///   dof = 2, 4
///   density = 1, 0.7
///   [model]
///   C = 1, 1; 1, 1
///   eta = 0.5
struct RunConfig {
  MixtureSpec mixture{{SpeciesSpec::monatomic(1.0)}};
  CrossSectionModel model{Eigen::MatrixXd::Ones(1, 1), 0.0};
  QuadratureSpec quad;
  VerifyOptions options;
  std::vector<std::string> suites;  // empty: all
  std::string out = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
}

inline std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<double> v;
  for (const std::string& item : split(text, ',')) v.push_back(parse_number(key, item));
  return v;
}

inline int parse_order(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || v < 1 || v > 512) throw ConfigError("key '" + key + "' must be an integer in [1, 512]");
  return static_cast<int>(v);
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || v < 1) throw ConfigError("key '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Parses configuration text. Malformed input throws ConfigError; values that violate a
/// model invariant throw ParameterError.
inline RunConfig parse_config(std::istream& in) {
  using namespace detail;
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(number) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "mixture" && section != "model" && section != "quadrature" && section != "run")
        throw ConfigError("line " + std::to_string(number) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(number) + ": key outside a section");
    const std::string key = trim(line.substr(0, eq));
    if (sections[section].count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
    sections[section][key] = trim(line.substr(eq + 1));
  }

  RunConfig cfg;
  const auto take = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    auto& m = sections[sec];
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    std::string v = it->second;
    m.erase(it);
    return v;
  };

  // [mixture]
  const auto kinds = take("mixture", "kind");
  const auto masses = take("mixture", "mass");
  if (!kinds || !masses) throw ConfigError("[mixture] needs 'kind' and 'mass'");
  const std::vector<std::string> kind_list = split(*kinds, ',');
  const std::vector<double> mass_list = parse_numbers("mass", *masses);
  const std::size_t s = kind_list.size();
  if (mass_list.size() != s) throw ConfigError("[mixture] 'mass' needs one value per species");
  std::vector<double> dof_list(s, 2.0), density_list(s, 1.0);
  if (const auto v = take("mixture", "dof")) dof_list = parse_numbers("dof", *v);
  if (const auto v = take("mixture", "density")) density_list = parse_numbers("density", *v);
  if (dof_list.size() != s || density_list.size() != s)
    throw ConfigError("[mixture] 'dof' and 'density' need one value per species");
  std::vector<SpeciesSpec> species;
  for (std::size_t a = 0; a < s; ++a) {
    if (kind_list[a] == "mono")
      species.push_back({mass_list[a], SpeciesKind::monatomic, dof_list[a], density_list[a]});
    else if (kind_list[a] == "poly")
      species.push_back(SpeciesSpec::polyatomic(mass_list[a], dof_list[a], density_list[a]));
    else
      throw ConfigError("species kind must be 'mono' or 'poly', got '" + kind_list[a] + "'");
  }
  cfg.mixture = MixtureSpec(std::move(species));

  // [model]
  const auto C_text = take("model", "C");
  if (!C_text) throw ConfigError("[model] needs 'C'");
  Eigen::MatrixXd C(s, s);
  const std::vector<std::string> rows = split(*C_text, ';');
  if (rows.size() == 1 && split(rows[0], ',').size() == 1) {
    C.setConstant(parse_number("C", rows[0]));
  } else {
    if (rows.size() != s) throw ConfigError("[model] 'C' needs " + std::to_string(s) + " rows");
    for (std::size_t i = 0; i < s; ++i) {
      const std::vector<double> r = parse_numbers("C", rows[i]);
      if (r.size() != s) throw ConfigError("[model] 'C' row " + std::to_string(i + 1) + " needs " + std::to_string(s) + " entries");
      for (std::size_t j = 0; j < s; ++j) C(i, j) = r[j];
    }
  }
  require((C.array() > 0.0).all(), "C entries must be positive");
  double eta = 0.0, gamma = 0.5;
  if (const auto v = take("model", "eta")) eta = parse_number("eta", *v);
  if (const auto v = take("model", "gamma")) gamma = parse_number("gamma", *v);
  cfg.model = CrossSectionModel(C, eta, gamma);

  // [quadrature]
  QuadratureSpec& q = cfg.quad;
  const std::pair<const char*, int*> orders[] = {
      {"hermite_order", &q.hermite_order},       {"laguerre_order", &q.laguerre_order},
      {"sphere_theta", &q.sphere_theta},         {"sphere_phi", &q.sphere_phi},
      {"legendre_R", &q.legendre_R},             {"legendre_r", &q.legendre_r},
      {"radial_order", &q.radial_order},         {"polar_order", &q.polar_order},
      {"azimuth_order", &q.azimuth_order},       {"centre_of_mass_order", &q.centre_of_mass_order},
      {"collision_energy_order", &q.collision_energy_order}};
  for (const auto& [key, slot] : orders)
    if (const auto v = take("quadrature", key)) *slot = parse_order(key, *v);
  const std::pair<const char*, double*> reals[] = {{"radial_extent", &q.radial_extent},
                                                   {"velocity_scale", &q.velocity_scale},
                                                   {"energy_scale", &q.energy_scale}};
  for (const auto& [key, slot] : reals)
    if (const auto v = take("quadrature", key)) *slot = parse_number(key, *v);
  if (const auto v = take("quadrature", "seed")) q.mc_seed = static_cast<std::uint64_t>(parse_count("seed", *v));
  if (const auto v = take("quadrature", "samples")) q.mc_samples = parse_count("samples", *v);
  q.validate();

  // [run]
  VerifyOptions& o = cfg.options;
  if (const auto v = take("run", "suites"); v && *v != "all") cfg.suites = split(*v, ',');
  for (const std::string& name : cfg.suites)
    if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
      throw ConfigError("unknown suite '" + name + "'");
  if (const auto v = take("run", "out")) cfg.out = *v;
  if (const auto v = take("run", "events")) o.events_per_case = parse_count("events", *v);
  if (const auto v = take("run", "microreversibility_events"))
    o.microreversibility_events = parse_count("microreversibility_events", *v);
  if (const auto v = take("run", "points")) o.phase_points = parse_count("points", *v);
  if (const auto v = take("run", "functions")) o.random_functions = parse_count("functions", *v);
  if (const auto v = take("run", "basis_order")) o.basis_order = static_cast<int>(parse_count("basis_order", *v));
  if (const auto v = take("run", "grid_xi_max")) o.grid.xi_max = parse_number("grid_xi_max", *v);
  if (const auto v = take("run", "grid_xi_step")) o.grid.xi_step = parse_number("grid_xi_step", *v);
  if (const auto v = take("run", "grid_I_max")) o.grid.I_max = parse_number("grid_I_max", *v);
  if (const auto v = take("run", "grid_I_step")) o.grid.I_step = parse_number("grid_I_step", *v);
  if (const auto v = take("run", "truncations")) o.truncations = parse_numbers("truncations", *v);
  if (const auto v = take("run", "seed")) o.seed = static_cast<std::uint64_t>(parse_count("seed", *v));

  for (const auto& [sec, rest] : sections)
    if (!rest.empty()) throw ConfigError("unknown key '" + rest.begin()->first + "' in [" + sec + "]");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace boltzmix
