// Acceptance run: one PASS/FAIL line per criterion, each with its runtime budget.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "boltzmix/boltzmix.hpp"

using namespace boltzmix;

namespace {

RunConfig config(const std::string& name) { return load_config(std::string(BOLTZMIX_CONFIG_DIR) + "/" + name); }

LinearizationContext context(const RunConfig& cfg) { return LinearizationContext(cfg.mixture, cfg.model, cfg.quad); }

struct Outcome {
  bool passed = true;
  std::vector<std::string> details;

  void add(const std::string& label, const SuiteResult& r) {
    passed = passed && r.passed();
    for (const Check& c : r.checks)
      details.push_back(label + ": " + (c.passed ? "ok   " : "FAIL ") + c.name + " = " + format_double(c.value) +
                        " (limit " + format_double(c.threshold) + ")");
  }
};

int run(int id, const std::string& title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.passed = false;
    out.details.push_back(std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = seconds <= budget_seconds;
  const bool ok = out.passed && in_time;
  std::printf("%s criterion %d: %s (%.1f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(), seconds,
              budget_seconds);
  for (const std::string& d : out.details) std::printf("      %s\n", d.c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

}  // namespace

int main() {
  const RunConfig mono = config("mono_hard_sphere.cfg");
  const RunConfig poly = config("poly_delta4.cfg");
  const RunConfig mixture = config("mono_poly_mixture.cfg");
  const RunConfig mixture05 = config("mixture_eta05.cfg");
  int failures = 0;

  failures += run(1, "conservation on 1e5 random events per case", 10.0, [&] {
    VerifyOptions opt;
    opt.events_per_case = 100000;
    Outcome o;
    o.add("random masses", suite_conservation(opt));
    return o;
  });

  failures += run(2, "microreversibility on 1e4 events, perturbed model detected", 5.0, [&] {
    VerifyOptions opt;
    opt.microreversibility_events = 10000;
    Outcome o;
    o.add("mono+poly eta=0.5", suite_microreversibility(mixture05.mixture, mixture05.model, opt));
    return o;
  });

  failures += run(3, "Q(M,M) vanishes at 20 points for three mixtures", 120.0, [&] {
    Outcome o;
    for (const auto* cfg : {&mono, &poly, &mixture}) {
      VerifyOptions opt = cfg->options;
      opt.phase_points = 20;
      o.add(cfg->out, suite_equilibrium(cfg->mixture, cfg->model, cfg->quad, opt));
    }
    return o;
  });

  failures += run(4, "weak form equals its symmetrization; invariants give zero", 120.0, [&] {
    VerifyOptions opt = mixture.options;
    opt.random_functions = 20;
    Outcome o;
    o.add("mono+poly", suite_weak_form(mixture.mixture, mixture.model, mixture.quad, opt));
    return o;
  });

  failures += run(5, "entropy production is nonpositive and vanishes at M", 120.0, [&] {
    VerifyOptions opt = mixture.options;
    opt.random_functions = 20;
    Outcome o;
    o.add("mono+poly", suite_entropy(mixture.mixture, mixture.model, mixture.quad, opt));
    return o;
  });

  failures += run(6, "Galerkin L symmetric, nonnegative, kernel of dimension s+4", 600.0, [&] {
    Outcome o;
    for (const auto* cfg : {&mono, &mixture}) {
      VerifyOptions opt = cfg->options;
      opt.basis_order = 4;
      o.add(cfg->out, suite_galerkin(context(*cfg), opt));
    }
    return o;
  });

  failures += run(7, "nu sandwich bounds for eta = 0 and 0.5 with wrong-exponent control", 300.0, [&] {
    Outcome o;
    for (const auto* cfg : {&mono, &mixture05}) {
      VerifyOptions opt = cfg->options;
      opt.grid = NuGrid{};
      o.add(cfg->out, suite_nu_bounds(context(*cfg), opt));
    }
    return o;
  });

  failures += run(8, "Hilbert-Schmidt norm of the loss kernel converges for every pair", 300.0, [&] {
    VerifyOptions opt = mixture.options;
    opt.truncations = {4.0, 8.0, 16.0};
    Outcome o;
    o.add("mono+poly", suite_hs_convergence(context(mixture), opt));
    return o;
  });

  failures += run(9, "quadrature nu and Q agree with Monte Carlo oracles", 600.0, [&] {
    Outcome o;
    for (const auto* cfg : {&mono, &poly, &mixture05}) o.add(cfg->out, suite_oracle(context(*cfg), cfg->options));
    return o;
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
