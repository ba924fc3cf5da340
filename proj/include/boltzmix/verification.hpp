#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "boltzmix/linearized_operator.hpp"

namespace boltzmix {

/// Full-precision scientific notation, 17 significant digits.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

/// One named assertion: passed iff value <= threshold (or >= for lower bounds).
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string note;
};

struct SuiteResult {
  std::string name;
  std::vector<Check> checks;
  std::string csv_header;
  std::vector<std::string> csv_rows;
  double seconds = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void at_most(std::string check, double value, double threshold, std::string note = {}) {
    checks.push_back({std::move(check), value, threshold, value <= threshold, std::move(note)});
  }
  void at_least(std::string check, double value, double threshold, std::string note = {}) {
    checks.push_back({std::move(check), value, threshold, value >= threshold, std::move(note)});
  }
  void row(std::initializer_list<std::string> cells) {
    std::string line;
    for (const std::string& c : cells) {
      if (!line.empty()) line += ',';
      line += c;
    }
    csv_rows.push_back(std::move(line));
  }
};

/// Sizes of the randomized batteries and the scan parameters.
struct VerifyOptions {
  std::size_t events_per_case = 100000;
  std::size_t microreversibility_events = 10000;
  std::size_t phase_points = 20;
  std::size_t random_functions = 20;
  int basis_order = 4;
  NuGrid grid;
  std::vector<double> truncations{4.0, 8.0, 16.0};
  std::uint64_t seed = 7;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"conservation", "microreversibility", "equilibrium",
                                              "weak_form",    "entropy",            "galerkin",
                                              "nu_bounds",    "hs_convergence",     "oracle"};
  return names;
}

namespace detail {

inline Vec3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 v(u(rng), u(rng), u(rng));
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  const auto d = uniform_direction(rng);
  return Vec3(d[0], d[1], d[2]).normalized();
}

inline CollisionParams random_params(CollisionCase kind, std::mt19937_64& rng, double lo = 0.0) {
  std::uniform_real_distribution<double> u(lo, 1.0 - lo);
  CollisionParams p;
  p.omega = random_unit(rng);
  if (uses_R(kind)) p.R = u(rng);
  if (uses_r(kind)) p.r = u(rng);
  return p;
}

inline PhasePoint random_phase_point(const MixtureSpec& mix, std::size_t alpha, std::mt19937_64& rng,
                                     double radius, double I_max) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {alpha, random_in_ball(rng, radius), mix[alpha].is_polyatomic() ? 0.05 + (I_max - 0.05) * u(rng) : 0.0};
}

/// Species list for an ordered case with the given masses and dofs, monatomic first; returns
/// the mixture and the indices of alpha and beta.
inline std::tuple<MixtureSpec, std::size_t, std::size_t> case_mixture(CollisionCase kind, double ma, double mb,
                                                                      double da, double db) {
  switch (kind) {
    case CollisionCase::mono_mono:
      return {MixtureSpec({SpeciesSpec::monatomic(ma), SpeciesSpec::monatomic(mb)}), 0, 1};
    case CollisionCase::mono_poly:
      return {MixtureSpec({SpeciesSpec::monatomic(ma), SpeciesSpec::polyatomic(mb, db)}), 0, 1};
    case CollisionCase::poly_mono:
      return {MixtureSpec({SpeciesSpec::monatomic(mb), SpeciesSpec::polyatomic(ma, da)}), 1, 0};
    case CollisionCase::poly_poly:
      break;
  }
  return {MixtureSpec({SpeciesSpec::polyatomic(ma, da), SpeciesSpec::polyatomic(mb, db)}), 0, 1};
}

/// Sum of two displaced Maxwellians per species with random parameters.
inline DistributionFunction random_bimodal(const MixtureSpec& mix, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dens(0.3, 1.0), temp(0.7, 1.5), shift(-0.8, 0.8);
  std::vector<DistributionFunction::Component> comps;
  for (std::size_t a = 0; a < mix.size(); ++a) {
    const double n1 = dens(rng), n2 = dens(rng), T1 = temp(rng), T2 = temp(rng);
    const Vec3 u1(shift(rng), shift(rng), shift(rng)), u2(shift(rng), shift(rng), shift(rng));
    comps.push_back([sp = mix[a], n1, n2, T1, T2, u1, u2](const Vec3& xi, double I) {
      return maxwellian_value(sp, n1, u1, T1, xi, I) + maxwellian_value(sp, n2, u2, T2, xi, I);
    });
  }
  return DistributionFunction(std::move(comps));
}

/// Random low-degree polynomial test function.
inline DistributionFunction random_polynomial(const MixtureSpec& mix, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<DistributionFunction::Component> comps;
  for (std::size_t a = 0; a < mix.size(); ++a) {
    std::array<double, 8> k;
    for (double& x : k) x = c(rng);
    comps.push_back([k](const Vec3& xi, double I) {
      return k[0] + k[1] * xi.x() + k[2] * xi.y() + k[3] * xi.z() + k[4] * xi.x() * xi.x() + k[5] * xi.y() * xi.z() +
             k[6] * I + 0.1 * k[7] * xi.squaredNorm() * I;
    });
  }
  return DistributionFunction(std::move(comps));
}

template <class F>
SuiteResult timed(std::string name, F&& body) {
  SuiteResult r;
  r.name = std::move(name);
  const auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline constexpr CollisionCase all_cases[] = {CollisionCase::mono_mono, CollisionCase::mono_poly,
                                              CollisionCase::poly_mono, CollisionCase::poly_poly};

}  // namespace detail

/// Momentum and energy conservation, energy re-expression and the inverse collision on random
/// events of every case, with masses in [0.5, 4], |xi| <= 5 and I <= 10.
inline SuiteResult suite_conservation(const VerifyOptions& opt) {
  return detail::timed("conservation", [&](SuiteResult& r) {
    r.csv_header = "case,events,max_momentum,max_energy,max_reexpression,max_inverse";
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> mass(0.5, 4.0), dof(2.0, 8.0), unit(0.0, 1.0);
    const std::size_t batches = std::max<std::size_t>(1, std::min<std::size_t>(100, opt.events_per_case));
    for (CollisionCase kind : detail::all_cases) {
      double mom = 0.0, en = 0.0, reexp = 0.0, inv = 0.0;
      std::size_t done = 0;
      for (std::size_t b = 0; b < batches; ++b) {
        const auto [mix, a, bb] = detail::case_mixture(kind, mass(rng), mass(rng), dof(rng), dof(rng));
        const std::size_t n = opt.events_per_case / batches + (b < opt.events_per_case % batches ? 1 : 0);
        for (std::size_t i = 0; i < n; ++i, ++done) {
          const CollisionPair pair{{a, detail::random_in_ball(rng, 5.0), 10.0 * unit(rng)},
                                   {bb, detail::random_in_ball(rng, 5.0), 10.0 * unit(rng)}};
          const CollisionEvent ev = primed_state(mix, pair, detail::random_params(kind, rng));
          const ConservationResidual res = conservation_residual(ev);
          mom = std::max(mom, res.momentum);
          en = std::max(en, res.energy);
          const double Ep = total_energy(mix, {ev.primed_a, ev.primed_b});
          reexp = std::max(reexp, std::abs(Ep - ev.E) / std::max(ev.E, 1e-300));
          const CollisionEvent back = reversed(mix, ev);
          const double scale = 1.0 + ev.pair.a.xi.norm() + ev.pair.b.xi.norm() + ev.pair.a.I + ev.pair.b.I;
          const double d = (back.primed_a.xi - ev.pair.a.xi).norm() + (back.primed_b.xi - ev.pair.b.xi).norm() +
                           std::abs(back.primed_a.I - ev.pair.a.I) + std::abs(back.primed_b.I - ev.pair.b.I);
          inv = std::max(inv, d / scale);
        }
      }
      const std::string c = to_string(kind);
      r.at_most(c + " momentum", mom, 1e-12);
      r.at_most(c + " energy", en, 1e-12);
      r.at_most(c + " energy from primed state", reexp, 1e-12);
      r.at_most(c + " inverse collision", inv, 1e-10);
      r.row({c, std::to_string(done), format_double(mom), format_double(en), format_double(reexp), format_double(inv)});
    }
  });
}

/// Microreversibility of the model on random in-domain events of every species pair, and a
/// perturbed sigma (1 + I') that must break it.
inline SuiteResult suite_microreversibility(const MixtureSpec& mix, const CrossSectionModel& model,
                                            const VerifyOptions& opt) {
  return detail::timed("microreversibility", [&](SuiteResult& r) {
    r.csv_header = "alpha,beta,case,events,max_relative_residual,perturbed_max_relative_residual";
    std::mt19937_64 rng(opt.seed + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t pairs = mix.size() * mix.size();
    double worst = 0.0, perturbed_worst = 0.0;
    bool have_control = false;
    for (std::size_t a = 0; a < mix.size(); ++a)
      for (std::size_t b = 0; b < mix.size(); ++b) {
        const CollisionCase kind = collision_case(mix, a, b);
        const std::size_t n = std::max<std::size_t>(1, opt.microreversibility_events / pairs);
        double w = 0.0, pw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const CollisionPair pair{{a, detail::random_in_ball(rng, 4.0), 0.05 + 5.0 * unit(rng)},
                                   {b, detail::random_in_ball(rng, 4.0), 0.05 + 5.0 * unit(rng)}};
          const CollisionEvent ev = primed_state(mix, pair, detail::random_params(kind, rng, 0.02));
          if (ev.g_norm <= 0.0 || ev.g_prime_norm <= 0.0) continue;
          w = std::max(w, microreversibility_check(mix, model, ev).relative());
          if (alpha_poly(kind)) {
            const auto bent = [&](const CollisionEvent& e) { return sigma(model, e).value * (1.0 + e.primed_a.I); };
            pw = std::max(pw, microreversibility_check(mix, bent, ev).relative());
          }
        }
        worst = std::max(worst, w);
        if (alpha_poly(kind)) {
          have_control = true;
          perturbed_worst = std::max(perturbed_worst, pw);
        }
        r.row({std::to_string(a + 1), std::to_string(b + 1), to_string(kind), std::to_string(n), format_double(w),
               alpha_poly(kind) ? format_double(pw) : std::string("nan")});
      }
    r.at_most("model residual", worst, 1e-12);
    if (have_control) r.at_least("perturbed model detected", perturbed_worst, 1e-6);
  });
}

/// Q(M, M) at random phase points for a drifting Maxwellian, relative to the loss term.
inline SuiteResult suite_equilibrium(const MixtureSpec& mix, const CrossSectionModel& model,
                                     const QuadratureSpec& quad, const VerifyOptions& opt) {
  return detail::timed("equilibrium", [&](SuiteResult& r) {
    r.csv_header = "species,xi_x,xi_y,xi_z,I,Q,loss,relative";
    std::mt19937_64 rng(opt.seed + 2);
    const DistributionFunction M = maxwellian(mix, mix.densities(), Vec3(0.3, -0.2, 0.1), 1.3);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.phase_points; ++i) {
      const PhasePoint z = detail::random_phase_point(mix, i % mix.size(), rng, 3.0, 5.0);
      const QEvaluation q = q_point(mix, M, z, model, quad);
      const double rel = std::abs(q.value) / std::abs(q.loss);
      worst = std::max(worst, rel);
      r.row({std::to_string(z.species + 1), format_double(z.xi.x()), format_double(z.xi.y()), format_double(z.xi.z()),
             format_double(z.I), format_double(q.value), format_double(q.loss), format_double(rel)});
    }
    r.at_most("|Q(M,M)| / |loss|", worst, 1e-6);
  });
}

/// weak_form against weak_form_symmetrized on random (f, g), and against every invariant.
inline SuiteResult suite_weak_form(const MixtureSpec& mix, const CrossSectionModel& model, const QuadratureSpec& quad,
                                   const VerifyOptions& opt) {
  return detail::timed("weak_form", [&](SuiteResult& r) {
    r.csv_header = "trial,weak_form,symmetrized,difference,combined_error,max_invariant";
    std::mt19937_64 rng(opt.seed + 3);
    const std::vector<DistributionFunction> invariants = collision_invariants(mix);
    double worst_ratio = 0.0, worst_invariant = 0.0;
    for (std::size_t t = 0; t < opt.random_functions; ++t) {
      const DistributionFunction f = detail::random_bimodal(mix, rng);
      const DistributionFunction g = detail::random_polynomial(mix, rng);
      const Estimate a = weak_form(mix, f, g, model, quad);
      const Estimate b = weak_form_symmetrized(mix, f, g, model, quad);
      const double diff = std::abs(a.value - b.value);
      const double tol = a.error + b.error;
      worst_ratio = std::max(worst_ratio, tol > 0.0 ? diff / tol : (diff > 0.0 ? INFINITY : 0.0));
      double inv = 0.0;
      for (const DistributionFunction& psi : invariants)
        inv = std::max(inv, std::abs(weak_form(mix, f, psi, model, quad).value));
      worst_invariant = std::max(worst_invariant, inv);
      r.row({std::to_string(t), format_double(a.value), format_double(b.value), format_double(diff), format_double(tol),
             format_double(inv)});
    }
    r.at_most("|difference| / combined error", worst_ratio, 1.0);
    r.at_most("|weak form| on invariants", worst_invariant, 1e-6);
  });
}

/// Sign of the entropy production on random positive f, and its value at a Maxwellian.
inline SuiteResult suite_entropy(const MixtureSpec& mix, const CrossSectionModel& model, const QuadratureSpec& quad,
                                 const VerifyOptions& opt) {
  return detail::timed("entropy", [&](SuiteResult& r) {
    r.csv_header = "trial,W,error";
    std::mt19937_64 rng(opt.seed + 4);
    double worst = -INFINITY;
    for (std::size_t t = 0; t < opt.random_functions; ++t) {
      const Estimate w = entropy_production(mix, detail::random_bimodal(mix, rng), model, quad);
      worst = std::max(worst, w.value);
      r.row({std::to_string(t), format_double(w.value), format_double(w.error)});
    }
    const Estimate wm = entropy_production(mix, maxwellian(mix, mix.densities(), Vec3(0.2, 0.0, -0.1), 1.1), model, quad);
    r.row({"maxwellian", format_double(wm.value), format_double(wm.error)});
    r.at_most("max W[f]", worst, 1e-8);
    r.at_most("|W[M]|", std::abs(wm.value), 1e-8);
  });
}

/// Symmetry, nonnegativity and kernel of the Galerkin L.
inline SuiteResult suite_galerkin(const LinearizationContext& ctx, const VerifyOptions& opt,
                                  GalerkinSystem* out = nullptr) {
  return detail::timed("galerkin", [&](SuiteResult& r) {
    r.csv_header = "index,eigenvalue";
    GalerkinSystem sys = galerkin_assemble(ctx, opt.basis_order);
    for (Eigen::Index i = 0; i < sys.eigenvalues.size(); ++i)
      r.row({std::to_string(i), format_double(sys.eigenvalues(i))});
    const std::size_t expected = ctx.mixture.size() + 4;
    std::size_t smallest_block = sys.basis.size();
    for (std::size_t a = 0; a < ctx.mixture.size(); ++a) smallest_block = std::min(smallest_block, sys.basis.count(a));
    r.at_least("basis functions per species", double(smallest_block), 35.0);
    r.at_most("gram deviation", sys.gram_deviation, 1e-8);
    r.at_most("relative asymmetry", sys.asymmetry, 1e-8);
    r.at_least("min eigenvalue / ||L||", sys.min_eigenvalue() / sys.norm, -1e-8);
    r.checks.push_back({"eigenvalues below 1e-6 ||L||", double(sys.kernel_count), double(expected),
                        sys.kernel_count == expected, "must equal s+4"});
    r.at_least("spectral gap / threshold", sys.gap_ratio, 10.0);
    r.at_most("invariant residual", sys.invariant_residual, 1e-6);
    r.at_least("coercivity (Lh,h)/(nu h,h) off the kernel", sys.coercivity, 1e-3);
    if (out) *out = std::move(sys);
  });
}

/// nu against (1 + |xi| + sqrt(I))^{1-eta} over the grid, and the same values against the
/// doubled exponent 2(1-eta), which must not flatten.
inline SuiteResult suite_nu_bounds(const LinearizationContext& ctx, const VerifyOptions& opt,
                                   NuBoundReport* out = nullptr) {
  return detail::timed("nu_bounds", [&](SuiteResult& r) {
    r.csv_header = "species,xi,I,nu,ratio";
    NuBoundReport rep = nu_bound_scan(ctx, opt.grid);
    for (const NuRow& row : rep.rows)
      r.row({std::to_string(row.species + 1), format_double(row.xi), format_double(row.I), format_double(row.nu),
             format_double(row.ratio)});
    r.at_least("nu positive", rep.positive ? 1.0 : 0.0, 1.0);
    r.at_least("ratio extrema finite", rep.finite() ? 1.0 : 0.0, 1.0);
    r.at_most("c_max / c_min", rep.spread(), NuBoundReport::spread_limit);
    r.at_most("outer relative slope", rep.max_slope, NuBoundReport::slope_limit);
    r.at_least("nu nondecreasing for |xi| >= 2", rep.monotone ? 1.0 : 0.0, 1.0);
    // The control only reuses the stored nu values, so rescale instead of rescanning.
    NuBoundReport control = rep;
    control.exponent = 2.0 * rep.exponent;
    control.max_slope = 0.0;
    control.c_min = INFINITY;
    control.c_max = 0.0;
    {
      const std::vector<double> xs = opt.grid.xi_values();
      std::size_t i0 = 0;
      while (xs[i0] < 0.9 * xs.back()) ++i0;
      if (i0 == xs.size() - 1 && i0 > 0) --i0;
      for (std::size_t start = 0; start < control.rows.size(); start += xs.size()) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          NuRow& row = control.rows[start + i];
          const double w = ctx.mixture[row.species].is_polyatomic() ? std::sqrt(row.I) : 0.0;
          row.ratio = row.nu / std::pow(1.0 + row.xi + w, control.exponent);
          control.c_min = std::min(control.c_min, row.ratio);
          control.c_max = std::max(control.c_max, row.ratio);
        }
        const double slope = std::abs(std::log(control.rows[start + xs.size() - 1].ratio) -
                                      std::log(control.rows[start + i0].ratio)) /
                             (xs.back() - xs[i0]);
        control.max_slope = std::max(control.max_slope, slope);
      }
    }
    r.at_least("wrong exponent fails flatness", control.max_slope, NuBoundReport::slope_limit,
               "exponent " + format_double(control.exponent));
    if (out) *out = std::move(rep);
  });
}

/// Hilbert-Schmidt norm of the loss kernel for every species pair under doubling truncation.
inline SuiteResult suite_hs_convergence(const LinearizationContext& ctx, const VerifyOptions& opt) {
  return detail::timed("hs_convergence", [&](SuiteResult& r) {
    r.csv_header = "alpha,beta,truncation,hs_norm,relative_increment";
    detail::require(opt.truncations.size() >= 3, "the convergence scan needs at least three truncations");
    for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
      for (std::size_t b = 0; b < ctx.mixture.size(); ++b) {
        std::vector<double> v;
        for (double T : opt.truncations) v.push_back(hs_norm_k1(ctx, a, b, T));
        bool shrinking = true;
        double last = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double inc = i ? std::abs(v[i] - v[i - 1]) / v[i] : NAN;
          if (i >= 2 && std::abs(v[i] - v[i - 1]) > std::abs(v[i - 1] - v[i - 2])) shrinking = false;
          if (i) last = inc;
          r.row({std::to_string(a + 1), std::to_string(b + 1), format_double(opt.truncations[i]), format_double(v[i]),
                 format_double(inc)});
        }
        const std::string tag = std::to_string(a + 1) + "-" + std::to_string(b + 1);
        r.at_least("pair " + tag + " increments shrink", shrinking ? 1.0 : 0.0, 1.0);
        r.at_most("pair " + tag + " final relative increment", last, 1e-3);
      }
  });
}

/// Quadrature nu and Q against the seeded Monte Carlo oracles, within three standard errors.
inline SuiteResult suite_oracle(const LinearizationContext& ctx, const VerifyOptions& opt) {
  return detail::timed("oracle", [&](SuiteResult& r) {
    r.csv_header = "quantity,species,xi,I,quadrature,quadrature_error,monte_carlo,standard_error,z_score";
    const std::size_t samples = static_cast<std::size_t>(ctx.quad.mc_samples);
    const auto report = [&](const std::string& what, const PhasePoint& z, const Estimate& det, const Estimate& mc) {
      const double sd = std::sqrt(mc.error * mc.error + det.error * det.error);
      const double zs = std::abs(det.value - mc.value) / sd;
      r.row({what, std::to_string(z.species + 1), format_double(z.xi.norm()), format_double(z.I),
             format_double(det.value), format_double(det.error), format_double(mc.value), format_double(mc.error),
             format_double(zs)});
      r.at_most(what + " species " + std::to_string(z.species + 1) + " |xi|=" + format_double(z.xi.norm()), zs, 3.0,
                "standard errors");
    };
    std::uint64_t seed = ctx.quad.mc_seed;
    for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
      for (double x : {0.0, 1.5, 4.0}) {
        const PhasePoint z{a, Vec3(x, 0.0, 0.0), ctx.mixture[a].is_polyatomic() ? 1.0 : 0.0};
        report("nu", z, nu_estimate(ctx, z), nu_mc(ctx, z, samples, seed++));
      }
    std::mt19937_64 rng(opt.seed + 5);
    const DistributionFunction f = detail::random_bimodal(ctx.mixture, rng);
    for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
      for (double x : {0.5, 2.0}) {
        const PhasePoint z{a, Vec3(0.0, x, 0.3), ctx.mixture[a].is_polyatomic() ? 0.8 : 0.0};
        const QEvaluation q = q_point(ctx.mixture, f, z, ctx.model, ctx.quad);
        report("Q", z, {q.value, q.error}, q_point_mc(ctx.mixture, f, z, ctx.model, samples, seed++));
      }
  });
}

/// Runs the named suite.
inline SuiteResult run_suite(const std::string& name, const LinearizationContext& ctx, const VerifyOptions& opt) {
  if (name == "conservation") return suite_conservation(opt);
  if (name == "microreversibility") return suite_microreversibility(ctx.mixture, ctx.model, opt);
  if (name == "equilibrium") return suite_equilibrium(ctx.mixture, ctx.model, ctx.quad, opt);
  if (name == "weak_form") return suite_weak_form(ctx.mixture, ctx.model, ctx.quad, opt);
  if (name == "entropy") return suite_entropy(ctx.mixture, ctx.model, ctx.quad, opt);
  if (name == "galerkin") return suite_galerkin(ctx, opt);
  if (name == "nu_bounds") return suite_nu_bounds(ctx, opt);
  if (name == "hs_convergence") return suite_hs_convergence(ctx, opt);
  if (name == "oracle") return suite_oracle(ctx, opt);
  throw ParameterError("unknown suite '" + name + "'");
}

}  // namespace boltzmix
