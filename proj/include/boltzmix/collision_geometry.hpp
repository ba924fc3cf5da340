#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "boltzmix/error.hpp"
#include "boltzmix/mixture.hpp"

namespace boltzmix {

/// Which partners carry an internal-energy variable; the first word refers to species alpha.
enum class CollisionCase { mono_mono, mono_poly, poly_mono, poly_poly };

inline const char* to_string(CollisionCase c) {
  switch (c) {
    case CollisionCase::mono_mono: return "mono/mono";
    case CollisionCase::mono_poly: return "mono/poly";
    case CollisionCase::poly_mono: return "poly/mono";
    case CollisionCase::poly_poly: return "poly/poly";
  }
  return "?";
}

inline CollisionCase collision_case(const MixtureSpec& mix, std::size_t alpha, std::size_t beta) {
  const bool pa = mix[alpha].is_polyatomic();
  const bool pb = mix[beta].is_polyatomic();
  if (pa && pb) return CollisionCase::poly_poly;
  if (pa) return CollisionCase::poly_mono;
  if (pb) return CollisionCase::mono_poly;
  return CollisionCase::mono_mono;
}

/// R is a parameter unless both partners are monatomic; r only for two polyatomic partners.
inline bool uses_R(CollisionCase c) { return c != CollisionCase::mono_mono; }
inline bool uses_r(CollisionCase c) { return c == CollisionCase::poly_poly; }
inline bool alpha_poly(CollisionCase c) { return c == CollisionCase::poly_mono || c == CollisionCase::poly_poly; }
inline bool beta_poly(CollisionCase c) { return c == CollisionCase::mono_poly || c == CollisionCase::poly_poly; }

struct CollisionPair {
  PhasePoint a;
  PhasePoint b;
};

/// Scattering direction and the energy fractions. R: share of the total energy that ends up
/// as relative kinetic energy. r: split of the remaining internal energy.
struct CollisionParams {
  Vec3 omega = Vec3::UnitZ();
  std::optional<double> R;
  std::optional<double> r;
};

/// Unprimed pair, parameters and the resulting post-collisional pair with derived energies.
struct CollisionEvent {
  CollisionPair pair;
  CollisionParams params;
  PhasePoint primed_a;
  PhasePoint primed_b;
  CollisionCase kind = CollisionCase::mono_mono;
  double m_a = 1.0;
  double m_b = 1.0;
  double exp_a = 0.0;  // dof/2 - 1 of species alpha (0 if monatomic)
  double exp_b = 0.0;
  double mu = 0.5;
  Vec3 g = Vec3::Zero();
  double g_norm = 0.0;
  double g_prime_norm = 0.0;
  Vec3 G = Vec3::Zero();
  double E = 0.0;
  double delta_I = 0.0;
  /// delta_I divided by the reduced mass.
  double delta_I_reduced = 0.0;

  Vec3 g_prime() const { return primed_a.xi - primed_b.xi; }
};

inline double reduced_mass(double m_a, double m_b) {
  detail::require(m_a > 0 && m_b > 0, "masses must be positive");
  return m_a * m_b / (m_a + m_b);
}

/// mu|g|^2/2 plus the internal energies of polyatomic participants.
inline double total_energy(const MixtureSpec& mix, const CollisionPair& pair) {
  const double mu = reduced_mass(mix[pair.a.species].mass, mix[pair.b.species].mass);
  double E = 0.5 * mu * (pair.a.xi - pair.b.xi).squaredNorm();
  if (mix[pair.a.species].is_polyatomic()) E += pair.a.I;
  if (mix[pair.b.species].is_polyatomic()) E += pair.b.I;
  return E;
}

/// The pair with centre-of-mass velocity G and total energy E whose relative velocity points
/// along omega and whose energy is split by (R, r). This is the post-collisional map, and
/// also a parametrization of the unprimed pair space.
inline CollisionPair state_from_fractions(const MixtureSpec& mix, std::size_t alpha, std::size_t beta,
                                          const Vec3& G, double E, const CollisionParams& p) {
  const CollisionCase kind = collision_case(mix, alpha, beta);
  const double ma = mix[alpha].mass, mb = mix[beta].mass;
  const double mu = ma * mb / (ma + mb);
  double kinetic = E;
  CollisionPair out{{alpha, G, 0.0}, {beta, G, 0.0}};
  if (uses_R(kind)) {
    const double R = *p.R;
    kinetic = R * E;
    const double internal = E - kinetic;
    switch (kind) {
      case CollisionCase::mono_poly: out.b.I = internal; break;
      case CollisionCase::poly_mono: out.a.I = internal; break;
      case CollisionCase::poly_poly:
        out.a.I = *p.r * internal;
        out.b.I = (1.0 - *p.r) * internal;
        break;
      default: break;
    }
  }
  const double gp = std::sqrt(std::max(0.0, 2.0 * kinetic / mu));
  out.a.xi = G + p.omega * (mb / (ma + mb) * gp);
  out.b.xi = G - p.omega * (ma / (ma + mb) * gp);
  return out;
}

namespace detail {

inline void check_params(CollisionCase kind, const CollisionParams& p) {
  require(std::abs(p.omega.norm() - 1.0) <= 1e-12, "omega must be a unit vector");
  require(p.R.has_value() == uses_R(kind), std::string("R must be supplied exactly when a partner is polyatomic (") +
                                               to_string(kind) + ")");
  require(p.r.has_value() == uses_r(kind),
          std::string("r must be supplied exactly for poly/poly collisions (") + to_string(kind) + ")");
  if (p.R) require(*p.R >= 0.0 && *p.R <= 1.0, "R must lie in [0, 1]");
  if (p.r) require(*p.r >= 0.0 && *p.r <= 1.0, "r must lie in [0, 1]");
}

}  // namespace detail

/// Post-collisional state for the pair and parameters, case by case.
inline CollisionEvent primed_state(const MixtureSpec& mix, const CollisionPair& pair, const CollisionParams& params) {
  detail::require(pair.a.species < mix.size() && pair.b.species < mix.size(), "species index out of range");
  CollisionEvent ev;
  ev.kind = collision_case(mix, pair.a.species, pair.b.species);
  detail::check_params(ev.kind, params);
  const SpeciesSpec& sa = mix[pair.a.species];
  const SpeciesSpec& sb = mix[pair.b.species];
  if (sa.is_polyatomic()) detail::require(pair.a.I >= 0.0, "internal energy must be nonnegative");
  if (sb.is_polyatomic()) detail::require(pair.b.I >= 0.0, "internal energy must be nonnegative");

  ev.pair = pair;
  ev.params = params;
  ev.m_a = sa.mass;
  ev.m_b = sb.mass;
  ev.exp_a = sa.internal_exponent();
  ev.exp_b = sb.internal_exponent();
  ev.mu = reduced_mass(ev.m_a, ev.m_b);
  ev.g = pair.a.xi - pair.b.xi;
  ev.g_norm = ev.g.norm();
  ev.G = (ev.m_a * pair.a.xi + ev.m_b * pair.b.xi) / (ev.m_a + ev.m_b);
  ev.E = total_energy(mix, pair);
  // Keep the unused internal energy of monatomic partners at zero.
  if (!sa.is_polyatomic()) ev.pair.a.I = 0.0;
  if (!sb.is_polyatomic()) ev.pair.b.I = 0.0;

  const CollisionPair primed = state_from_fractions(mix, pair.a.species, pair.b.species, ev.G, ev.E, params);
  ev.primed_a = primed.a;
  ev.primed_b = primed.b;
  ev.g_prime_norm = ev.kind == CollisionCase::mono_mono
                        ? ev.g_norm
                        : std::sqrt(std::max(0.0, 2.0 * (*params.R) * ev.E / ev.mu));
  if (ev.kind == CollisionCase::mono_mono) {
    ev.primed_a.xi = ev.G + params.omega * (ev.m_b / (ev.m_a + ev.m_b) * ev.g_norm);
    ev.primed_b.xi = ev.G - params.omega * (ev.m_a / (ev.m_a + ev.m_b) * ev.g_norm);
    if (ev.g_norm == 0.0) {
      ev.primed_a.xi = pair.a.xi;
      ev.primed_b.xi = pair.b.xi;
    }
  }
  switch (ev.kind) {
    case CollisionCase::mono_mono: ev.delta_I = 0.0; break;
    case CollisionCase::mono_poly: ev.delta_I = ev.primed_b.I - ev.pair.b.I; break;
    case CollisionCase::poly_mono: ev.delta_I = ev.primed_a.I - ev.pair.a.I; break;
    case CollisionCase::poly_poly:
      ev.delta_I = ev.primed_a.I + ev.primed_b.I - ev.pair.a.I - ev.pair.b.I;
      break;
  }
  ev.delta_I_reduced = ev.delta_I / ev.mu;
  return ev;
}

/// Jacobian of the change of variables from (xi, xi_*, [I], [I_*]) to
/// (G, E, [R], [r], direction of g), as a function of the energy split of the pair.
inline double pair_jacobian(CollisionCase kind, double mu, double E, double R) {
  const double s2 = std::numbers::sqrt2;
  switch (kind) {
    case CollisionCase::mono_mono: return s2 * std::sqrt(E) * std::pow(mu, -1.5);
    case CollisionCase::mono_poly:
    case CollisionCase::poly_mono: return s2 * std::pow(E / mu, 1.5) * std::sqrt(R);
    case CollisionCase::poly_poly: return s2 * std::pow(mu, -1.5) * std::pow(E, 2.5) * (1.0 - R) * std::sqrt(R);
  }
  return 0.0;
}

/// Jacobian factor of the parametrized post-collisional measure.
inline double measure_weight(const CollisionEvent& ev) {
  if (ev.kind == CollisionCase::mono_mono) return ev.g_prime_norm * ev.g_prime_norm;
  return pair_jacobian(ev.kind, ev.mu, ev.E, *ev.params.R);
}

/// Parameters that map the primed pair of ev back onto its unprimed pair.
inline CollisionParams reverse_params(const CollisionEvent& ev) {
  CollisionParams p;
  p.omega = ev.g_norm > 0.0 ? Vec3(ev.g / ev.g_norm) : Vec3::UnitZ();
  if (uses_R(ev.kind)) p.R = ev.E > 0.0 ? std::clamp(0.5 * ev.mu * ev.g_norm * ev.g_norm / ev.E, 0.0, 1.0) : 1.0;
  if (uses_r(ev.kind)) {
    const double internal = ev.pair.a.I + ev.pair.b.I;
    p.r = internal > 0.0 ? std::clamp(ev.pair.a.I / internal, 0.0, 1.0) : 0.5;
  }
  return p;
}

/// The inverse collision: primed pair as input, parameters from reverse_params.
inline CollisionEvent reversed(const MixtureSpec& mix, const CollisionEvent& ev) {
  return primed_state(mix, {ev.primed_a, ev.primed_b}, reverse_params(ev));
}

/// psi_alpha + psi_beta* - psi'_alpha - psi'_beta* over one collision.
inline double collision_difference(const DistributionFunction& psi, const CollisionEvent& ev) {
  return psi(ev.pair.a) + psi(ev.pair.b) - psi(ev.primed_a) - psi(ev.primed_b);
}

/// Relative residuals of momentum and energy conservation for one event.
struct ConservationResidual {
  double momentum = 0.0;
  double energy = 0.0;
};

inline ConservationResidual conservation_residual(const CollisionEvent& ev) {
  const Vec3 p0 = ev.m_a * ev.pair.a.xi + ev.m_b * ev.pair.b.xi;
  const Vec3 p1 = ev.m_a * ev.primed_a.xi + ev.m_b * ev.primed_b.xi;
  const double pscale = ev.m_a * ev.pair.a.xi.norm() + ev.m_b * ev.pair.b.xi.norm();
  const double e0 = 0.5 * ev.m_a * ev.pair.a.xi.squaredNorm() + 0.5 * ev.m_b * ev.pair.b.xi.squaredNorm() +
                    ev.pair.a.I + ev.pair.b.I;
  const double e1 = 0.5 * ev.m_a * ev.primed_a.xi.squaredNorm() + 0.5 * ev.m_b * ev.primed_b.xi.squaredNorm() +
                    ev.primed_a.I + ev.primed_b.I;
  ConservationResidual res;
  res.momentum = pscale > 0.0 ? (p1 - p0).norm() / pscale : (p1 - p0).norm();
  res.energy = e0 > 0.0 ? std::abs(e1 - e0) / e0 : std::abs(e1 - e0);
  return res;
}

}  // namespace boltzmix
