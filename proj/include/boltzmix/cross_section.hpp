#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "boltzmix/collision_geometry.hpp"
#include "boltzmix/error.hpp"

namespace boltzmix {

enum class CrossSectionKind { hard_potential_cutoff };

/// Hard-potential cross sections with cutoff,
///   sigma = C_ab |g'| / |g| E^{-eta/2} Upsilon,
/// with a symmetric matrix of constants C_ab and 0 <= eta < 1. gamma is only used by the
/// bound check.
class CrossSectionModel {
 public:
  CrossSectionModel(Eigen::MatrixXd C, double eta, double gamma = 0.5) : C_(std::move(C)), eta_(eta), gamma_(gamma) {
    detail::require(C_.rows() >= 1 && C_.rows() == C_.cols(), "C must be a nonempty square matrix");
    for (Eigen::Index i = 0; i < C_.rows(); ++i)
      for (Eigen::Index j = 0; j < C_.cols(); ++j) {
        detail::require(std::isfinite(C_(i, j)) && C_(i, j) >= 0.0, "C entries must be finite and nonnegative");
        detail::require(C_(i, j) == C_(j, i), "C must be symmetric");
      }
    detail::require(eta_ >= 0.0 && eta_ < 1.0, "eta must satisfy 0 <= eta < 1");
    detail::require(gamma_ > 0.0 && gamma_ < 1.0, "gamma must lie in (0, 1)");
  }

  /// Same C for every pair.
  static CrossSectionModel uniform(std::size_t species, double C, double eta, double gamma = 0.5) {
    return CrossSectionModel(Eigen::MatrixXd::Constant(species, species, C), eta, gamma);
  }

  CrossSectionKind kind() const { return CrossSectionKind::hard_potential_cutoff; }
  std::size_t species_count() const { return static_cast<std::size_t>(C_.rows()); }
  double C(std::size_t a, std::size_t b) const { return C_(a, b); }
  const Eigen::MatrixXd& C() const { return C_; }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  /// Models of this family do not depend on the scattering angle, so sphere integrals of
  /// the weight reduce to 4 pi.
  bool angle_independent() const { return true; }

  CrossSectionModel scaled(double factor) const { return CrossSectionModel(factor * C_, eta_, gamma_); }

 private:
  Eigen::MatrixXd C_;
  double eta_;
  double gamma_;
};

struct EnergyFactors {
  double E = 0.0;
  double calE = 1.0;
  double calE_star = 1.0;
  double upsilon = 1.0;
};

/// calE = E if alpha is polyatomic (else 1), calE_star likewise for beta, and
/// Upsilon = I'^a I'_*^b / (calE^{dof_a/2} calE_star^{dof_b/2}) with monatomic factors dropped.
inline EnergyFactors energy_factors(const CollisionEvent& ev) {
  EnergyFactors f;
  f.E = ev.E;
  double num = 1.0, den = 1.0;
  if (alpha_poly(ev.kind)) {
    f.calE = ev.E;
    num *= std::pow(ev.primed_a.I, ev.exp_a);
    den *= std::pow(f.calE, ev.exp_a + 1.0);
  }
  if (beta_poly(ev.kind)) {
    f.calE_star = ev.E;
    num *= std::pow(ev.primed_b.I, ev.exp_b);
    den *= std::pow(f.calE_star, ev.exp_b + 1.0);
  }
  f.upsilon = den > 0.0 ? num / den : 0.0;
  return f;
}

struct SigmaValue {
  double value = 0.0;
  bool degenerate = false;  // set when |g| = 0
};

inline SigmaValue sigma(const CrossSectionModel& model, const CollisionEvent& ev) {
  if (ev.g_norm == 0.0) return {0.0, true};
  if (!(ev.g_prime_norm > 0.0))
    throw DomainError("cross section evaluated outside mu|g|^2 > 2 Delta I (" + std::string(to_string(ev.kind)) + ")");
  const EnergyFactors f = energy_factors(ev);
  const double C = model.C(ev.pair.a.species, ev.pair.b.species);
  return {C * ev.g_prime_norm / ev.g_norm * std::pow(ev.E, -0.5 * model.eta()) * f.upsilon, false};
}

/// |g| sigma in cancelled form: C |g'| E^{-eta/2} Upsilon. Finite at |g| = 0.
inline double relative_flux(const CrossSectionModel& model, const CollisionEvent& ev) {
  if (ev.E <= 0.0 || ev.g_prime_norm == 0.0) return 0.0;
  const double C = model.C(ev.pair.a.species, ev.pair.b.species);
  return C * ev.g_prime_norm * std::pow(ev.E, -0.5 * model.eta()) * energy_factors(ev).upsilon;
}

/// Weight multiplying Lambda and the internal-energy powers in the reduced collision
/// integrals: sigma|g|, sigma|g|E or sigma|g|E^2(1-R) by case.
inline double collision_weight(const CrossSectionModel& model, const CollisionEvent& ev) {
  const double flux = relative_flux(model, ev);
  switch (ev.kind) {
    case CollisionCase::mono_mono: return flux;
    case CollisionCase::mono_poly:
    case CollisionCase::poly_mono: return flux * ev.E;
    case CollisionCase::poly_poly: return flux * ev.E * ev.E * (1.0 - *ev.params.R);
  }
  return 0.0;
}

/// Both sides of the microreversibility relation
///   I^a I_*^b |g|^2 sigma(forward) = I'^a I'_*^b |g'|^2 sigma(reverse).
struct MicroreversibilityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return std::abs(lhs - rhs); }
  double relative() const { return residual() / std::max(std::abs(lhs), std::abs(rhs)); }
};

template <class SigmaFn>
MicroreversibilityCheck microreversibility_check(const MixtureSpec& mix, SigmaFn&& sigma_fn,
                                                 const CollisionEvent& ev) {
  const CollisionEvent back = reversed(mix, ev);
  const auto powers = [](const CollisionEvent& e, const PhasePoint& a, const PhasePoint& b) {
    double p = 1.0;
    if (alpha_poly(e.kind)) p *= std::pow(a.I, e.exp_a);
    if (beta_poly(e.kind)) p *= std::pow(b.I, e.exp_b);
    return p;
  };
  MicroreversibilityCheck c;
  c.lhs = powers(ev, ev.pair.a, ev.pair.b) * ev.g_norm * ev.g_norm * sigma_fn(ev);
  c.rhs = powers(ev, ev.primed_a, ev.primed_b) * ev.g_prime_norm * ev.g_prime_norm * sigma_fn(back);
  return c;
}

inline MicroreversibilityCheck microreversibility_check(const MixtureSpec& mix, const CrossSectionModel& model,
                                                        const CollisionEvent& ev) {
  return microreversibility_check(mix, [&](const CollisionEvent& e) { return sigma(model, e).value; }, ev);
}

inline double microreversibility_residual(const MixtureSpec& mix, const CrossSectionModel& model,
                                          const CollisionEvent& ev) {
  return microreversibility_check(mix, model, ev).residual();
}

/// Largest observed sigma|g|^2 / (Upsilon (Psi + Psi^{gamma/2})) with Psi = |g||g'|.
struct BoundReport {
  double max_ratio = 0.0;
  std::size_t events = 0;
};

template <class SigmaFn>
BoundReport bound_check_est1(double gamma, std::span<const CollisionEvent> events, SigmaFn&& sigma_fn) {
  detail::require(!events.empty(), "bound check needs a nonempty batch");
  detail::require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  BoundReport rep;
  for (const CollisionEvent& ev : events) {
    const double ups = energy_factors(ev).upsilon;
    const double psi = ev.g_norm * ev.g_prime_norm;
    if (ups <= 0.0 || psi <= 0.0) continue;
    const double ratio = sigma_fn(ev) * ev.g_norm * ev.g_norm / (ups * (psi + std::pow(psi, 0.5 * gamma)));
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.events;
  }
  return rep;
}

inline BoundReport bound_check_est1(const CrossSectionModel& model, std::span<const CollisionEvent> events) {
  return bound_check_est1(model.gamma(), events, [&](const CollisionEvent& e) { return sigma(model, e).value; });
}

}  // namespace boltzmix
