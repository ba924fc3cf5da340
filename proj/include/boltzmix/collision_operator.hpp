#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "boltzmix/collision_geometry.hpp"
#include "boltzmix/cross_section.hpp"
#include "boltzmix/error.hpp"
#include "boltzmix/mixture.hpp"
#include "boltzmix/quadrature.hpp"

namespace boltzmix {

namespace detail {

/// Partner state with its Lebesgue weight for d xi_* [d I_*].
struct PartnerNode {
  Vec3 xi;
  double I = 0.0;
  double weight = 0.0;
};

/// Orthonormal frame whose third axis is along v (z axis if v = 0).
inline std::array<Vec3, 3> frame_along(const Vec3& v) {
  const double n = v.norm();
  const Vec3 e3 = n > 0.0 ? Vec3(v / n) : Vec3::UnitZ();
  const Vec3 helper = std::abs(e3.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (helper - helper.dot(e3) * e3).normalized();
  return {e1, e3.cross(e1), e3};
}

/// Internal-energy nodes for species sp with Lebesgue weights (a single dummy node for
/// monatomic species).
inline Rule1D internal_energy_rule(const SpeciesSpec& sp, const QuadratureSpec& q) {
  if (!sp.is_polyatomic()) return Rule1D{{0.0}, {1.0}};
  const double b = sp.internal_exponent();
  Rule1D rule = gauss_laguerre(q.laguerre_order, b);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    rule.weights[i] *= q.energy_scale * std::exp(t - b * std::log(t));
    rule.nodes[i] = q.energy_scale * t;
  }
  return rule;
}

/// Partner velocities in spherical coordinates with the pole along xi. While xi lies in the
/// thermal bulk of the partner (sqrt(m_beta)|xi| <= 2.5 in units of velocity_scale) the
/// coordinates are centred at xi, so the kink of the integrand at xi_* = xi sits at the radial
/// origin. Further out they are centred at the origin, where the partner density lives; the
/// kink is then in its exponentially small tail. Radius up to the centre's distance from the
/// origin plus radial_extent * velocity_scale / sqrt(m_beta).
inline std::vector<PartnerNode> partner_nodes(const MixtureSpec& mix, std::size_t beta, const Vec3& xi,
                                              const QuadratureSpec& q) {
  const double thermal = q.velocity_scale / std::sqrt(mix[beta].mass);
  const Vec3 centre = xi.norm() <= 2.5 * thermal ? xi : Vec3::Zero();
  const double rmax = centre.norm() + q.radial_extent * thermal;
  const Rule1D radial = gauss_legendre(q.radial_order, 0.0, rmax);
  const Rule1D polar = gauss_legendre(q.polar_order, -1.0, 1.0);
  const Rule1D internal = internal_energy_rule(mix[beta], q);
  const auto [e1, e2, e3] = frame_along(xi);
  std::vector<PartnerNode> nodes;
  nodes.reserve(radial.size() * polar.size() * q.azimuth_order * internal.size());
  for (int k = 0; k < q.azimuth_order; ++k) {
    const double phi = 2.0 * std::numbers::pi * (k + 0.5) / q.azimuth_order;
    const Vec3 side = std::cos(phi) * e1 + std::sin(phi) * e2;
    for (std::size_t j = 0; j < polar.size(); ++j) {
      const double c = polar.nodes[j];
      const Vec3 dir = c * e3 + std::sqrt(std::max(0.0, 1.0 - c * c)) * side;
      for (std::size_t i = 0; i < radial.size(); ++i) {
        const double rho = radial.nodes[i];
        const double w = radial.weights[i] * rho * rho * polar.weights[j] * 2.0 * std::numbers::pi / q.azimuth_order;
        for (std::size_t l = 0; l < internal.size(); ++l)
          nodes.push_back({centre - rho * dir, internal.nodes[l], w * internal.weights[l]});
      }
    }
  }
  return nodes;
}

/// Collision parameters with weights for d omega [dR] [dr]. With angular = false a single
/// direction carries the full 4 pi.
struct FractionNode {
  CollisionParams params;
  double weight = 0.0;
};

inline std::vector<FractionNode> fraction_nodes(CollisionCase kind, const QuadratureSpec& q, bool angular) {
  SphereRule sphere;
  if (angular) {
    sphere = product_sphere(q.sphere_theta, q.sphere_phi);
  } else {
    sphere.directions.push_back({0.0, 0.0, 1.0});
    sphere.weights.push_back(4.0 * std::numbers::pi);
  }
  const Rule1D Rs = uses_R(kind) ? legendre_squared(q.legendre_R) : Rule1D{{1.0}, {1.0}};
  const Rule1D rs = uses_r(kind) ? gauss_legendre(q.legendre_r) : Rule1D{{0.5}, {1.0}};
  std::vector<FractionNode> out;
  out.reserve(sphere.size() * Rs.size() * rs.size());
  for (std::size_t i = 0; i < Rs.size(); ++i)
    for (std::size_t j = 0; j < rs.size(); ++j)
      for (std::size_t k = 0; k < sphere.size(); ++k) {
        FractionNode fn;
        fn.params.omega = Vec3(sphere.directions[k][0], sphere.directions[k][1], sphere.directions[k][2]);
        if (uses_R(kind)) fn.params.R = Rs.nodes[i];
        if (uses_r(kind)) fn.params.r = rs.nodes[j];
        fn.weight = Rs.weights[i] * rs.weights[j] * sphere.weights[k];
        out.push_back(fn);
      }
  return out;
}

/// Integral over partner states and collision parameters at a fixed phase point z.
/// per_partner(partner) returns a callable mapping a CollisionEvent to the integrand.
template <class PerPartner>
double partner_integral(const MixtureSpec& mix, const PhasePoint& z, std::size_t beta, const QuadratureSpec& q,
                        bool angular, PerPartner&& per_partner) {
  const std::vector<PartnerNode> partners = partner_nodes(mix, beta, z.xi, q);
  const std::vector<FractionNode> fractions = fraction_nodes(collision_case(mix, z.species, beta), q, angular);
  std::vector<double> terms;
  terms.reserve(partners.size());
  for (const PartnerNode& pn : partners) {
    const PhasePoint zb{beta, pn.xi, pn.I};
    auto inner = per_partner(zb);
    double s = 0.0;
    for (const FractionNode& fr : fractions) {
      const CollisionEvent ev = primed_state(mix, {z, zb}, fr.params);
      s += fr.weight * inner(ev);
    }
    terms.push_back(pn.weight * s);
  }
  return pairwise_sum(terms);
}

/// I^a I_*^b / (I'^a I'_*^b) over the polyatomic participants.
inline double internal_ratio(const CollisionEvent& ev) {
  double r = 1.0;
  if (alpha_poly(ev.kind) && ev.exp_a != 0.0) r *= std::pow(ev.pair.a.I / ev.primed_a.I, ev.exp_a);
  if (beta_poly(ev.kind) && ev.exp_b != 0.0) r *= std::pow(ev.pair.b.I / ev.primed_b.I, ev.exp_b);
  return r;
}

inline double checked_density(const DistributionFunction& f, const PhasePoint& z) {
  const double v = f(z);
  if (!(v >= 0.0) || !std::isfinite(v))
    throw DomainError("distribution must be finite and nonnegative (species " + std::to_string(z.species) +
                      ", xi = " + describe_node(std::span<const double>(z.xi.data(), 3)) + ", I = " +
                      std::to_string(z.I) + ")");
  return v;
}

}  // namespace detail

/// Collision operator value at one phase point with its per-partner breakdown.
struct QEvaluation {
  double value = 0.0;
  double error = 0.0;
  /// Magnitude of the loss term, the natural scale for relative checks.
  double loss = 0.0;
  std::vector<double> by_partner;
};

namespace detail {

inline QEvaluation q_point_once(const MixtureSpec& mix, const DistributionFunction& f, const PhasePoint& z,
                                const CrossSectionModel& model, const QuadratureSpec& q) {
  QEvaluation out;
  const double fa = checked_density(f, z);
  for (std::size_t beta = 0; beta < mix.size(); ++beta) {
    const double gain = partner_integral(mix, z, beta, q, true, [&](const PhasePoint&) {
      return [&](const CollisionEvent& ev) {
        const double fp = checked_density(f, ev.primed_a) * checked_density(f, ev.primed_b);
        return collision_weight(model, ev) * fp * internal_ratio(ev);
      };
    });
    const double loss = partner_integral(mix, z, beta, q, !model.angle_independent(), [&](const PhasePoint& zb) {
      const double ff = fa * checked_density(f, zb);
      return [&model, ff](const CollisionEvent& ev) { return collision_weight(model, ev) * ff; };
    });
    out.by_partner.push_back(gain - loss);
    out.value += gain - loss;
    out.loss += loss;
  }
  return out;
}

}  // namespace detail

/// Q_alpha(f, f) at z, summed over partner species; error from the coarse companion rule.
inline QEvaluation q_point(const MixtureSpec& mix, const DistributionFunction& f, const PhasePoint& z,
                           const CrossSectionModel& model, const QuadratureSpec& quad) {
  quad.validate();
  QEvaluation fine = detail::q_point_once(mix, f, z, model, quad);
  const QEvaluation coarse = detail::q_point_once(mix, f, z, model, quad.coarsened());
  fine.error = std::abs(fine.value - coarse.value) + 1e-15 * fine.loss;
  return fine;
}

/// Q(f, h) + Q(h, f) at z using the bilinear form of Lambda. f and h may take any sign.
inline Estimate bilinear_q(const MixtureSpec& mix, const DistributionFunction& f, const DistributionFunction& h,
                           const PhasePoint& z, const CrossSectionModel& model, const QuadratureSpec& quad) {
  const auto once = [&](const QuadratureSpec& q) {
    const double fa = f(z), ha = h(z);
    double total = 0.0;
    for (std::size_t beta = 0; beta < mix.size(); ++beta) {
      total += detail::partner_integral(mix, z, beta, q, true, [&](const PhasePoint& zb) {
        const double fb = f(zb), hb = h(zb);
        return [&, fb, hb](const CollisionEvent& ev) {
          const double gain = (f(ev.primed_a) * h(ev.primed_b) + h(ev.primed_a) * f(ev.primed_b)) *
                              detail::internal_ratio(ev);
          return collision_weight(model, ev) * (gain - fa * hb - ha * fb);
        };
      });
    }
    return total;
  };
  quad.validate();
  const double v = once(quad);
  return {v, std::abs(v - once(quad.coarsened()))};
}

/// Seeded Monte Carlo estimate of Q_alpha(f, f)(z). Partner velocities are drawn from an
/// isotropic Gaussian proposal of standard deviation proposal_scale / sqrt(m_beta), internal
/// energies from a Gamma proposal, and (omega, R, r) uniformly.
inline Estimate q_point_mc(const MixtureSpec& mix, const DistributionFunction& f, const PhasePoint& z,
                           const CrossSectionModel& model, std::size_t samples, std::uint64_t seed,
                           double proposal_scale = 1.5) {
  Estimate total;
  double var = 0.0;
  const double fa = detail::checked_density(f, z);
  for (std::size_t beta = 0; beta < mix.size(); ++beta) {
    const SpeciesSpec& sb = mix[beta];
    const CollisionCase kind = collision_case(mix, z.species, beta);
    const double sd = proposal_scale / std::sqrt(sb.mass);
    const double shape = sb.internal_exponent() + 1.0;
    const Estimate part = monte_carlo(samples, seed + 7919 * beta, [&](std::mt19937_64& rng) {
      std::normal_distribution<double> normal(0.0, sd);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const Vec3 xs(normal(rng), normal(rng), normal(rng));
      double pdf = std::exp(-xs.squaredNorm() / (2.0 * sd * sd)) / std::pow(2.0 * std::numbers::pi * sd * sd, 1.5);
      double Is = 0.0;
      if (sb.is_polyatomic()) {
        std::gamma_distribution<double> gam(shape, proposal_scale);
        Is = gam(rng);
        pdf *= std::pow(Is, shape - 1.0) * std::exp(-Is / proposal_scale) /
               (std::tgamma(shape) * std::pow(proposal_scale, shape));
      }
      const auto dir = uniform_direction(rng);
      CollisionParams p;
      p.omega = Vec3(dir[0], dir[1], dir[2]);
      if (uses_R(kind)) p.R = unit(rng);
      if (uses_r(kind)) p.r = unit(rng);
      const CollisionEvent ev = primed_state(mix, {z, {beta, xs, Is}}, p);
      const double gain = detail::checked_density(f, ev.primed_a) * detail::checked_density(f, ev.primed_b) *
                          detail::internal_ratio(ev);
      const double loss = fa * detail::checked_density(f, ev.pair.b);
      return 4.0 * std::numbers::pi * collision_weight(model, ev) * (gain - loss) / pdf;
    });
    total.value += part.value;
    var += part.error * part.error;
  }
  total.error = std::sqrt(var);
  return total;
}

namespace detail {

/// Symmetric collision coordinates for an ordered species pair: the pair space is
/// parametrized by (G, E) and the fractions (R0, r0, direction of g), and each collision by
/// a second fraction set (R, r, omega) drawn from the same rule. Exchanging the two fraction
/// sets is the map between a collision and its inverse, so the node set is closed under it.
class PairEngine {
 public:
  struct CentreNode {
    Vec3 G;
    double weight = 0.0;  // Lebesgue weight
  };

  /// Geometry and measure at one collision-energy node. rho(u, p) is the weight of the
  /// collision taking fraction node u to fraction node p, including the Jacobian, the
  /// collision weight, the internal-energy powers and the energy quadrature weight.
  struct EnergyBlock {
    double E = 0.0;
    std::vector<Vec3> g;
    std::vector<double> I_a;
    std::vector<double> I_b;
    Eigen::MatrixXd rho;
  };

  PairEngine(const MixtureSpec& mix, const CrossSectionModel& model, const QuadratureSpec& q, std::size_t alpha,
             std::size_t beta)
      : mix_(&mix), model_(&model), alpha_(alpha), beta_(beta), kind_(collision_case(mix, alpha, beta)) {
    const double ma = mix[alpha].mass, mb = mix[beta].mass;
    const double M = ma + mb;
    mu_ = ma * mb / M;
    share_a_ = mb / M;
    share_b_ = ma / M;
    fractions_ = fraction_nodes(kind_, q, true);

    const Rule1D h = gauss_hermite(q.centre_of_mass_order);
    const double scale = std::numbers::sqrt2 * q.velocity_scale / std::sqrt(M);
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < h.size(); ++j)
        for (std::size_t k = 0; k < h.size(); ++k) {
          const double t2 = h.nodes[i] * h.nodes[i] + h.nodes[j] * h.nodes[j] + h.nodes[k] * h.nodes[k];
          centres_.push_back({scale * Vec3(h.nodes[i], h.nodes[j], h.nodes[k]),
                              h.weights[i] * h.weights[j] * h.weights[k] * scale * scale * scale * std::exp(t2)});
        }

    // Laguerre exponent that makes the Maxwellian-weighted integrand polynomial in E.
    double p = 1.0 - 0.5 * model.eta();
    if (alpha_poly(kind_)) p += 1.0 + mix[alpha].internal_exponent();
    if (beta_poly(kind_)) p += 1.0 + mix[beta].internal_exponent();
    const Rule1D l = gauss_laguerre(q.collision_energy_order, p);
    for (std::size_t i = 0; i < l.size(); ++i) {
      energies_.push_back(q.energy_scale * l.nodes[i]);
      energy_weights_.push_back(q.energy_scale * l.weights[i] * std::exp(l.nodes[i] - p * std::log(l.nodes[i])));
    }
  }

  std::size_t alpha() const { return alpha_; }
  std::size_t beta() const { return beta_; }
  CollisionCase kind() const { return kind_; }
  std::size_t fraction_count() const { return fractions_.size(); }
  std::size_t energy_count() const { return energies_.size(); }
  const std::vector<CentreNode>& centres() const { return centres_; }

  /// Velocities of the two partners at fraction node u for centre G.
  Vec3 xi_a(const Vec3& G, const Vec3& g) const { return G + share_a_ * g; }
  Vec3 xi_b(const Vec3& G, const Vec3& g) const { return G - share_b_ * g; }

  EnergyBlock energy_block(std::size_t e) const {
    EnergyBlock blk;
    blk.E = energies_[e];
    const std::size_t U = fractions_.size();
    blk.g.resize(U);
    blk.I_a.resize(U);
    blk.I_b.resize(U);
    std::vector<CollisionPair> states(U);
    std::vector<double> left(U);
    for (std::size_t u = 0; u < U; ++u) {
      states[u] = state_from_fractions(*mix_, alpha_, beta_, Vec3::Zero(), blk.E, fractions_[u].params);
      blk.g[u] = states[u].a.xi - states[u].b.xi;
      blk.I_a[u] = states[u].a.I;
      blk.I_b[u] = states[u].b.I;
      double w = fractions_[u].weight * energy_weights_[e] *
                 pair_jacobian(kind_, mu_, blk.E, fractions_[u].params.R.value_or(1.0));
      if (alpha_poly(kind_)) w *= std::pow(blk.I_a[u], (*mix_)[alpha_].internal_exponent());
      if (beta_poly(kind_)) w *= std::pow(blk.I_b[u], (*mix_)[beta_].internal_exponent());
      left[u] = w;
    }
    blk.rho.resize(U, U);
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t p = 0; p < U; ++p) {
        const CollisionEvent ev = primed_state(*mix_, states[u], fractions_[p].params);
        blk.rho(u, p) = left[u] * fractions_[p].weight * collision_weight(*model_, ev);
      }
    return blk;
  }

 private:
  const MixtureSpec* mix_;
  const CrossSectionModel* model_;
  std::size_t alpha_, beta_;
  CollisionCase kind_;
  double mu_ = 0.0, share_a_ = 0.0, share_b_ = 0.0;
  std::vector<FractionNode> fractions_;
  std::vector<CentreNode> centres_;
  std::vector<double> energies_;
  std::vector<double> energy_weights_;
};

/// Divides a density value by I^a, the internal-energy weight of species alpha.
inline double strip_internal_weight(const SpeciesSpec& sp, double value, double I) {
  if (!sp.is_polyatomic() || sp.internal_exponent() == 0.0) return value;
  return value / std::pow(I, sp.internal_exponent());
}

/// Visits every (pair, energy node, centre node) with the reduced products y_u of f at all
/// fraction nodes and the two test-function vectors of the caller.
template <class Visit>
void for_each_pair_block(const MixtureSpec& mix, const CrossSectionModel& model, const QuadratureSpec& q,
                         const DistributionFunction& f, Visit&& visit) {
  q.validate();
  for (std::size_t a = 0; a < mix.size(); ++a)
    for (std::size_t b = 0; b < mix.size(); ++b) {
      const PairEngine engine(mix, model, q, a, b);
      const std::size_t U = engine.fraction_count();
      Eigen::VectorXd y(U);
      std::vector<PhasePoint> za(U), zb(U);
      for (std::size_t e = 0; e < engine.energy_count(); ++e) {
        const PairEngine::EnergyBlock blk = engine.energy_block(e);
        for (const auto& c : engine.centres()) {
          for (std::size_t u = 0; u < U; ++u) {
            za[u] = {a, engine.xi_a(c.G, blk.g[u]), blk.I_a[u]};
            zb[u] = {b, engine.xi_b(c.G, blk.g[u]), blk.I_b[u]};
            y(u) = strip_internal_weight(mix[a], checked_density(f, za[u]), za[u].I) *
                   strip_internal_weight(mix[b], checked_density(f, zb[u]), zb[u].I);
          }
          visit(engine, blk, c.weight, y, za, zb);
        }
      }
    }
}

}  // namespace detail

/// (Q(f,f), g): sum over pairs of the integral of Lambda times g_alpha.
inline Estimate weak_form(const MixtureSpec& mix, const DistributionFunction& f, const DistributionFunction& g,
                          const CrossSectionModel& model, const QuadratureSpec& quad) {
  const auto once = [&](const QuadratureSpec& q) {
    std::vector<double> parts;
    detail::for_each_pair_block(mix, model, q, f, [&](const auto&, const auto& blk, double cw, const Eigen::VectorXd& y,
                                                      const std::vector<PhasePoint>& za, const auto&) {
      const Eigen::VectorXd gain = blk.rho * y;
      const Eigen::VectorXd out = blk.rho.rowwise().sum();
      double s = 0.0;
      for (Eigen::Index u = 0; u < y.size(); ++u) s += g(za[u]) * (gain(u) - out(u) * y(u));
      parts.push_back(cw * s);
    });
    return pairwise_sum(parts);
  };
  const double v = once(quad);
  return {v, std::abs(v - once(quad.coarsened())) + 1e-14 * std::abs(v)};
}

/// One quarter of the integral of Lambda times the collision difference of g.
inline Estimate weak_form_symmetrized(const MixtureSpec& mix, const DistributionFunction& f,
                                      const DistributionFunction& g, const CrossSectionModel& model,
                                      const QuadratureSpec& quad) {
  const auto once = [&](const QuadratureSpec& q) {
    std::vector<double> parts;
    std::vector<double> gamma;
    detail::for_each_pair_block(mix, model, q, f, [&](const auto&, const auto& blk, double cw, const Eigen::VectorXd& y,
                                                      const std::vector<PhasePoint>& za,
                                                      const std::vector<PhasePoint>& zb) {
      const std::size_t U = za.size();
      gamma.resize(U);
      for (std::size_t u = 0; u < U; ++u) gamma[u] = g(za[u]) + g(zb[u]);
      double s = 0.0;
      for (std::size_t u = 0; u < U; ++u)
        for (std::size_t p = 0; p < U; ++p) s += blk.rho(u, p) * (y(p) - y(u)) * (gamma[u] - gamma[p]);
      parts.push_back(0.25 * cw * s);
    });
    return pairwise_sum(parts);
  };
  const double v = once(quad);
  return {v, std::abs(v - once(quad.coarsened())) + 1e-14 * std::abs(v)};
}

/// Entropy production (Q(f,f), log(f / I^a)). Each collision contributes
/// -(x - y)(log x - log y) / 4 with x, y the reduced products after and before, so the
/// discrete value is never positive.
inline Estimate entropy_production(const MixtureSpec& mix, const DistributionFunction& f,
                                   const CrossSectionModel& model, const QuadratureSpec& quad) {
  const auto once = [&](const QuadratureSpec& q) {
    std::vector<double> parts;
    std::vector<double> logs;
    detail::for_each_pair_block(mix, model, q, f, [&](const auto&, const auto& blk, double cw, const Eigen::VectorXd& y,
                                                      const std::vector<PhasePoint>& za, const auto&) {
      const std::size_t U = za.size();
      logs.resize(U);
      for (std::size_t u = 0; u < U; ++u) {
        if (!(y(u) > 0.0))
          throw DomainError("entropy production needs a strictly positive distribution (species " +
                            std::to_string(za[u].species) + ")");
        logs[u] = std::log(y(u));
      }
      double s = 0.0;
      for (std::size_t u = 0; u < U; ++u)
        for (std::size_t p = 0; p < U; ++p) s -= blk.rho(u, p) * (y(p) - y(u)) * (logs[p] - logs[u]);
      parts.push_back(0.25 * cw * s);
    });
    return pairwise_sum(parts);
  };
  const double v = once(quad);
  return {v, std::abs(v - once(quad.coarsened())) + 1e-14 * std::abs(v)};
}

/// Largest relative asymmetry of the discrete pair measure rho under exchange of the two
/// fraction sets, over every pair and energy node. Zero up to rounding when the Jacobian and
/// the cross section satisfy microreversibility.
inline double pair_measure_asymmetry(const MixtureSpec& mix, const CrossSectionModel& model,
                                     const QuadratureSpec& quad) {
  double worst = 0.0;
  for (std::size_t a = 0; a < mix.size(); ++a)
    for (std::size_t b = 0; b < mix.size(); ++b) {
      const detail::PairEngine engine(mix, model, quad, a, b);
      for (std::size_t e = 0; e < engine.energy_count(); ++e) {
        const auto blk = engine.energy_block(e);
        const double scale = blk.rho.cwiseAbs().maxCoeff();
        if (scale > 0.0) worst = std::max(worst, (blk.rho - blk.rho.transpose()).cwiseAbs().maxCoeff() / scale);
      }
    }
  return worst;
}

}  // namespace boltzmix
