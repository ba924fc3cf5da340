#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "boltzmix/collision_operator.hpp"
#include "boltzmix/parallel.hpp"

namespace boltzmix {

/// Mixture, model and rules around the normalized Maxwellian (species densities, u = 0, T = 1).
struct LinearizationContext {
  MixtureSpec mixture;
  CrossSectionModel model;
  QuadratureSpec quad;
  DistributionFunction M;

  LinearizationContext(MixtureSpec mix, CrossSectionModel mdl, QuadratureSpec q)
      : mixture(std::move(mix)), model(std::move(mdl)), quad(q), M(standard_maxwellian(mixture)) {
    detail::require(model.species_count() == mixture.size(), "model and mixture species counts differ");
    quad.validate();
  }

  double maxwellian_at(const PhasePoint& z) const { return M(z); }
};

namespace detail {

inline double nu_once(const LinearizationContext& ctx, const PhasePoint& z, QuadratureSpec q) {
  // The integrand depends on the partner only through |xi_*|, |g| and I_*, so it is
  // axisymmetric about xi and one azimuth node is exact.
  q.azimuth_order = 1;
  double total = 0.0;
  for (std::size_t beta = 0; beta < ctx.mixture.size(); ++beta)
    total += partner_integral(ctx.mixture, z, beta, q, !ctx.model.angle_independent(), [&](const PhasePoint& zb) {
      const double mb = ctx.M(zb);
      return [&ctx, mb](const CollisionEvent& ev) { return collision_weight(ctx.model, ev) * mb; };
    });
  return total;
}

}  // namespace detail

/// Collision frequency nu_alpha at z with a nested-rule error estimate.
inline Estimate nu_estimate(const LinearizationContext& ctx, const PhasePoint& z) {
  const double v = detail::nu_once(ctx, z, ctx.quad);
  return {v, std::abs(v - detail::nu_once(ctx, z, ctx.quad.coarsened()))};
}

inline double nu(const LinearizationContext& ctx, const PhasePoint& z) { return detail::nu_once(ctx, z, ctx.quad); }

/// Independent Monte Carlo estimate of nu_alpha(z) in the reduced form
///   sum_beta int M_beta* |g| sigma 1{I' + I'_* < E} dxi_* dI_* dI' dI'_* domega,
/// sampling the partner from its Maxwellian and (I', I'_*) uniformly on the energy simplex.
inline Estimate nu_mc(const LinearizationContext& ctx, const PhasePoint& z, std::size_t samples,
                      std::uint64_t seed) {
  Estimate total;
  double var = 0.0;
  for (std::size_t beta = 0; beta < ctx.mixture.size(); ++beta) {
    const SpeciesSpec& sb = ctx.mixture[beta];
    const CollisionCase kind = collision_case(ctx.mixture, z.species, beta);
    const Estimate part = monte_carlo(samples, seed + 104729 * beta, [&](std::mt19937_64& rng) {
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(sb.mass));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const Vec3 xs(normal(rng), normal(rng), normal(rng));
      double Is = 0.0;
      if (sb.is_polyatomic()) Is = std::gamma_distribution<double>(sb.internal_exponent() + 1.0, 1.0)(rng);
      const CollisionPair pair{z, {beta, xs, Is}};
      const double E = total_energy(ctx.mixture, pair);
      double Ip = 0.0, Ips = 0.0, measure = 1.0;
      switch (kind) {
        case CollisionCase::mono_mono: break;
        case CollisionCase::mono_poly:
          Ips = E * unit(rng);
          measure = E;
          break;
        case CollisionCase::poly_mono:
          Ip = E * unit(rng);
          measure = E;
          break;
        case CollisionCase::poly_poly: {
          double u1 = unit(rng), u2 = unit(rng);
          if (u1 + u2 > 1.0) {
            u1 = 1.0 - u1;
            u2 = 1.0 - u2;
          }
          Ip = E * u1;
          Ips = E * u2;
          measure = 0.5 * E * E;
          break;
        }
      }
      const auto dir = uniform_direction(rng);
      CollisionParams p;
      p.omega = Vec3(dir[0], dir[1], dir[2]);
      if (uses_R(kind)) p.R = std::clamp(1.0 - (Ip + Ips) / E, 0.0, 1.0);
      if (uses_r(kind)) p.r = Ip + Ips > 0.0 ? Ip / (Ip + Ips) : 0.5;
      const CollisionEvent ev = primed_state(ctx.mixture, pair, p);
      if (ev.g_prime_norm <= 0.0) return 0.0;
      return sb.number_density * 4.0 * std::numbers::pi * measure * ev.g_norm * sigma(ctx.model, ev).value;
    });
    total.value += part.value;
    var += part.error * part.error;
  }
  total.error = std::sqrt(var);
  return total;
}

/// M^{1/2} h as a distribution.
inline DistributionFunction half_weighted(const LinearizationContext& ctx, const DistributionFunction& h) {
  std::vector<DistributionFunction::Component> comps;
  for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
    comps.push_back([&ctx, ha = h.component(a), a](const Vec3& xi, double I) {
      return std::sqrt(ctx.M(a, xi, I)) * ha(xi, I);
    });
  return DistributionFunction(std::move(comps));
}

/// L h at z through the bilinear collision operator: -M^{-1/2} (Q(M, M^{1/2}h) + Q(M^{1/2}h, M)).
inline Estimate l_apply(const LinearizationContext& ctx, const DistributionFunction& h, const PhasePoint& z) {
  const Estimate q = bilinear_q(ctx.mixture, ctx.M, half_weighted(ctx, h), z, ctx.model, ctx.quad);
  const double root = std::sqrt(ctx.M(z));
  return {-q.value / root, q.error / root};
}

/// K h = nu h - L h at z.
inline Estimate k_apply(const LinearizationContext& ctx, const DistributionFunction& h, const PhasePoint& z) {
  const Estimate l = l_apply(ctx, h, z);
  const Estimate n = nu_estimate(ctx, z);
  const double hz = h(z);
  return {n.value * hz - l.value, n.error * std::abs(hz) + l.error};
}

/// Gain part of K at z alone:
///   M^{-1/2} sum_beta int weight (M' (M^{1/2}h)'_* + (M^{1/2}h)' M'_*) I^a I_*^b / (I'^a I'_*^b).
inline Estimate k_gain_apply(const LinearizationContext& ctx, const DistributionFunction& h, const PhasePoint& z) {
  const DistributionFunction s = half_weighted(ctx, h);
  const auto once = [&](const QuadratureSpec& q) {
    double total = 0.0;
    for (std::size_t beta = 0; beta < ctx.mixture.size(); ++beta)
      total += detail::partner_integral(ctx.mixture, z, beta, q, true, [&](const PhasePoint&) {
        return [&](const CollisionEvent& ev) {
          const double gain = ctx.M(ev.primed_a) * s(ev.primed_b) + s(ev.primed_a) * ctx.M(ev.primed_b);
          return collision_weight(ctx.model, ev) * gain * detail::internal_ratio(ev);
        };
      });
    return total / std::sqrt(ctx.M(z));
  };
  const double v = once(ctx.quad);
  return {v, std::abs(v - once(ctx.quad.coarsened()))};
}

/// Loss-part kernel k_ab1(zeta, zeta_*) = (M_a M_b*)^{1/2} |g| int sigma domega dI' dI'_*,
/// the internal-energy integral running over I' + I'_* < E for the polyatomic participants.
/// At |g| = 0 the product |g| sigma is evaluated in its finite cancelled form.
inline double k1_kernel(const LinearizationContext& ctx, const PhasePoint& zeta, const PhasePoint& zeta_star) {
  const MixtureSpec& mix = ctx.mixture;
  const CollisionCase kind = collision_case(mix, zeta.species, zeta_star.species);
  const CollisionPair pair{zeta, zeta_star};
  const double E = total_energy(mix, pair);
  const double root = std::sqrt(ctx.M(zeta) * ctx.M(zeta_star));
  const double sphere = 4.0 * std::numbers::pi;  // the cross section does not depend on omega
  const auto flux = [&](const CollisionEvent& ev) {
    return ev.g_norm > 0.0 ? ev.g_norm * sigma(ctx.model, ev).value : relative_flux(ctx.model, ev);
  };
  if (kind == CollisionCase::mono_mono) return root * sphere * flux(primed_state(mix, pair, {}));
  if (E <= 0.0) return 0.0;
  // Substitutions removing the square-root endpoint behaviour of |g'|: the kinetic share left
  // after I' is v^2, after I'_* it is s^2 of the remainder.
  const Rule1D vs = gauss_legendre(std::max(ctx.quad.legendre_R, 8));
  const Rule1D ss = uses_r(kind) ? gauss_legendre(std::max(ctx.quad.legendre_r, 8)) : Rule1D{{0.0}, {1.0}};
  double total = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double v = vs.nodes[i];
    for (std::size_t j = 0; j < ss.size(); ++j) {
      const double s = ss.nodes[j];
      double Ip = 0.0, Ips = 0.0, jac = 0.0;
      switch (kind) {
        case CollisionCase::mono_poly:
          Ips = E * (1.0 - v * v);
          jac = 2.0 * E * v;
          break;
        case CollisionCase::poly_mono:
          Ip = E * (1.0 - v * v);
          jac = 2.0 * E * v;
          break;
        default:
          Ip = E * (1.0 - v * v);
          Ips = E * v * v * (1.0 - s * s);
          jac = 4.0 * E * E * v * v * v * s;
          break;
      }
      CollisionParams p;
      p.R = std::clamp(1.0 - (Ip + Ips) / E, 0.0, 1.0);
      if (uses_r(kind)) p.r = Ip + Ips > 0.0 ? std::clamp(Ip / (Ip + Ips), 0.0, 1.0) : 0.5;
      const CollisionEvent ev = primed_state(mix, pair, p);
      if (ev.g_prime_norm <= 0.0) continue;
      total += vs.weights[i] * ss.weights[j] * jac * flux(ev);
    }
  }
  return root * sphere * total;
}

/// Loss part of K at z through the kernel: int k1(z, zeta_*) h(zeta_*) dzeta_*, summed over partners.
inline double k_loss_via_kernel(const LinearizationContext& ctx, const DistributionFunction& h, const PhasePoint& z) {
  QuadratureSpec q = ctx.quad;
  double total = 0.0;
  for (std::size_t beta = 0; beta < ctx.mixture.size(); ++beta) {
    std::vector<double> terms;
    for (const detail::PartnerNode& pn : detail::partner_nodes(ctx.mixture, beta, z.xi, q)) {
      const PhasePoint zb{beta, pn.xi, pn.I};
      terms.push_back(pn.weight * k1_kernel(ctx, z, zb) * h(zb));
    }
    total += pairwise_sum(terms);
  }
  return total;
}

/// Integral of k_ab1^2 over |G| <= T, |g| <= T and internal energies up to T^2, in
/// centre-of-mass and relative coordinates. The panels are nested under doubling of T, so
/// successive values differ only by the added region.
inline double hs_norm_k1(const LinearizationContext& ctx, std::size_t alpha, std::size_t beta, double truncation) {
  detail::require(truncation > 0.0, "truncation radius must be positive");
  const MixtureSpec& mix = ctx.mixture;
  const double ma = mix[alpha].mass, mb = mix[beta].mass, M = ma + mb;
  constexpr int n_panel = 6;

  std::vector<double> vbreaks{0.0};
  while (vbreaks.back() < truncation) vbreaks.push_back(std::min(truncation, vbreaks.back() + 0.5));
  const Rule1D radial = composite_legendre(vbreaks, n_panel);

  std::vector<double> ebreaks{0.0, 0.25, 0.5};
  const double emax = truncation * truncation;
  while (ebreaks.back() < emax) ebreaks.push_back(std::min(emax, 2.0 * ebreaks.back()));
  const Rule1D energy = composite_legendre(ebreaks, n_panel);
  const Rule1D none{{0.0}, {1.0}};
  const Rule1D& ia = mix[alpha].is_polyatomic() ? energy : none;
  const Rule1D& ib = mix[beta].is_polyatomic() ? energy : none;

  // (M_a M_b*)^{1/2} squared carries exp(-M|G|^2/2); the rest is evaluated at G = 0.
  double centre = 0.0;
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.nodes[i];
    centre += radial.weights[i] * 4.0 * std::numbers::pi * r * r * std::exp(-0.5 * M * r * r);
  }
  std::vector<double> rows(radial.size());
  parallel_for(radial.size(), [&](std::size_t i) {
    const double g = radial.nodes[i];
    const Vec3 gv(g, 0.0, 0.0);
    std::vector<double> terms;
    for (std::size_t j = 0; j < ia.size(); ++j)
      for (std::size_t k = 0; k < ib.size(); ++k) {
        const PhasePoint za{alpha, (mb / M) * gv, ia.nodes[j]};
        const PhasePoint zb{beta, -(ma / M) * gv, ib.nodes[k]};
        const double kv = k1_kernel(ctx, za, zb);
        terms.push_back(ia.weights[j] * ib.weights[k] * kv * kv);
      }
    rows[i] = radial.weights[i] * 4.0 * std::numbers::pi * g * g * pairwise_sum(terms);
  });
  return centre * pairwise_sum(rows);
}

/// Tensor-product basis per species: orthonormal Hermite polynomials in sqrt(m) xi_k times
/// orthonormal Laguerre polynomials of parameter dof/2 - 1 in I, with weighted degree
/// |k| + 2l <= order, divided by sqrt(n_alpha). Multiplied by M^{1/2} this is orthonormal
/// in the weighted Hilbert space.
struct BasisFunction {
  std::size_t species = 0;
  std::array<int, 3> k{0, 0, 0};
  int l = 0;
};

class GalerkinBasis {
 public:
  GalerkinBasis(const MixtureSpec& mix, int order) : mix_(&mix), order_(order) {
    detail::require(order >= 2, "basis order must be at least 2 to contain the collision invariants");
    detail::require(order <= 24, "basis order above 24 is not supported");
    for (std::size_t a = 0; a < mix.size(); ++a) {
      offsets_.push_back(functions_.size());
      const int lmax = mix[a].is_polyatomic() ? order / 2 : 0;
      for (int l = 0; l <= lmax; ++l)
        for (int total = 0; total + 2 * l <= order; ++total)
          for (int k1 = total; k1 >= 0; --k1)
            for (int k2 = total - k1; k2 >= 0; --k2) functions_.push_back({a, {k1, k2, total - k1 - k2}, l});
      counts_.push_back(functions_.size() - offsets_.back());
    }
  }

  int order() const { return order_; }
  std::size_t size() const { return functions_.size(); }
  std::size_t offset(std::size_t alpha) const { return offsets_[alpha]; }
  std::size_t count(std::size_t alpha) const { return counts_[alpha]; }
  const BasisFunction& operator[](std::size_t i) const { return functions_[i]; }

  /// Values p_i(xi, I) of the functions of species alpha, in basis order.
  void evaluate(std::size_t alpha, const Vec3& xi, double I, double* out) const {
    const SpeciesSpec& sp = (*mix_)[alpha];
    const double sm = std::sqrt(sp.mass);
    double h[3][32];
    for (int ax = 0; ax < 3; ++ax) {
      const double x = sm * xi(ax);
      h[ax][0] = 1.0;
      if (order_ >= 1) h[ax][1] = x;
      for (int n = 1; n < order_; ++n) h[ax][n + 1] = (x * h[ax][n] - std::sqrt(double(n)) * h[ax][n - 1]) / std::sqrt(n + 1.0);
    }
    double lag[32];
    const int lmax = sp.is_polyatomic() ? order_ / 2 : 0;
    const double a = sp.internal_exponent();
    lag[0] = 1.0;
    if (lmax >= 1) {
      // Orthonormal Laguerre polynomials for the density I^a e^{-I} / Gamma(a+1).
      double Lm = 1.0, L = 1.0 + a - I;
      lag[1] = L / std::sqrt(a + 1.0);
      double norm = std::sqrt(a + 1.0);
      for (int n = 1; n < lmax; ++n) {
        const double Ln = ((2.0 * n + 1.0 + a - I) * L - (n + a) * Lm) / (n + 1.0);
        Lm = L;
        L = Ln;
        norm *= std::sqrt((n + 1.0 + a) / (n + 1.0));
        lag[n + 1] = L / norm;
      }
    }
    const double scale = 1.0 / std::sqrt(sp.number_density);
    const std::size_t off = offsets_[alpha];
    for (std::size_t i = 0; i < counts_[alpha]; ++i) {
      const BasisFunction& bf = functions_[off + i];
      out[i] = scale * h[0][bf.k[0]] * h[1][bf.k[1]] * h[2][bf.k[2]] * lag[bf.l];
    }
  }

 private:
  const MixtureSpec* mix_;
  int order_;
  std::vector<BasisFunction> functions_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> counts_;
};


/// Galerkin matrices of nu, K and L on the basis M^{1/2} p_i, with the spectral analysis of L.
struct GalerkinSystem {
  GalerkinBasis basis;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd nu_matrix;
  Eigen::MatrixXd K_matrix;
  Eigen::MatrixXd L_matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;

  double norm = 0.0;              // spectral norm of L
  double asymmetry = 0.0;         // max |L - L^T| / max |L|, before symmetrization
  double gram_deviation = 0.0;    // max |gram - identity|
  double threshold = 0.0;         // kernel threshold, 1e-6 ||L||
  std::size_t kernel_count = 0;   // eigenvalues below threshold
  double gap_ratio = 0.0;         // first eigenvalue above the kernel over the threshold
  std::vector<Eigen::VectorXd> invariants;  // coefficient vectors of M^{1/2} psi
  double invariant_residual = 0.0;          // max ||L v|| / (||v|| ||L||)
  double coercivity = 0.0;  // min of (Lh, h)/(nu h, h) off the kernel
  double smallest_nonkernel = 0.0;

  double min_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
};

namespace detail {

/// sum over nodes of w F(xi, I) approximating int M_alpha F / n_alpha, with Gauss rules exact
/// for polynomials of degree below 2 * points in each variable.
template <class F>
void maxwellian_nodes(const SpeciesSpec& sp, int points, F&& visit) {
  const Rule1D h = gauss_hermite(points);
  const double s = std::numbers::sqrt2 / std::sqrt(sp.mass);
  const double hn = std::pow(std::numbers::pi, -1.5);
  Rule1D lag{{0.0}, {1.0}};
  if (sp.is_polyatomic()) {
    lag = gauss_laguerre(points, sp.internal_exponent());
    for (double& w : lag.weights) w /= std::tgamma(sp.internal_exponent() + 1.0);
  }
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j)
      for (std::size_t k = 0; k < h.size(); ++k)
        for (std::size_t l = 0; l < lag.size(); ++l)
          visit(Vec3(s * h.nodes[i], s * h.nodes[j], s * h.nodes[k]), lag.nodes[l],
                hn * h.weights[i] * h.weights[j] * h.weights[k] * lag.weights[l]);
}

/// Gram matrix sum_alpha int M_alpha p_i p_j.
inline Eigen::MatrixXd basis_gram(const LinearizationContext& ctx, const GalerkinBasis& basis) {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t a = 0; a < ctx.mixture.size(); ++a) {
    const std::size_t off = basis.offset(a), n = basis.count(a);
    Eigen::VectorXd v(n);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
    maxwellian_nodes(ctx.mixture[a], basis.order() + 1, [&](const Vec3& xi, double I, double w) {
      basis.evaluate(a, xi, I, v.data());
      block.noalias() += w * v * v.transpose();
    });
    gram.block(off, off, n, n) = ctx.mixture[a].number_density * block;
  }
  return gram;
}

/// Coefficients sum_alpha int M_alpha psi_alpha p_i of the invariant psi.
inline Eigen::VectorXd project_onto_basis(const LinearizationContext& ctx, const GalerkinBasis& basis,
                                          const DistributionFunction& psi) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t a = 0; a < ctx.mixture.size(); ++a) {
    const std::size_t off = basis.offset(a), n = basis.count(a);
    Eigen::VectorXd v(n);
    maxwellian_nodes(ctx.mixture[a], basis.order() + 2, [&](const Vec3& xi, double I, double w) {
      basis.evaluate(a, xi, I, v.data());
      c.segment(off, n) += (ctx.mixture[a].number_density * w * psi(a, xi, I)) * v;
    });
  }
  return c;
}

/// M_alpha M_beta* / (I^a I_*^b) at centre G and collision energy E, constant over the
/// collision fractions.
inline double reduced_maxwellian_product(const MixtureSpec& mix, std::size_t a, std::size_t b, const Vec3& G,
                                         double E) {
  const SpeciesSpec &sa = mix[a], &sb = mix[b];
  const double M = sa.mass + sb.mass;
  const double two_pi = 2.0 * std::numbers::pi;
  return sa.number_density * sb.number_density * std::pow(sa.mass * sb.mass / (two_pi * two_pi), 1.5) /
         (std::tgamma(sa.internal_exponent() + 1.0) * std::tgamma(sb.internal_exponent() + 1.0)) *
         std::exp(-0.5 * M * G.squaredNorm() - E);
}

struct PairContribution {
  Eigen::MatrixXd L;
  Eigen::MatrixXd nu;
};

/// L and nu contributions of the ordered pair (a, b) at one energy node, on the local index
/// set [species a functions, species b functions] (just species a when a = b).
inline PairContribution pair_energy_contribution(const LinearizationContext& ctx, const GalerkinBasis& basis,
                                                 const PairEngine& engine, std::size_t e) {
  const std::size_t a = engine.alpha(), b = engine.beta();
  const std::size_t na = basis.count(a), nb = a == b ? 0 : basis.count(b);
  const std::size_t n = na + nb;
  const PairEngine::EnergyBlock blk = engine.energy_block(e);
  const std::size_t U = blk.g.size();
  const Eigen::MatrixXd S = blk.rho + blk.rho.transpose();
  const Eigen::VectorXd d = S.rowwise().sum();
  const Eigen::VectorXd out = blk.rho.rowwise().sum();
  Eigen::MatrixXd B = -S;
  B.diagonal() += d;

  PairContribution pc{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(na, na)};
  Eigen::MatrixXd A(n, U), Pa(na, U);
  Eigen::VectorXd va(na), vb(basis.count(b));
  for (const auto& c : engine.centres()) {
    for (std::size_t u = 0; u < U; ++u) {
      basis.evaluate(a, engine.xi_a(c.G, blk.g[u]), blk.I_a[u], va.data());
      basis.evaluate(b, engine.xi_b(c.G, blk.g[u]), blk.I_b[u], vb.data());
      Pa.col(u) = va;
      if (a == b) {
        A.col(u) = va + vb;
      } else {
        A.col(u).head(na) = va;
        A.col(u).tail(nb) = vb;
      }
    }
    const double y0 = c.weight * reduced_maxwellian_product(ctx.mixture, a, b, c.G, blk.E);
    const Eigen::MatrixXd AB = A * B;
    pc.L.noalias() += (0.25 * y0) * AB * A.transpose();
    pc.nu.noalias() += y0 * Pa * out.asDiagonal() * Pa.transpose();
  }
  return pc;
}

}  // namespace detail

/// Assembles L from the symmetrized pair quadrature, (Lh, g) = 1/4 sum int Delta(h) Delta(g) M M_*,
/// together with nu and K = nu - L, and analyses the spectrum of L.
inline GalerkinSystem galerkin_assemble(const LinearizationContext& ctx, int basis_order) {
  GalerkinSystem sys{GalerkinBasis(ctx.mixture, basis_order)};
  const GalerkinBasis& basis = sys.basis;
  const std::size_t N = basis.size();
  sys.gram = detail::basis_gram(ctx, basis);
  sys.gram_deviation = (sys.gram - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(sys.gram, Eigen::EigenvaluesOnly);
  if (!(gram_eig.eigenvalues().minCoeff() > 1e-8 * gram_eig.eigenvalues().maxCoeff()))
    throw ParameterError("basis Gram matrix is numerically rank deficient");

  sys.L_matrix = Eigen::MatrixXd::Zero(N, N);
  sys.nu_matrix = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
    for (std::size_t b = 0; b < ctx.mixture.size(); ++b) {
      const detail::PairEngine engine(ctx.mixture, ctx.model, ctx.quad, a, b);
      std::vector<detail::PairContribution> parts(engine.energy_count());
      parallel_for(parts.size(), [&](std::size_t e) { parts[e] = detail::pair_energy_contribution(ctx, basis, engine, e); });
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < basis.count(a); ++i) idx.push_back(basis.offset(a) + i);
      if (a != b)
        for (std::size_t i = 0; i < basis.count(b); ++i) idx.push_back(basis.offset(b) + i);
      const std::size_t oa = basis.offset(a), na = basis.count(a);
      for (const auto& pc : parts) {
        for (std::size_t i = 0; i < idx.size(); ++i)
          for (std::size_t j = 0; j < idx.size(); ++j) sys.L_matrix(idx[i], idx[j]) += pc.L(i, j);
        sys.nu_matrix.block(oa, oa, na, na) += pc.nu;
      }
    }

  const double lmax = sys.L_matrix.cwiseAbs().maxCoeff();
  sys.asymmetry = lmax > 0.0 ? (sys.L_matrix - sys.L_matrix.transpose()).cwiseAbs().maxCoeff() / lmax : 0.0;
  const Eigen::MatrixXd Ls = 0.5 * (sys.L_matrix + sys.L_matrix.transpose());
  sys.nu_matrix = 0.5 * (sys.nu_matrix + sys.nu_matrix.transpose()).eval();
  sys.K_matrix = sys.nu_matrix - sys.L_matrix;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Ls);
  if (eig.info() != Eigen::Success) throw QuadratureError("eigen decomposition of L failed");
  sys.eigenvalues = eig.eigenvalues();
  sys.eigenvectors = eig.eigenvectors();
  sys.norm = sys.eigenvalues.cwiseAbs().maxCoeff();
  sys.threshold = 1e-6 * sys.norm;
  while (sys.kernel_count < N && sys.eigenvalues(sys.kernel_count) < sys.threshold) ++sys.kernel_count;
  if (sys.kernel_count < N) {
    sys.smallest_nonkernel = sys.eigenvalues(sys.kernel_count);
    sys.gap_ratio = sys.threshold > 0.0 ? sys.smallest_nonkernel / sys.threshold : 0.0;
  }

  for (const DistributionFunction& psi : collision_invariants(ctx.mixture)) {
    Eigen::VectorXd v = detail::project_onto_basis(ctx, basis, psi);
    const double r = sys.norm > 0.0 ? (sys.L_matrix * v).norm() / (v.norm() * sys.norm) : 0.0;
    sys.invariant_residual = std::max(sys.invariant_residual, r);
    sys.invariants.push_back(std::move(v));
  }

  // Off the numerical kernel, the smallest ratio (Lh, h) / (nu h, h).
  if (sys.kernel_count < N) {
    const Eigen::MatrixXd Q = sys.eigenvectors.rightCols(N - sys.kernel_count);
    const Eigen::MatrixXd Lc = Q.transpose() * Ls * Q;
    const Eigen::MatrixXd Nc = Q.transpose() * sys.nu_matrix * Q;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(Lc, Nc, Eigen::EigenvaluesOnly);
    if (ge.info() == Eigen::Success) sys.coercivity = ge.eigenvalues().minCoeff();
  }
  return sys;
}

/// Sum of hs_norm_k1 over every ordered species pair.
inline double hs_norm_k1(const LinearizationContext& ctx, double truncation) {
  double total = 0.0;
  for (std::size_t a = 0; a < ctx.mixture.size(); ++a)
    for (std::size_t b = 0; b < ctx.mixture.size(); ++b) total += hs_norm_k1(ctx, a, b, truncation);
  return total;
}

/// Scan grid: |xi| in [0, xi_max] and I in [0, I_max] with the given steps.
struct NuGrid {
  double xi_max = 8.0;
  double xi_step = 0.25;
  double I_max = 16.0;
  double I_step = 1.0;

  std::vector<double> xi_values() const { return values(xi_max, xi_step); }
  std::vector<double> I_values() const { return values(I_max, I_step); }

  void validate() const {
    detail::require(std::isfinite(xi_max) && xi_max > 0.0 && xi_step > 0.0 && xi_step <= xi_max,
                    "grid needs |xi| points beyond 0");
    detail::require(std::isfinite(I_max) && I_max >= 0.0 && I_step > 0.0, "grid needs nonnegative I values");
  }

 private:
  static std::vector<double> values(double max, double step) {
    std::vector<double> v;
    const long n = std::lround(std::floor(max / step + 1e-9));
    for (long i = 0; i <= n; ++i) v.push_back(i * step);
    return v;
  }
};

struct NuRow {
  std::size_t species = 0;
  double xi = 0.0;
  double I = 0.0;
  double nu = 0.0;
  double ratio = 0.0;
};

struct NuBoundReport {
  static constexpr double spread_limit = 10.0;
  static constexpr double slope_limit = 0.05;

  std::vector<NuRow> rows;
  double exponent = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double max_slope = 0.0;   // worst outer relative slope over (species, I) rows
  bool positive = true;
  bool monotone = true;     // nu nondecreasing in |xi| for |xi| >= 2

  double spread() const { return c_max / c_min; }
  bool finite() const { return std::isfinite(c_min) && std::isfinite(c_max) && c_min > 0.0; }
  bool flat() const { return max_slope <= slope_limit; }
  bool passed() const { return positive && finite() && spread() <= spread_limit && flat(); }
};

/// nu over the grid and the ratio nu / (1 + |xi| + sqrt(I))^{exponent}; the exponent
/// defaults to 1 - eta. Monatomic species have no I dependence, so their values are
/// computed once per |xi| and repeated over the I column.
inline NuBoundReport nu_bound_scan(const LinearizationContext& ctx, const NuGrid& grid,
                                   std::optional<double> exponent = std::nullopt) {
  grid.validate();
  NuBoundReport rep;
  rep.exponent = exponent.value_or(1.0 - ctx.model.eta());
  const std::vector<double> xs = grid.xi_values(), Is = grid.I_values();
  const std::size_t nx = xs.size(), nI = Is.size();

  for (std::size_t a = 0; a < ctx.mixture.size(); ++a) {
    const bool poly = ctx.mixture[a].is_polyatomic();
    const std::size_t columns = poly ? nI : 1;
    std::vector<double> values(nx * columns);
    parallel_for(values.size(), [&](std::size_t k) {
      const double x = xs[k / columns], I = poly ? Is[k % columns] : 0.0;
      values[k] = nu(ctx, {a, Vec3(x, 0.0, 0.0), I});
    });
    for (std::size_t j = 0; j < nI; ++j) {
      const std::size_t col = poly ? j : 0;
      const double weight_I = poly ? std::sqrt(Is[j]) : 0.0;
      std::vector<double> ratio(nx);
      for (std::size_t i = 0; i < nx; ++i) {
        const double v = values[i * columns + col];
        ratio[i] = v / std::pow(1.0 + xs[i] + weight_I, rep.exponent);
        rep.rows.push_back({a, xs[i], Is[j], v, ratio[i]});
        if (!(v > 0.0) || !std::isfinite(v)) rep.positive = false;
        if (i > 0 && xs[i] >= 2.0 && v < (1.0 - 1e-12) * values[(i - 1) * columns + col]) rep.monotone = false;
      }
      std::size_t i0 = 0;
      while (xs[i0] < 0.9 * xs.back()) ++i0;
      if (i0 == nx - 1 && i0 > 0) --i0;
      const double slope = std::abs(std::log(ratio.back()) - std::log(ratio[i0])) / (xs.back() - xs[i0]);
      rep.max_slope = std::max(rep.max_slope, std::isfinite(slope) ? slope : INFINITY);
    }
  }
  rep.c_min = INFINITY;
  rep.c_max = 0.0;
  for (const NuRow& r : rep.rows) {
    rep.c_min = std::min(rep.c_min, r.ratio);
    rep.c_max = std::max(rep.c_max, r.ratio);
  }
  return rep;
}

}  // namespace boltzmix
