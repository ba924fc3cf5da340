#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "boltzmix/error.hpp"
#include "boltzmix/quadrature.hpp"

namespace boltzmix {

using Vec3 = Eigen::Vector3d;

enum class SpeciesKind { monatomic, polyatomic };

/// One species: mass, kind, internal degrees of freedom and number density.
struct SpeciesSpec {
  double mass = 1.0;
  SpeciesKind kind = SpeciesKind::monatomic;
  double dof = 2.0;
  double number_density = 1.0;

  static SpeciesSpec monatomic(double mass, double density = 1.0) {
    return {mass, SpeciesKind::monatomic, 2.0, density};
  }
  static SpeciesSpec polyatomic(double mass, double dof, double density = 1.0) {
    return {mass, SpeciesKind::polyatomic, dof, density};
  }

  bool is_polyatomic() const { return kind == SpeciesKind::polyatomic; }
  /// Exponent of the internal-energy weight, dof/2 - 1 (zero for monatomic species).
  double internal_exponent() const { return is_polyatomic() ? 0.5 * dof - 1.0 : 0.0; }

  void validate() const {
    detail::require(mass > 0 && std::isfinite(mass), "species mass must be positive");
    detail::require(number_density > 0 && std::isfinite(number_density), "number density must be positive");
    detail::require(dof >= 2.0 && std::isfinite(dof), "internal degrees of freedom must be at least 2");
    detail::require(is_polyatomic() || dof == 2.0, "monatomic species carry dof = 2");
  }
};

/// Ordered species list with all monatomic species first. Indices are 0-based.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<SpeciesSpec> species) : species_(std::move(species)) {
    detail::require(!species_.empty(), "a mixture needs at least one species");
    bool seen_poly = false;
    for (const SpeciesSpec& sp : species_) {
      sp.validate();
      if (sp.is_polyatomic()) {
        seen_poly = true;
      } else {
        detail::require(!seen_poly, "monatomic species must precede polyatomic species");
        ++s0_;
      }
    }
  }

  std::size_t size() const { return species_.size(); }
  std::size_t s0() const { return s0_; }
  std::size_t s1() const { return species_.size() - s0_; }
  const SpeciesSpec& operator[](std::size_t alpha) const { return species_.at(alpha); }
  const std::vector<SpeciesSpec>& species() const { return species_; }

  std::vector<double> densities() const {
    std::vector<double> n;
    for (const SpeciesSpec& sp : species_) n.push_back(sp.number_density);
    return n;
  }

 private:
  std::vector<SpeciesSpec> species_;
  std::size_t s0_ = 0;
};

/// A single particle state. The internal energy is ignored for monatomic species.
struct PhasePoint {
  std::size_t species = 0;
  Vec3 xi = Vec3::Zero();
  double I = 0.0;
};

/// Per-species scalar fields f_alpha(xi, I), evaluated through callables.
class DistributionFunction {
 public:
  using Component = std::function<double(const Vec3&, double)>;

  DistributionFunction() = default;
  explicit DistributionFunction(std::vector<Component> components) : components_(std::move(components)) {}

  static DistributionFunction zero(std::size_t species) {
    return DistributionFunction(std::vector<Component>(species, [](const Vec3&, double) { return 0.0; }));
  }

  std::size_t species_count() const { return components_.size(); }

  double operator()(std::size_t alpha, const Vec3& xi, double I) const { return components_[alpha](xi, I); }
  double operator()(const PhasePoint& z) const { return components_[z.species](z.xi, z.I); }

  const Component& component(std::size_t alpha) const { return components_.at(alpha); }

  /// Pointwise combination of two fields with matching species counts.
  template <class Op>
  static DistributionFunction combine(const DistributionFunction& f, const DistributionFunction& g, Op op) {
    detail::require(f.species_count() == g.species_count(), "species counts differ");
    std::vector<Component> out;
    for (std::size_t a = 0; a < f.species_count(); ++a) {
      out.push_back([fa = f.components_[a], ga = g.components_[a], op](const Vec3& xi, double I) {
        return op(fa(xi, I), ga(xi, I));
      });
    }
    return DistributionFunction(std::move(out));
  }

  friend DistributionFunction operator+(const DistributionFunction& f, const DistributionFunction& g) {
    return combine(f, g, std::plus<>{});
  }
  friend DistributionFunction operator-(const DistributionFunction& f, const DistributionFunction& g) {
    return combine(f, g, std::minus<>{});
  }
  friend DistributionFunction operator*(const DistributionFunction& f, const DistributionFunction& g) {
    return combine(f, g, std::multiplies<>{});
  }
  friend DistributionFunction operator*(double a, const DistributionFunction& f) {
    std::vector<Component> out;
    for (const Component& c : f.components_)
      out.push_back([c, a](const Vec3& xi, double I) { return a * c(xi, I); });
    return DistributionFunction(std::move(out));
  }

 private:
  std::vector<Component> components_;
};

/// Maxwellian component with density n, drift u and temperature T (k_B = 1).
inline double maxwellian_value(const SpeciesSpec& sp, double n, const Vec3& u, double T, const Vec3& xi,
                               double I) {
  const double m = sp.mass;
  const double v2 = (xi - u).squaredNorm();
  const double base = n * std::pow(m / (2.0 * std::numbers::pi * T), 1.5);
  if (!sp.is_polyatomic()) return base * std::exp(-m * v2 / (2.0 * T));
  const double a = sp.internal_exponent();
  return base * std::pow(I, a) * std::exp(-(m * v2 + 2.0 * I) / (2.0 * T)) /
         (std::pow(T, a + 1.0) * std::tgamma(a + 1.0));
}

inline DistributionFunction maxwellian(const MixtureSpec& mix, const std::vector<double>& n, const Vec3& u,
                                       double T) {
  detail::require(n.size() == mix.size(), "one density per species is required");
  detail::require(T > 0 && std::isfinite(T), "temperature must be positive");
  std::vector<DistributionFunction::Component> comps;
  for (std::size_t a = 0; a < mix.size(); ++a) {
    detail::require(n[a] > 0 && std::isfinite(n[a]), "densities must be positive");
    comps.push_back([sp = mix[a], na = n[a], u, T](const Vec3& xi, double I) {
      return maxwellian_value(sp, na, u, T, xi, I);
    });
  }
  return DistributionFunction(std::move(comps));
}

/// The normalized equilibrium of the linearization: species densities, u = 0, T = 1.
inline DistributionFunction standard_maxwellian(const MixtureSpec& mix) {
  return maxwellian(mix, mix.densities(), Vec3::Zero(), 1.0);
}

/// The s+4 generators e_1..e_s, m xi_x, m xi_y, m xi_z, m|xi|^2 + 2I (I dropped for monatomic).
inline std::vector<DistributionFunction> collision_invariants(const MixtureSpec& mix) {
  using C = DistributionFunction::Component;
  std::vector<DistributionFunction> out;
  for (std::size_t b = 0; b < mix.size(); ++b) {
    std::vector<C> comps;
    for (std::size_t a = 0; a < mix.size(); ++a)
      comps.push_back([hit = a == b](const Vec3&, double) { return hit ? 1.0 : 0.0; });
    out.emplace_back(std::move(comps));
  }
  for (int k = 0; k < 3; ++k) {
    std::vector<C> comps;
    for (std::size_t a = 0; a < mix.size(); ++a)
      comps.push_back([m = mix[a].mass, k](const Vec3& xi, double) { return m * xi(k); });
    out.emplace_back(std::move(comps));
  }
  std::vector<C> energy;
  for (std::size_t a = 0; a < mix.size(); ++a)
    energy.push_back([m = mix[a].mass, poly = mix[a].is_polyatomic()](const Vec3& xi, double I) {
      return m * xi.squaredNorm() + (poly ? 2.0 * I : 0.0);
    });
  out.emplace_back(std::move(energy));
  return out;
}

/// Integrate F(alpha, xi, I) over the phase space of one species with a Lebesgue-measure
/// tensor rule (velocity Hermite, and Laguerre in I for polyatomic species).
template <class F>
Estimate integrate_species(const MixtureSpec& mix, std::size_t alpha, const QuadratureSpec& quad, F&& fn) {
  QuadratureSpec q = quad;
  q.velocity_scale = quad.velocity_scale / std::sqrt(mix[alpha].mass);
  const NodeSet vel = build_rule(q, Domain::velocity3, Measure::lebesgue);
  const auto at = [&](std::span<const double> x) {
    return fn(Vec3(x[0], x[1], x[2]), x.size() > 3 ? x[3] : 0.0);
  };
  const auto label = [&](std::span<const double> x) {
    const double v = at(x);
    if (!std::isfinite(v))
      throw QuadratureError("non-finite value for species " + std::to_string(alpha) + " at " +
                            detail::describe_node(x));
    return v;
  };
  if (!mix[alpha].is_polyatomic()) return integrate(vel, label);
  return integrate(tensor(vel, build_rule(q, Domain::energy, Measure::lebesgue)), label);
}

/// Sum over species of the integral of f_alpha g_alpha.
inline double inner_product(const MixtureSpec& mix, const DistributionFunction& f, const DistributionFunction& g,
                            const QuadratureSpec& quad) {
  double total = 0.0;
  for (std::size_t a = 0; a < mix.size(); ++a)
    total += integrate_species(mix, a, quad, [&](const Vec3& xi, double I) { return f(a, xi, I) * g(a, xi, I); })
                 .value;
  return total;
}

/// Densities, mass-averaged velocity and temperature recovered from f by quadrature.
struct Moments {
  std::vector<double> n;
  double rho = 0.0;
  Vec3 u = Vec3::Zero();
  double T = 0.0;
};

inline Moments macroscopic_moments(const MixtureSpec& mix, const DistributionFunction& f,
                                   const QuadratureSpec& quad) {
  Moments mo;
  Vec3 momentum = Vec3::Zero();
  for (std::size_t a = 0; a < mix.size(); ++a) {
    const double na = integrate_species(mix, a, quad, [&](const Vec3& xi, double I) { return f(a, xi, I); }).value;
    mo.n.push_back(na);
    mo.rho += mix[a].mass * na;
    for (int k = 0; k < 3; ++k)
      momentum(k) += integrate_species(mix, a, quad, [&](const Vec3& xi, double I) {
                       return mix[a].mass * xi(k) * f(a, xi, I);
                     }).value;
  }
  mo.u = momentum / mo.rho;
  double thermal = 0.0, n_total = 0.0;
  for (std::size_t a = 0; a < mix.size(); ++a) {
    n_total += mo.n[a];
    thermal += integrate_species(mix, a, quad, [&](const Vec3& xi, double I) {
                 return mix[a].mass * (xi - mo.u).squaredNorm() * f(a, xi, I);
               }).value;
  }
  mo.T = thermal / (3.0 * n_total);
  return mo;
}

}  // namespace boltzmix
