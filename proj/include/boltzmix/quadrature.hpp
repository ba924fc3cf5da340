#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "boltzmix/error.hpp"

namespace boltzmix {

/// Orders, scalings and Monte Carlo settings shared by every integration routine.
///
/// The pointwise rules (radial/polar/azimuth) integrate over a partner velocity in
/// spherical coordinates centred at the evaluation velocity. The pair rules
/// (centre_of_mass_order, collision_energy_order) drive the symmetric collision
/// coordinates used by weak forms, entropy production and Galerkin assembly.
struct QuadratureSpec {
  int hermite_order = 24;
  int laguerre_order = 16;
  int sphere_theta = 6;
  int sphere_phi = 12;
  int legendre_R = 8;
  int legendre_r = 6;

  int radial_order = 40;
  int polar_order = 24;
  int azimuth_order = 8;
  double radial_extent = 10.0;

  int centre_of_mass_order = 5;
  int collision_energy_order = 6;

  double velocity_scale = 1.0;
  double energy_scale = 1.0;

  std::uint64_t mc_seed = 20240917;
  std::size_t mc_samples = 1'000'000;

  void validate() const {
    for (int order : {hermite_order, laguerre_order, sphere_theta, sphere_phi, legendre_R, legendre_r,
                      radial_order, polar_order, azimuth_order, centre_of_mass_order,
                      collision_energy_order}) {
      detail::require(order >= 1 && order <= 512, "quadrature orders must lie in [1, 512]");
    }
    detail::require(velocity_scale > 0 && energy_scale > 0 && radial_extent > 0,
                    "quadrature scalings must be positive");
  }

  /// Same spec with every deterministic order reduced, used for nested error estimates.
  QuadratureSpec coarsened() const;
};

/// Reduced order used as the nested companion of an n-point rule.
inline int coarse_order(int n) { return std::max(1, n - std::max(1, n / 4)); }

inline QuadratureSpec QuadratureSpec::coarsened() const {
  QuadratureSpec c = *this;
  for (int* order : {&c.hermite_order, &c.laguerre_order, &c.sphere_theta, &c.legendre_R,
                     &c.legendre_r, &c.radial_order, &c.polar_order, &c.centre_of_mass_order,
                     &c.collision_energy_order}) {
    *order = coarse_order(*order);
  }
  c.sphere_phi = std::max(2, coarse_order(sphere_phi) / 2 * 2);
  c.azimuth_order = coarse_order(azimuth_order);
  return c;
}

/// One-dimensional Gauss rule.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Value with an error estimate (nested-order difference or Monte Carlo standard error).
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Sum with pairwise reduction so the result does not depend on chunking.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {

// Golub-Welsch for the Jacobi matrix (diag a_k, off-diagonal b_k for k >= 1), then Newton
// polish of each node on the orthonormal recurrence and Christoffel weights, which keeps
// tiny tail weights accurate in a relative sense.
inline Rule1D gauss_from_recurrence(int n, const std::function<double(int)>& a,
                                    const std::function<double(int)>& b, double mu0) {
  require(n >= 1, "rule order must be positive");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) diag(k) = a(k);
  for (int k = 1; k < n; ++k) sub(k - 1) = b(k);
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw QuadratureError("Golub-Welsch eigensolve failed");
  const double p0 = 1.0 / std::sqrt(mu0);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    double sum_sq = 0.0;
    for (int iter = 0; iter < 6; ++iter) {
      double pm = 0.0, p = p0, dpm = 0.0, dp = 0.0;
      sum_sq = p * p;
      for (int k = 0; k < n; ++k) {
        const double bk = k > 0 ? b(k) : 0.0;
        const double pn = ((x - a(k)) * p - bk * pm) / b(k + 1);
        const double dpn = ((x - a(k)) * dp + p - bk * dpm) / b(k + 1);
        pm = p;
        p = pn;
        dpm = dp;
        dp = dpn;
        if (k + 1 < n) sum_sq += p * p;
      }
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    double pm = 0.0, p = p0;
    sum_sq = p * p;
    for (int k = 0; k + 1 < n; ++k) {
      const double bk = k > 0 ? b(k) : 0.0;
      const double pn = ((x - a(k)) * p - bk * pm) / b(k + 1);
      pm = p;
      p = pn;
      sum_sq += p * p;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / sum_sq;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Hermite rule for the weight e^{-x^2} on the real line.
inline Rule1D gauss_hermite(int n) {
  return detail::gauss_from_recurrence(
      n, [](int) { return 0.0; }, [](int k) { return std::sqrt(0.5 * k); }, std::sqrt(std::numbers::pi));
}

/// Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on [0, inf).
inline Rule1D gauss_laguerre(int n, double alpha = 0.0) {
  detail::require(alpha > -1.0, "Laguerre exponent must exceed -1");
  return detail::gauss_from_recurrence(
      n, [alpha](int k) { return 2.0 * k + alpha + 1.0; },
      [alpha](int k) { return std::sqrt(k * (k + alpha)); }, std::tgamma(alpha + 1.0));
}

/// Gauss-Legendre rule for the uniform weight on [lo, hi].
inline Rule1D gauss_legendre(int n, double lo = 0.0, double hi = 1.0) {
  Rule1D ref = detail::gauss_from_recurrence(
      n, [](int) { return 0.0; }, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
  const double half = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref.nodes[i] = lo + half * (ref.nodes[i] + 1.0);
    ref.weights[i] *= half;
  }
  return ref;
}

/// Rule for dR on [0,1] through R = t^2 with Gauss-Legendre in t; makes R^{1/2} factors smooth.
inline Rule1D legendre_squared(int n) {
  Rule1D t = gauss_legendre(n, 0.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.weights[i] *= 2.0 * t.nodes[i];
    t.nodes[i] *= t.nodes[i];
  }
  return t;
}

/// Gauss-Legendre panels over [0, hi] on the given breakpoints (must start at 0, increase).
inline Rule1D composite_legendre(std::span<const double> breaks, int n_per_panel) {
  Rule1D out;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const Rule1D panel = gauss_legendre(n_per_panel, breaks[p], breaks[p + 1]);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

/// Unit vectors with weights; product Gauss-Legendre in cos(theta) times uniform phi.
struct SphereRule {
  std::vector<std::array<double, 3>> directions;
  std::vector<double> weights;

  std::size_t size() const { return directions.size(); }
};

/// With an even phi count the rule is invariant under omega -> -omega.
inline SphereRule product_sphere(int n_theta, int n_phi) {
  detail::require(n_theta >= 1 && n_phi >= 1, "sphere rule orders must be positive");
  const Rule1D ct = gauss_legendre(n_theta, -1.0, 1.0);
  SphereRule s;
  for (std::size_t i = 0; i < ct.size(); ++i) {
    const double c = ct.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / n_phi;
      s.directions.push_back({st * std::cos(phi), st * std::sin(phi), c});
      s.weights.push_back(ct.weights[i] * 2.0 * std::numbers::pi / n_phi);
    }
  }
  return s;
}

enum class Domain { velocity3, energy, sphere, unit_interval };
enum class Measure { natural, lebesgue };

/// Flat list of nodes and weights on a (possibly composite) domain. The coarse companion,
/// when present, is the same construction at reduced orders.
struct NodeSet {
  int dim = 0;
  std::vector<double> coords;
  std::vector<double> weights;
  std::shared_ptr<const NodeSet> coarse;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
};

namespace detail {

inline NodeSet build_single(const QuadratureSpec& spec, Domain domain, Measure measure) {
  NodeSet set;
  switch (domain) {
    case Domain::velocity3: {
      const Rule1D h = gauss_hermite(spec.hermite_order);
      const double scale = std::numbers::sqrt2 * spec.velocity_scale;
      set.dim = 3;
      for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j)
          for (std::size_t k = 0; k < h.size(); ++k) {
            const double x = scale * h.nodes[i], y = scale * h.nodes[j], z = scale * h.nodes[k];
            double w = h.weights[i] * h.weights[j] * h.weights[k] * scale * scale * scale;
            if (measure == Measure::lebesgue)
              w *= std::exp((x * x + y * y + z * z) / (2.0 * spec.velocity_scale * spec.velocity_scale));
            set.coords.insert(set.coords.end(), {x, y, z});
            set.weights.push_back(w);
          }
      break;
    }
    case Domain::energy: {
      const Rule1D l = gauss_laguerre(spec.laguerre_order);
      set.dim = 1;
      for (std::size_t i = 0; i < l.size(); ++i) {
        const double x = spec.energy_scale * l.nodes[i];
        double w = spec.energy_scale * l.weights[i];
        if (measure == Measure::lebesgue) w *= std::exp(x / spec.energy_scale);
        set.coords.push_back(x);
        set.weights.push_back(w);
      }
      break;
    }
    case Domain::sphere: {
      const SphereRule s = product_sphere(spec.sphere_theta, spec.sphere_phi);
      set.dim = 3;
      for (std::size_t i = 0; i < s.size(); ++i) {
        set.coords.insert(set.coords.end(), s.directions[i].begin(), s.directions[i].end());
        set.weights.push_back(s.weights[i]);
      }
      break;
    }
    case Domain::unit_interval: {
      const Rule1D g = gauss_legendre(spec.legendre_R);
      set.dim = 1;
      set.coords = g.nodes;
      set.weights = g.weights;
      break;
    }
  }
  return set;
}

}  // namespace detail

/// Rule exact for polynomials of its degree against the natural weight of the domain
/// (e^{-|x|^2/(2 s^2)} for velocity3, e^{-I/theta} for energy, uniform for sphere and
/// unit_interval). Measure::lebesgue folds the inverse natural weight into the weights.
inline NodeSet build_rule(const QuadratureSpec& spec, Domain domain, Measure measure = Measure::natural) {
  spec.validate();
  NodeSet set = detail::build_single(spec, domain, measure);
  set.coarse = std::make_shared<const NodeSet>(detail::build_single(spec.coarsened(), domain, measure));
  return set;
}

/// Tensor product of two node sets; coarse companions compose when both exist.
inline NodeSet tensor(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  out.dim = a.dim + b.dim;
  out.coords.reserve(a.size() * b.size() * out.dim);
  out.weights.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto pa = a.point(i);
      auto pb = b.point(j);
      out.coords.insert(out.coords.end(), pa.begin(), pa.end());
      out.coords.insert(out.coords.end(), pb.begin(), pb.end());
      out.weights.push_back(a.weights[i] * b.weights[j]);
    }
  if (a.coarse && b.coarse) out.coarse = std::make_shared<const NodeSet>(tensor(*a.coarse, *b.coarse));
  return out;
}

namespace detail {

inline std::string describe_node(std::span<const double> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

template <class F>
double weighted_sum(const NodeSet& rule, F& integrand) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = integrand(rule.point(i));
    if (!std::isfinite(v))
      throw QuadratureError("non-finite integrand at node " + std::to_string(i) + " " +
                            describe_node(rule.point(i)));
    terms[i] = rule.weights[i] * v;
  }
  return pairwise_sum(terms);
}

}  // namespace detail

/// Weighted sum with an error estimate from the coarse companion (zero if absent).
template <class F>
Estimate integrate(const NodeSet& rule, F&& integrand) {
  Estimate e;
  e.value = detail::weighted_sum(rule, integrand);
  if (rule.coarse) e.error = std::abs(e.value - detail::weighted_sum(*rule.coarse, integrand));
  e.error += 4.0 * std::numeric_limits<double>::epsilon() * std::abs(e.value);
  return e;
}

/// Welford accumulator for Monte Carlo means.
class RunningStats {
 public:
  void push(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
  Estimate estimate() const { return {mean_, standard_error()}; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Seeded Monte Carlo mean of draw(rng) over the given number of samples.
template <class Draw>
Estimate monte_carlo(std::size_t samples, std::uint64_t seed, Draw&& draw) {
  detail::require(samples >= 2, "Monte Carlo needs at least two samples");
  std::mt19937_64 rng(seed);
  RunningStats stats;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = draw(rng);
    if (!std::isfinite(v)) throw QuadratureError("non-finite Monte Carlo sample " + std::to_string(i));
    stats.push(v);
  }
  return stats.estimate();
}

/// Uniform direction on the unit sphere.
inline std::array<double, 3> uniform_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  const double c = u(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = ang(rng);
  return {s * std::cos(phi), s * std::sin(phi), c};
}

}  // namespace boltzmix
