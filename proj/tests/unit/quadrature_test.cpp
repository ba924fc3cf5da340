#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "boltzmix/quadrature.hpp"

using namespace boltzmix;

TEST(Quadrature, HermiteIntegratesGaussian) {
  const Rule1D r = gauss_hermite(10);
  double s = 0.0;
  for (double w : r.weights) s += w;
  EXPECT_NEAR(s, std::sqrt(std::numbers::pi), 1e-12);
}

TEST(Quadrature, LaguerreFirstMoment) {
  const Rule1D r = gauss_laguerre(5);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * r.nodes[i];
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Quadrature, GeneralizedLaguerreMass) {
  // int_0^inf I^{1/2} e^{-I} dI = Gamma(3/2)
  const Rule1D r = gauss_laguerre(7, 0.5);
  double s = 0.0;
  for (double w : r.weights) s += w;
  EXPECT_NEAR(s, std::tgamma(1.5), 1e-12);
}

TEST(Quadrature, LegendreExactness) {
  const Rule1D r = gauss_legendre(6, -1.0, 2.0);
  double s = 0.0, x9 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    s += r.weights[i];
    x9 += r.weights[i] * std::pow(r.nodes[i], 9);
  }
  EXPECT_NEAR(s, 3.0, 1e-12);
  EXPECT_NEAR(x9, (std::pow(2.0, 10) - 1.0) / 10.0, 1e-9);
}

TEST(Quadrature, LegendreSquaredHandlesSqrtEndpoint) {
  // int_0^1 sqrt(R) dR = 2/3 exactly under R = t^2.
  const Rule1D r = legendre_squared(4);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::sqrt(r.nodes[i]);
  EXPECT_NEAR(s, 2.0 / 3.0, 1e-14);
}

TEST(Quadrature, SphereArea) {
  const NodeSet s = build_rule(QuadratureSpec{}, Domain::sphere);
  const Estimate e = integrate(s, [](std::span<const double>) { return 1.0; });
  EXPECT_NEAR(e.value, 4.0 * std::numbers::pi, 1e-12);
}

TEST(Quadrature, SphereSecondMoment) {
  const NodeSet s = build_rule(QuadratureSpec{}, Domain::sphere);
  const Estimate e = integrate(s, [](std::span<const double> x) { return x[2] * x[2]; });
  EXPECT_NEAR(e.value, 4.0 * std::numbers::pi / 3.0, 1e-12);
}

TEST(Quadrature, GaussianSecondMoment) {
  QuadratureSpec q;
  q.hermite_order = 6;
  const NodeSet v = build_rule(q, Domain::velocity3);
  const double norm = std::pow(2.0 * std::numbers::pi, -1.5);
  const Estimate e = integrate(v, [&](std::span<const double> x) {
    return norm * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  });
  EXPECT_NEAR(e.value, 3.0, 1e-12);
  EXPECT_EQ(v.size(), 216u);
}

TEST(Quadrature, TensorCountsMultiply) {
  QuadratureSpec q;
  q.hermite_order = 3;
  q.laguerre_order = 4;
  const NodeSet t = tensor(build_rule(q, Domain::velocity3), build_rule(q, Domain::energy));
  EXPECT_EQ(t.size(), 27u * 4u);
  EXPECT_EQ(t.dim, 4);
  ASSERT_TRUE(t.coarse);
}

TEST(Quadrature, DeterministicRules) {
  const NodeSet a = build_rule(QuadratureSpec{}, Domain::velocity3);
  const NodeSet b = build_rule(QuadratureSpec{}, Domain::velocity3);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(Quadrature, NonFiniteIntegrandNamesNode) {
  const NodeSet s = build_rule(QuadratureSpec{}, Domain::unit_interval);
  try {
    integrate(s, [](std::span<const double> x) { return x[0] > 0.5 ? NAN : 1.0; });
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(Quadrature, InvalidOrderRejected) {
  QuadratureSpec q;
  q.hermite_order = 0;
  EXPECT_THROW(build_rule(q, Domain::velocity3), ParameterError);
  EXPECT_THROW(gauss_hermite(0), ParameterError);
}

TEST(Quadrature, ErrorEstimateFromCoarseRule) {
  QuadratureSpec q;
  q.legendre_R = 3;
  const NodeSet s = build_rule(q, Domain::unit_interval);
  const Estimate e = integrate(s, [](std::span<const double> x) { return std::exp(x[0]); });
  EXPECT_NEAR(e.value, std::exp(1.0) - 1.0, 1e-4);
  EXPECT_GT(e.error, 0.0);
  EXPECT_GE(e.error, std::abs(e.value - (std::exp(1.0) - 1.0)));
}

TEST(Quadrature, MonteCarloAgreesWithTensorRule) {
  // <|xi|^2> under the standard Gaussian, by both engines.
  const Estimate mc = monte_carlo(1'000'000, 20240917, [](std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double x = n(rng), y = n(rng), z = n(rng);
    return x * x + y * y + z * z;
  });
  EXPECT_LT(std::abs(mc.value - 3.0), 3.0 * mc.error);
}

TEST(Quadrature, MonteCarloReproducible) {
  const auto draw = [](std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  EXPECT_EQ(monte_carlo(1000, 5, draw).value, monte_carlo(1000, 5, draw).value);
  EXPECT_NE(monte_carlo(1000, 5, draw).value, monte_carlo(1000, 6, draw).value);
}

TEST(Quadrature, UniformDirectionIsUnit) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = uniform_direction(rng);
    EXPECT_NEAR(d[0] * d[0] + d[1] * d[1] + d[2] * d[2], 1.0, 1e-14);
  }
}

TEST(Quadrature, NestedRefinementBattery) {
  // Default orders against the same rules at twice the order.
  const QuadratureSpec base;
  QuadratureSpec twice = base;
  for (int* o : {&twice.hermite_order, &twice.laguerre_order, &twice.sphere_theta, &twice.sphere_phi, &twice.legendre_R})
    *o *= 2;
  using Fn = std::function<double(std::span<const double>)>;
  std::vector<std::pair<Domain, Fn>> battery;
  for (double c : {0.3, 0.7, 1.1, 1.6, 2.3}) {
    battery.push_back({Domain::velocity3, [c](std::span<const double> x) { return std::cos(c * x[0]) * std::exp(-0.1 * c * x[1] * x[1]); }});
    battery.push_back({Domain::velocity3, [c](std::span<const double> x) { return 1.0 / (1.0 + c * x[2] * x[2]); }});
    battery.push_back({Domain::energy, [c](std::span<const double> x) { return std::exp(-c * x[0]); }});
    battery.push_back({Domain::energy, [c](std::span<const double> x) { return std::sin(c * x[0]); }});
    battery.push_back({Domain::sphere, [c](std::span<const double> x) { return std::exp(c * x[2]) * (1.0 + x[0] * x[1]); }});
    battery.push_back({Domain::unit_interval, [c](std::span<const double> x) { return std::exp(c * x[0]); }});
    battery.push_back({Domain::unit_interval, [c](std::span<const double> x) { return 1.0 / (1.0 + c * x[0]); }});
  }
  std::size_t within = 0;
  for (const auto& [domain, fn] : battery) {
    const Estimate coarse = integrate(build_rule(base, domain), fn);
    const Estimate fine = integrate(build_rule(twice, domain), fn);
    if (std::abs(fine.value - coarse.value) <= coarse.error) ++within;
  }
  EXPECT_GE(double(within), 0.95 * double(battery.size())) << within << " of " << battery.size();
}
