#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "boltzmix/cross_section.hpp"
#include "boltzmix/verification.hpp"
#include "fixtures.hpp"

using namespace boltzmix;

namespace {

CollisionEvent event(const MixtureSpec& m, CollisionPair pair, Vec3 omega, std::optional<double> R = {},
                     std::optional<double> r = {}) {
  return primed_state(m, pair, {omega.normalized(), R, r});
}

std::vector<CollisionEvent> random_events(const MixtureSpec& m, std::size_t n, std::uint64_t seed, double radius = 3.0) {
  std::mt19937_64 rng(seed);
  std::vector<CollisionEvent> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = 0; b < m.size(); ++b) {
        const CollisionPair pair{detail::random_phase_point(m, a, rng, radius, 4.0), detail::random_phase_point(m, b, rng, radius, 4.0)};
        out.push_back(primed_state(m, pair, detail::random_params(collision_case(m, a, b), rng, 1e-3)));
      }
  return out;
}

}  // namespace

TEST(CrossSection, ModelValidation) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 2, 3, 1;
  EXPECT_THROW(CrossSectionModel(asym, 0.0), ParameterError);
  EXPECT_THROW(CrossSectionModel::uniform(1, 1.0, 1.0), ParameterError);
  EXPECT_THROW(CrossSectionModel::uniform(1, 1.0, -0.1), ParameterError);
  EXPECT_THROW(CrossSectionModel::uniform(1, -1.0, 0.0), ParameterError);
  EXPECT_THROW(CrossSectionModel::uniform(1, 1.0, 0.0, 1.0), ParameterError);
  EXPECT_NO_THROW(CrossSectionModel::uniform(2, 0.0, 0.99));
}

TEST(CrossSection, MonoMonoValue) {
  const MixtureSpec m({SpeciesSpec::monatomic(2.0)});
  const CrossSectionModel model = CrossSectionModel::uniform(1, 1.0, 0.5);
  // mu = 1, |g| = 2, E = 2: sigma = 2^{-1/4}.
  const CollisionEvent ev = event(m, {{0, Vec3(1, 0, 0), 0}, {0, Vec3(-1, 0, 0), 0}}, Vec3(0, 1, 0));
  EXPECT_NEAR(sigma(model, ev).value, std::pow(2.0, -0.25), 1e-15);
  EXPECT_FALSE(sigma(model, ev).degenerate);
}

TEST(CrossSection, UpsilonPolyPoly) {
  const MixtureSpec m({SpeciesSpec::polyatomic(2.0, 2.0), SpeciesSpec::polyatomic(2.0, 2.0)});
  const CollisionEvent ev = event(m, {{0, Vec3(1, 0, 0), 1.0}, {1, Vec3(-1, 0, 0), 0.5}}, Vec3(0, 0, 1), 0.4, 0.3);
  EXPECT_DOUBLE_EQ(ev.E, 3.5);
  EXPECT_NEAR(energy_factors(ev).upsilon, 1.0 / (3.5 * 3.5), 1e-16);
}

TEST(CrossSection, DegenerateAndOutOfDomain) {
  const MixtureSpec m = fixtures::mono_poly();
  const CrossSectionModel model = fixtures::mixture_model();
  const CollisionEvent still = event(m, {{0, Vec3(1, 0, 0), 0}, {1, Vec3(1, 0, 0), 2.0}}, Vec3(0, 0, 1), 0.5);
  EXPECT_TRUE(sigma(model, still).degenerate);
  EXPECT_GT(relative_flux(model, still), 0.0);
  const CollisionEvent dead = event(m, {{0, Vec3(1, 0, 0), 0}, {1, Vec3(0, 0, 0), 2.0}}, Vec3(0, 0, 1), 0.0);
  EXPECT_THROW(sigma(model, dead), DomainError);
}

TEST(CrossSection, CollisionWeightMatchesSigmaTimesFactors) {
  const MixtureSpec m = fixtures::mono_poly();
  const MixtureSpec pp({SpeciesSpec::polyatomic(1.0, 3.0), SpeciesSpec::polyatomic(2.0, 5.0)});
  const CrossSectionModel model = fixtures::mixture_model(0.3);
  for (const MixtureSpec* mix : {&m, &pp})
    for (const CollisionEvent& ev : random_events(*mix, 50, 11)) {
      if (ev.g_norm == 0.0) continue;
      double expected = sigma(model, ev).value * ev.g_norm;
      if (ev.kind == CollisionCase::mono_poly || ev.kind == CollisionCase::poly_mono) expected *= ev.E;
      if (ev.kind == CollisionCase::poly_poly) expected *= ev.E * ev.E * (1.0 - *ev.params.R);
      ASSERT_NEAR(collision_weight(model, ev), expected, 1e-12 * std::abs(expected));
    }
}

TEST(CrossSection, Microreversibility) {
  const MixtureSpec m({SpeciesSpec::monatomic(0.8), SpeciesSpec::polyatomic(1.5, 3.0), SpeciesSpec::polyatomic(2.5, 6.0)});
  const CrossSectionModel model = CrossSectionModel::uniform(3, 1.3, 0.5);
  double worst = 0.0, perturbed = 0.0;
  for (const CollisionEvent& ev : random_events(m, 200, 5)) {
    worst = std::max(worst, microreversibility_check(m, model, ev).relative());
    if (alpha_poly(ev.kind))
      perturbed = std::max(perturbed, microreversibility_check(m, [&](const CollisionEvent& e) {
                                        return sigma(model, e).value * (1.0 + e.primed_a.I);
                                      }, ev).relative());
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_GE(perturbed, 1e-6);
}

TEST(CrossSection, SpeciesSwap) {
  const MixtureSpec m = fixtures::mono_poly();
  const CrossSectionModel model = fixtures::mixture_model(0.5);
  const PhasePoint a{0, Vec3(0.3, -1, 0.2), 0.0}, b{1, Vec3(-0.5, 0.4, 1.1), 1.7};
  const Vec3 omega = Vec3(1, 2, -1).normalized();
  const CollisionEvent ab = event(m, {a, b}, omega, 0.35);
  const CollisionEvent ba = event(m, {b, a}, -omega, 0.35);
  EXPECT_NEAR(sigma(model, ab).value, sigma(model, ba).value, 1e-14);
  EXPECT_NEAR((ab.primed_a.xi - ba.primed_b.xi).norm(), 0.0, 1e-14);
  EXPECT_NEAR(ab.primed_b.I, ba.primed_a.I, 1e-14);
}

TEST(CrossSection, WeightContinuousAtFullKineticShare) {
  const MixtureSpec m({SpeciesSpec::monatomic(1.0), SpeciesSpec::polyatomic(1.0, 2.0)});
  const CrossSectionModel model = CrossSectionModel::uniform(2, 1.0, 0.2);
  const CollisionPair pair{{0, Vec3(1, 0, 0), 0}, {1, Vec3(0, 0.5, 0), 0.8}};
  const double at_one = collision_weight(model, event(m, pair, Vec3(0, 0, 1), 1.0));
  const double near_one = collision_weight(model, event(m, pair, Vec3(0, 0, 1), 1.0 - 1e-10));
  EXPECT_GT(at_one, 0.0);
  EXPECT_NEAR(near_one, at_one, 1e-8 * at_one);
}

TEST(CrossSection, BoundHoldsAndFailsForControl) {
  const MixtureSpec m = fixtures::mono_poly();
  const CrossSectionModel model = fixtures::mixture_model(0.0);
  const std::vector<CollisionEvent> events = random_events(m, 300, 9, 6.0);
  const BoundReport rep = bound_check_est1(model, events);
  EXPECT_GT(rep.events, 0u);
  EXPECT_LE(rep.max_ratio, model.C().maxCoeff() * (1.0 + 1e-12));
  const BoundReport control = bound_check_est1(model.gamma(), events, [&](const CollisionEvent& e) {
    return sigma(model, e).value * e.E * e.E;
  });
  EXPECT_GT(control.max_ratio, 100.0 * model.C().maxCoeff());
  EXPECT_THROW(bound_check_est1(model, std::span<const CollisionEvent>{}), ParameterError);
}

TEST(CrossSection, ScaledModel) {
  const CrossSectionModel model = fixtures::mixture_model(0.5).scaled(2.0);
  EXPECT_DOUBLE_EQ(model.C(0, 1), 1.6);
  EXPECT_DOUBLE_EQ(model.eta(), 0.5);
}
