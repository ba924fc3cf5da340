#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "boltzmix/mixture.hpp"

using namespace boltzmix;

namespace {

MixtureSpec mono_poly() { return MixtureSpec({SpeciesSpec::monatomic(1.0, 1.0), SpeciesSpec::polyatomic(2.0, 4.0, 0.7)}); }

}  // namespace

TEST(Mixture, SpeciesValidation) {
  EXPECT_THROW(MixtureSpec({SpeciesSpec::monatomic(-1.0)}), ParameterError);
  EXPECT_THROW(MixtureSpec({SpeciesSpec::polyatomic(1.0, 1.5)}), ParameterError);
  EXPECT_THROW(MixtureSpec({{1.0, SpeciesKind::monatomic, 3.0, 1.0}}), ParameterError);
  EXPECT_THROW(MixtureSpec({SpeciesSpec::polyatomic(1.0, 4.0), SpeciesSpec::monatomic(1.0)}), ParameterError);
  EXPECT_THROW(MixtureSpec(std::vector<SpeciesSpec>{}), ParameterError);
  const MixtureSpec m = mono_poly();
  EXPECT_EQ(m.s0(), 1u);
  EXPECT_EQ(m.s1(), 1u);
}

TEST(Mixture, MaxwellianAtOrigin) {
  const MixtureSpec m({SpeciesSpec::monatomic(1.0)});
  const DistributionFunction M = standard_maxwellian(m);
  EXPECT_NEAR(M(0, Vec3::Zero(), 0.0), std::pow(2.0 * std::numbers::pi, -1.5), 1e-15);
  EXPECT_NEAR(M(0, Vec3::Zero(), 0.0), 0.06349363593424097, 1e-15);
}

TEST(Mixture, PolyatomicMaxwellianAtZeroInternalEnergy) {
  const MixtureSpec four({SpeciesSpec::polyatomic(1.0, 4.0)});
  EXPECT_EQ(standard_maxwellian(four)(0, Vec3::Zero(), 0.0), 0.0);
  const MixtureSpec two({SpeciesSpec::polyatomic(1.0, 2.0)});
  const double v = standard_maxwellian(two)(0, Vec3::Zero(), 0.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, std::pow(2.0 * std::numbers::pi, -1.5), 1e-15);
}

TEST(Mixture, MaxwellianRejectsBadParameters) {
  const MixtureSpec m({SpeciesSpec::monatomic(1.0)});
  EXPECT_THROW(maxwellian(m, {1.0}, Vec3::Zero(), 0.0), ParameterError);
  EXPECT_THROW(maxwellian(m, {-1.0}, Vec3::Zero(), 1.0), ParameterError);
  EXPECT_THROW(maxwellian(m, {1.0, 1.0}, Vec3::Zero(), 1.0), ParameterError);
}

TEST(Mixture, InnerProductOfMaxwellianWithItself) {
  // int M^2 dxi = (m / (4 pi))^{3/2} for n = T = 1.
  const MixtureSpec m({SpeciesSpec::monatomic(1.0)});
  const DistributionFunction M = standard_maxwellian(m);
  QuadratureSpec q;
  q.hermite_order = 40;
  EXPECT_NEAR(inner_product(m, M, M, q), std::pow(4.0 * std::numbers::pi, -1.5), 1e-12);
  EXPECT_NEAR(inner_product(m, M, M, q), 0.02244839026564582, 1e-12);
}

TEST(Mixture, InnerProductZeroAndDisjoint) {
  const MixtureSpec m = mono_poly();
  QuadratureSpec q;
  q.hermite_order = 8;
  q.laguerre_order = 8;
  EXPECT_EQ(inner_product(m, DistributionFunction::zero(2), DistributionFunction::zero(2), q), 0.0);
  const DistributionFunction M = standard_maxwellian(m);
  const DistributionFunction e1({[&](const Vec3& x, double I) { return std::sqrt(M(0, x, I)); },
                                 [](const Vec3&, double) { return 0.0; }});
  const DistributionFunction e2({[](const Vec3&, double) { return 0.0; },
                                 [&](const Vec3& x, double I) { return std::sqrt(M(1, x, I)); }});
  EXPECT_EQ(inner_product(m, e1, e2, q), 0.0);
}

TEST(Mixture, InnerProductSymmetricBilinear) {
  const MixtureSpec m = mono_poly();
  QuadratureSpec q;
  q.hermite_order = 8;
  q.laguerre_order = 8;
  const DistributionFunction M = standard_maxwellian(m);
  const DistributionFunction f = M * DistributionFunction({[](const Vec3& x, double) { return 1.0 + x.x(); },
                                                           [](const Vec3& x, double I) { return x.y() * I; }});
  const DistributionFunction g({[](const Vec3& x, double) { return x.squaredNorm(); },
                                [](const Vec3& x, double I) { return 1.0 + x.z() + I; }});
  EXPECT_NEAR(inner_product(m, f, g, q), inner_product(m, g, f, q), 1e-14);
  EXPECT_NEAR(inner_product(m, 3.0 * f + g, g, q), 3.0 * inner_product(m, f, g, q) + inner_product(m, g, g, q),
              1e-10 * std::abs(inner_product(m, g, g, q)));
}

TEST(Mixture, MomentsRoundTrip) {
  const MixtureSpec m = mono_poly();
  QuadratureSpec q;
  q.hermite_order = 40;
  q.laguerre_order = 40;
  const Vec3 u(0.3, -0.1, 0.2);
  const DistributionFunction M = maxwellian(m, {1.3, 0.6}, u, 1.4);
  const Moments mo = macroscopic_moments(m, M, q);
  EXPECT_NEAR(mo.n[0], 1.3, 1e-6 * 1.3);
  EXPECT_NEAR(mo.n[1], 0.6, 1e-6 * 0.6);
  EXPECT_NEAR((mo.u - u).norm(), 0.0, 1e-6);
  EXPECT_NEAR(mo.T, 1.4, 1e-6 * 1.4);
}

TEST(Mixture, InvariantGenerators) {
  EXPECT_EQ(collision_invariants(MixtureSpec({SpeciesSpec::monatomic(1.0)})).size(), 5u);
  const MixtureSpec m = mono_poly();
  const auto inv = collision_invariants(m);
  ASSERT_EQ(inv.size(), 6u);
  const Vec3 xi(1.0, 2.0, -1.0);
  EXPECT_DOUBLE_EQ(inv[5](0, xi, 3.0), 1.0 * xi.squaredNorm());
  EXPECT_DOUBLE_EQ(inv[5](1, xi, 3.0), 2.0 * xi.squaredNorm() + 6.0);
  EXPECT_DOUBLE_EQ(inv[0](0, xi, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(inv[0](1, xi, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(inv[3](1, xi, 0.0), 2.0 * xi.y());
}
