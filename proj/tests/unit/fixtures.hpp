#pragma once

#include "boltzmix/boltzmix.hpp"

namespace fixtures {

using namespace boltzmix;

inline MixtureSpec mono() { return MixtureSpec({SpeciesSpec::monatomic(1.0)}); }

inline MixtureSpec mono_poly() {
  return MixtureSpec({SpeciesSpec::monatomic(1.0), SpeciesSpec::polyatomic(2.0, 4.0, 0.7)});
}

inline CrossSectionModel mixture_model(double eta = 0.0) {
  Eigen::MatrixXd C(2, 2);
  C << 1.0, 0.8, 0.8, 1.2;
  return CrossSectionModel(C, eta);
}

/// Reduced orders, enough for relative checks at the 1e-6 level and fast.
inline QuadratureSpec coarse() {
  QuadratureSpec q;
  q.sphere_theta = 3;
  q.sphere_phi = 6;
  q.legendre_R = 4;
  q.legendre_r = 3;
  q.laguerre_order = 6;
  q.radial_order = 16;
  q.polar_order = 12;
  q.azimuth_order = 4;
  return q;
}

}  // namespace fixtures
