#pragma once

#include "boltzmix/collision_geometry.hpp"
#include "boltzmix/collision_operator.hpp"
#include "boltzmix/config.hpp"
#include "boltzmix/cross_section.hpp"
#include "boltzmix/error.hpp"
#include "boltzmix/linearized_operator.hpp"
#include "boltzmix/mixture.hpp"
#include "boltzmix/parallel.hpp"
#include "boltzmix/quadrature.hpp"
#include "boltzmix/verification.hpp"
