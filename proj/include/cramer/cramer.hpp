#pragma once

#include "cramer/errors.hpp"
#include "cramer/fiber_geometry.hpp"
#include "cramer/linalg.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/oracles.hpp"
#include "cramer/polytope.hpp"
#include "cramer/problem.hpp"
#include "cramer/psd_cone.hpp"
#include "cramer/quadrature.hpp"
#include "cramer/rng.hpp"
#include "cramer/sdp_bridge.hpp"
