#pragma once

// Umbrella header: exterior algebra, phase spaces, decomposable solutions of
// the multisymplectic Hamilton equation, Klein-Gordon dynamics and lifts,
// and the covariant Hamilton-Jacobi checks.

#include "decomposition.hpp"
#include "exterior.hpp"
#include "hamilton_jacobi.hpp"
#include "klein_gordon.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "phase_space.hpp"
#include "polynomial.hpp"
#include "schouten.hpp"
