#pragma once

// Umbrella header: the direct and inverse spectral problem for finite
// spring-mass chains with one interior mass-spring modification.

#include "conditions.hpp"
#include "core.hpp"
#include "eigen.hpp"
#include "fixtures.hpp"
#include "green.hpp"
#include "inverse.hpp"
#include "massspring.hpp"
#include "perturb.hpp"
#include "poly.hpp"
