#pragma once

#include "lgt/grid.hpp"
#include "lgt/quadrature.hpp"
#include "lgt/step_function.hpp"
#include "lgt/rearrangement.hpp"
#include "lgt/weights.hpp"
#include "lgt/operators.hpp"
#include "lgt/conditions.hpp"
#include "lgt/verification.hpp"
#include "lgt/io.hpp"
