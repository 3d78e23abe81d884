#pragma once

#include "semilinear/config.hpp"
#include "semilinear/csv.hpp"
#include "semilinear/error.hpp"
#include "semilinear/exhaustion.hpp"
#include "semilinear/expr.hpp"
#include "semilinear/grid.hpp"
#include "semilinear/nonlinearity.hpp"
#include "semilinear/operator.hpp"
#include "semilinear/potential.hpp"
#include "semilinear/solver.hpp"
#include "semilinear/thinness.hpp"
#include "semilinear/verify.hpp"
