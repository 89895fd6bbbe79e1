// Umbrella header for the pgeig library.
#pragma once

#include "pgeig/bounds.hpp"
#include "pgeig/concentration.hpp"
#include "pgeig/conelab.hpp"
#include "pgeig/dense/jacobi.hpp"
#include "pgeig/dense/orthonormalize.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/iterate.hpp"
#include "pgeig/pencil.hpp"
#include "pgeig/precond.hpp"
#include "pgeig/problems.hpp"
#include "pgeig/solver_kind.hpp"
