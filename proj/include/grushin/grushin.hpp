#pragma once

// Umbrella header for the whole toolkit.

#include "grushin/dual.hpp"
#include "grushin/extension.hpp"
#include "grushin/fields.hpp"
#include "grushin/functionals.hpp"
#include "grushin/geometry.hpp"
#include "grushin/grid.hpp"
#include "grushin/params.hpp"
#include "grushin/quad2d.hpp"
#include "grushin/reports.hpp"
#include "grushin/solver.hpp"
#include "grushin/version.hpp"
