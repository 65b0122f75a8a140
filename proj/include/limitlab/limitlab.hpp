#pragma once

// Umbrella header.

#include "limitlab/cli.hpp"
#include "limitlab/config.hpp"
#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/limits.hpp"
#include "limitlab/lorentz.hpp"
#include "limitlab/measures.hpp"
#include "limitlab/operators.hpp"
#include "limitlab/optimize.hpp"
#include "limitlab/parallel.hpp"
#include "limitlab/rng.hpp"
