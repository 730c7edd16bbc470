#pragma once

// Convenience header pulling in the whole toolkit.

#include "nonlocal/envelopes.hpp"
#include "nonlocal/exact_sets.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/grid.hpp"
#include "nonlocal/parallel.hpp"
#include "nonlocal/relaxation_lab.hpp"
#include "nonlocal/scenario.hpp"
#include "nonlocal/set_ops.hpp"
