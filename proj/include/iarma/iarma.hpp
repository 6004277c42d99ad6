#pragma once

// Convenience header pulling in the whole library.

#include "iarma/diagnostics.hpp"
#include "iarma/error.hpp"
#include "iarma/estimate.hpp"
#include "iarma/filter.hpp"
#include "iarma/io.hpp"
#include "iarma/model.hpp"
#include "iarma/montecarlo.hpp"
#include "iarma/optim.hpp"
#include "iarma/rng.hpp"
