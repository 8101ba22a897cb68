#pragma once

// Umbrella header for the dphav library.

#include "dphav/detect.hpp"
#include "dphav/errors.hpp"
#include "dphav/fock.hpp"
#include "dphav/nongauss.hpp"
#include "dphav/phase_grid.hpp"
#include "dphav/shotsim.hpp"
#include "dphav/splitcond.hpp"
#include "dphav/states.hpp"
