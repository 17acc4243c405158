#pragma once

// Umbrella header: the full half-range solver stack.

#include "halfrange/errors.hpp"
#include "halfrange/coefficients.hpp"
#include "halfrange/admissibility.hpp"
#include "halfrange/grid.hpp"
#include "halfrange/model.hpp"
#include "halfrange/krein.hpp"
#include "halfrange/slab.hpp"
#include "halfrange/duhamel.hpp"
#include "halfrange/kinetic.hpp"
#include "halfrange/bruteforce.hpp"
#include "halfrange/io.hpp"
#include "halfrange/cache.hpp"
#include "halfrange/config.hpp"
#include "halfrange/runner.hpp"
