#pragma once

// Umbrella header for the DOTS derivative-free optimization library.

#include "dots/bench.hpp"
#include "dots/dataset.hpp"
#include "dots/driver.hpp"
#include "dots/evalproto.hpp"
#include "dots/objective.hpp"
#include "dots/rng.hpp"
#include "dots/sampler.hpp"
#include "dots/search.hpp"
#include "dots/space.hpp"
#include "dots/surrogate.hpp"
