#pragma once

// Umbrella header for the crystal-router library.

#include "crystal/bench.hpp"
#include "crystal/codec.hpp"
#include "crystal/costmodel.hpp"
#include "crystal/error.hpp"
#include "crystal/message.hpp"
#include "crystal/patterns.hpp"
#include "crystal/rng.hpp"
#include "crystal/router.hpp"
#include "crystal/simulator.hpp"
