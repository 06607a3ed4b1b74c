#pragma once
// Umbrella header: the full pipeline from symmetric-pair models to
// moment polytopes, critical structure, fiber connectivity, the torus
// criterion, and report serialization.

#include "flagmoment/errors.hpp"
#include "flagmoment/numerics.hpp"
#include "flagmoment/parallel.hpp"
#include "flagmoment/polytope.hpp"
#include "flagmoment/rng.hpp"
#include "flagmoment/symmetric_space.hpp"
#include "flagmoment/weyl.hpp"
#include "flagmoment/morse.hpp"
#include "flagmoment/kirwan.hpp"
#include "flagmoment/report.hpp"
