#pragma once

/// Umbrella header.

#include "collprob/bench.hpp"
#include "collprob/checker.hpp"
#include "collprob/errors.hpp"
#include "collprob/geometry.hpp"
#include "collprob/linalg.hpp"
#include "collprob/scenario.hpp"
#include "collprob/sigma_schemes.hpp"
#include "collprob/uncertainty.hpp"
