/// Umbrella header.
#pragma once

#include "bodies.hpp"
#include "centroid.hpp"
#include "core.hpp"
#include "dimred.hpp"
#include "harness.hpp"
#include "measures.hpp"
#include "packing.hpp"
#include "quermass.hpp"
