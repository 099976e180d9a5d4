#pragma once

#include "cgm/busemann.hpp"
#include "cgm/diagnostics.hpp"
#include "cgm/exact_laws.hpp"
#include "cgm/lattice.hpp"
#include "cgm/lpp.hpp"
#include "cgm/multiclass.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"
#include "cgm/stats.hpp"
