#pragma once

#include "ptrm/eig.hpp"
#include "ptrm/error.hpp"
#include "ptrm/grid.hpp"
#include "ptrm/io.hpp"
#include "ptrm/linstab.hpp"
#include "ptrm/modes.hpp"
#include "ptrm/observables.hpp"
#include "ptrm/potential.hpp"
#include "ptrm/propagate.hpp"
#include "ptrm/spectral.hpp"
#include "ptrm/sweep.hpp"
#include "ptrm/version.hpp"
