#pragma once

#include "sketchycgm/error.hpp"
#include "sketchycgm/eval.hpp"
#include "sketchycgm/ledger.hpp"
#include "sketchycgm/losses.hpp"
#include "sketchycgm/operators.hpp"
#include "sketchycgm/probgen.hpp"
#include "sketchycgm/reference.hpp"
#include "sketchycgm/sketch.hpp"
#include "sketchycgm/solver.hpp"
#include "sketchycgm/spectral.hpp"
#include "sketchycgm/types.hpp"
