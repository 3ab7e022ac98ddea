#pragma once

#include "svogame/config.hpp"
#include "svogame/dynamics.hpp"
#include "svogame/estimator.hpp"
#include "svogame/hdv.hpp"
#include "svogame/objectives.hpp"
#include "svogame/optimize.hpp"
#include "svogame/planner.hpp"
#include "svogame/simulation.hpp"
#include "svogame/solver.hpp"
#include "svogame/types.hpp"
