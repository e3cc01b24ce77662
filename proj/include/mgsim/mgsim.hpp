#pragma once

// Umbrella header: microgrid fleet generation, simulation and the benchmark
// controllers.

#include "mgsim/action_space.hpp"
#include "mgsim/bench.hpp"
#include "mgsim/controller.hpp"
#include "mgsim/decision_tree.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/generator.hpp"
#include "mgsim/lp.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/mpc.hpp"
#include "mgsim/qlearning.hpp"
#include "mgsim/rng.hpp"
#include "mgsim/rule_based.hpp"
#include "mgsim/serialization.hpp"
#include "mgsim/time_series.hpp"
