#pragma once

#include "mgsim/action_space.hpp"
#include "mgsim/microgrid.hpp"

namespace mgsim {

/// Priority-list dispatch: a deficit is served from PV, then the battery,
/// then the grid, then the genset, and shed as a last resort; a surplus
/// charges the battery, then exports, then curtails. The discrete
/// battery-serve template implements exactly this walk, which keeps the
/// rule-based policy inside the Q-learner's action vocabulary.
inline ControlAction rbc_decide(const Observation& obs) {
    return expand_template(ActionTemplate::battery_serve, obs);
}

}  // namespace mgsim
