#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "rmfs/sim.hpp"

namespace rmfs {

// Probability each listed action gets picked at the given decision point,
// masked to those actions and renormalized (outputs sum to 1). Backed by the
// trained classifier in production; tests inject synthetic predictors.
using ActionPredictor =
    std::function<void(const SimState& at_decision, std::span<const std::int16_t> actions,
                       std::span<double> out)>;

}  // namespace rmfs
