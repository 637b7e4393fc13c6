#pragma once

#include <map>
#include <string>
#include <vector>

#include "edgeflow/core/types.hpp"
#include "edgeflow/sim/trace.hpp"
#include "edgeflow/window/frame.hpp"

namespace edgeflow::sim {

// Offline brute-force resampler. Recomputes every window of every
// environment straight from the whole trace: no streaming state, no shared
// window machinery. Only the payload translator is shared with the engine.
// Returns frames per environment id, in window order.
std::map<std::string, std::vector<WindowFrame>> oracle_resample(const RawTrace& trace, const Config& config);

}  // namespace edgeflow::sim
