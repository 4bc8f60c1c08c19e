#pragma once

#include <string>

#include "qprl/rl/actor.hpp"
#include "qprl/rl/critic.hpp"

namespace qprl::rl {

/// Versioned JSON checkpoint holding the quantile grid, layer shapes,
/// and flattened parameters of the actor and both critic networks.
/// Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ActorParams& actor,
                     const CriticParams& critic);

struct Checkpoint {
  ActorParams actor;
  CriticParams critic;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace qprl::rl
