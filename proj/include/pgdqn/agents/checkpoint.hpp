#pragma once

#include <string>

#include "pgdqn/agents/network.hpp"

namespace pgdqn {

// Versioned JSON checkpoint of every behavior and target tensor plus the
// architecture record. Loading validates all shapes.
void save_checkpoint(const DualNetwork& net, const std::string& path);
DualNetwork load_checkpoint(const std::string& path);

}  // namespace pgdqn
