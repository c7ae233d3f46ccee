#pragma once

// Independent reference implementations used to check library results.

#include <cstdint>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "sentinel/common/rng.hpp"
#include "sentinel/pscft/call_flow.hpp"

namespace sentinel::testing {

/// Random function graph with up to `max_blocks` blocks; about half the
/// blocks carry one or two call statements tagged with unique ids in
/// `CallStatement::opcode`.
pscft::CallFunction random_call_function(Rng& rng, std::size_t max_blocks);

/// Pairs (a, b) of call ids where b is reachable from a: later in the same
/// block, or in a block reachable by a path of at least one edge.
/// Computed with a boolean transitive closure (Warshall).
std::set<std::pair<std::uint16_t, std::uint16_t>> call_reachability(const pscft::CallFunction& fn);

}  // namespace sentinel::testing
