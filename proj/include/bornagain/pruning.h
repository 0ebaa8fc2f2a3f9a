#pragma once

#include <cstdint>
#include <vector>

#include "bornagain/born_again_tree.h"
#include "bornagain/samples.h"

namespace bornagain {

// Number of samples reaching each node, indexed like tree().nodes().
std::vector<std::uint64_t> route_samples(const BornAgainTree& tree, const SampleSet& samples);

// Occupancy-based post-pruning. Working from the leaves up, a split with no
// sample on one side is replaced by its other child. A subtree reached by no
// sample at all (only possible at the root) collapses to its leftmost leaf,
// which is the class of the subtree's lower-corner cell. Every sample keeps
// its class.
BornAgainTree post_prune(const BornAgainTree& tree, const SampleSet& samples);

}  // namespace bornagain
