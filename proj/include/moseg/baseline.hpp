#pragma once

#include <vector>

#include "moseg/model.hpp"

namespace moseg {

/// Number of motion-labeled (non-zero) entries of a partial segmentation.
int inlier_count(const PartialSegmentation& partial);

/// Spanning tree of the segmented-pair graph with maximal total inlier
/// weight; ties prefer lexicographically smaller (i,j) edges.
struct PairTree {
    std::vector<ImagePair> edges;
    long long total_weight = 0;
};

PairTree max_spanning_tree(const Dataset& dataset);

/// Tree-propagation comparator: the root (lowest-index image) is labeled
/// from its heaviest tree edge, every other image from the single tree edge
/// to its parent; points unmatched along that edge stay 0.
std::vector<TotalSegmentation> propagate_baseline(const Dataset& dataset, const PairTree& tree);

}  // namespace moseg
