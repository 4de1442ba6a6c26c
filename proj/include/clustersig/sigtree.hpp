#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustersig/geometry.hpp"
#include "clustersig/subset_test.hpp"

namespace clustersig {

// Interpretable clustering tree: axis-aligned splits, each kept only when the
// two-subset test rejects at alpha; leaves are clusters.

struct SplitCandidate {
    Index feature = 0;
    double threshold = 0.0;  // left: value <= threshold
    Index left_count = 0;
    Index right_count = 0;
    double p_value = 1.0;
    // Among equal p-values the more separated split wins: for a BTCT split
    // with no boundary this is the rank at which the sides first meet.
    int separation_rank = 0;
};

struct TreeConfig {
    double alpha = 0.05;
    Index min_leaf = 8;
    int max_depth = 32;
    bool bonferroni = false;  // scale p by the number of candidates at the node
};

struct ClusterTreeNode {
    std::vector<Index> members;  // ascending
    int depth = 0;
    std::optional<SplitCandidate> split;  // set on branches
    std::unique_ptr<ClusterTreeNode> left;
    std::unique_ptr<ClusterTreeNode> right;
    int cluster_id = 0;  // leaves only, 1-based, left-to-right

    bool is_leaf() const noexcept { return !split.has_value(); }
};

struct ClusterTree {
    std::unique_ptr<ClusterTreeNode> root;
    std::vector<std::string> warnings;
    int leaf_count = 0;

    // Per-sample cluster id (1-based) over the rows the tree was grown on.
    std::vector<int> assignment() const;
};

// Midpoints between consecutive distinct values of `feature` over `members`
// that leave at least min_leaf samples on each side.
std::vector<SplitCandidate> enumerate_splits(const DataMatrix& data, std::span<const Index> members,
                                             Index feature, Index min_leaf);

// Smallest-p candidate over all features, returned only if p < alpha.
// Ties go to (p, larger separation_rank, feature, threshold). Nodes below
// max(2 * min_leaf, test.min_pool_size() + 1) members are untestable.
std::optional<SplitCandidate> best_split(const DataMatrix& data, std::span<const Index> members,
                                         const TwoSubsetTest& test, const TreeConfig& config);

ClusterTree grow_tree(const DataMatrix& data, const TwoSubsetTest& test, const TreeConfig& config = {});

// Re-evaluates `test` on the split a branch recorded.
TestOutcome retest_split(const DataMatrix& data, const ClusterTreeNode& branch, const TwoSubsetTest& test);

}  // namespace clustersig
