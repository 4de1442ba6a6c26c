#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clustersig/geometry.hpp"
#include "clustersig/subset_test.hpp"

namespace clustersig {

// Divisive hierarchical clustering: each node is bisected by Ward
// agglomeration and split only when the test rejects at alpha.

struct HierarchyConfig {
    double alpha = 0.05;
    Index min_node = 16;
    int max_depth = 64;
};

struct HierarchyNode {
    std::vector<Index> members;  // ascending
    int depth = 0;
    std::optional<double> p_value;  // set once the node's bisection was tested
    std::unique_ptr<HierarchyNode> left;   // side holding the smallest member index
    std::unique_ptr<HierarchyNode> right;
    int cluster_id = 0;  // terminal nodes only, 1-based depth-first

    bool is_terminal() const noexcept { return left == nullptr; }
};

struct Hierarchy {
    std::unique_ptr<HierarchyNode> root;
    int predicted_k = 0;
    std::vector<std::string> warnings;
};

Hierarchy divisive_cluster(const DataMatrix& data, const TwoSubsetTest& test,
                           const HierarchyConfig& config = {});

// Terminal nodes numbered in depth-first (left first) order; one id per sample.
std::vector<int> flat_assignment(const HierarchyNode& root);

// Re-evaluates `test` on an internal node's recorded bisection.
TestOutcome retest_bisection(const DataMatrix& data, const HierarchyNode& node, const TwoSubsetTest& test);

}  // namespace clustersig
