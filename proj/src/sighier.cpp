#include "clustersig/sighier.hpp"

#include <algorithm>

#include "clustersig/error.hpp"

namespace clustersig {

namespace {

SideLabels bisection_labels(std::span<const Index> members, const std::vector<Index>& first) {
    SideLabels labels(members.size(), Side::B);
    for (Index p = 0; p < members.size(); ++p) {
        if (std::binary_search(first.begin(), first.end(), members[p])) labels[p] = Side::A;
    }
    return labels;
}

struct Divider {
    const DataMatrix& data;
    const TwoSubsetTest& test;
    const HierarchyConfig& config;
    Hierarchy& out;

    std::unique_ptr<HierarchyNode> divide(std::vector<Index> members, int depth) {
        auto node = std::make_unique<HierarchyNode>();
        node->members = std::move(members);
        node->depth = depth;

        const Index m = node->members.size();
        if (m < std::max(config.min_node, test.min_pool_size()) || m < 2) return terminal(std::move(node));
        if (depth >= config.max_depth) {
            out.warnings.push_back("maximum depth reached; node with " + std::to_string(m) +
                                   " samples kept terminal");
            return terminal(std::move(node));
        }

        Bisection halves = ward_bisect(data, node->members);
        try {
            const auto evaluator = test.prepare(data.select(node->members));
            node->p_value = evaluator->evaluate(bisection_labels(node->members, halves.first)).p_value;
        } catch (const InsufficientSamples&) {
            return terminal(std::move(node));
        } catch (const NoBoundary&) {
            return terminal(std::move(node));
        }
        if (!(*node->p_value < config.alpha)) return terminal(std::move(node));

        node->left = divide(std::move(halves.first), depth + 1);
        node->right = divide(std::move(halves.second), depth + 1);
        return node;
    }

    std::unique_ptr<HierarchyNode> terminal(std::unique_ptr<HierarchyNode> node) {
        node->cluster_id = ++out.predicted_k;
        return node;
    }
};

void assign(const HierarchyNode& node, std::vector<int>& ids) {
    if (node.is_terminal()) {
        for (Index i : node.members) ids[i] = node.cluster_id;
        return;
    }
    assign(*node.left, ids);
    assign(*node.right, ids);
}

}  // namespace

Hierarchy divisive_cluster(const DataMatrix& data, const TwoSubsetTest& test, const HierarchyConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    Hierarchy out;
    std::vector<Index> all(data.rows());
    for (Index i = 0; i < all.size(); ++i) all[i] = i;
    Divider divider{data, test, config, out};
    out.root = divider.divide(std::move(all), 0);
    return out;
}

std::vector<int> flat_assignment(const HierarchyNode& root) {
    const Index n = root.members.empty() ? 0 : *std::max_element(root.members.begin(), root.members.end()) + 1;
    std::vector<int> ids(n, 0);
    assign(root, ids);
    return ids;
}

TestOutcome retest_bisection(const DataMatrix& data, const HierarchyNode& node, const TwoSubsetTest& test) {
    if (node.is_terminal()) throw InvalidArgument("node was not divided");
    const auto evaluator = test.prepare(data.select(node.members));
    return evaluator->evaluate(bisection_labels(node.members, node.left->members));
}

}  // namespace clustersig
