#include "clustersig/sigtree.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "clustersig/error.hpp"

namespace clustersig {

namespace {

SideLabels split_labels(const DataMatrix& data, std::span<const Index> members, Index feature,
                        double threshold) {
    SideLabels labels(members.size());
    for (Index p = 0; p < members.size(); ++p) {
        labels[p] = data(members[p], feature) <= threshold ? Side::A : Side::B;
    }
    return labels;
}

bool candidate_less(const SplitCandidate& a, const SplitCandidate& b) {
    return std::tuple(a.p_value, -a.separation_rank, a.feature, a.threshold) <
           std::tuple(b.p_value, -b.separation_rank, b.feature, b.threshold);
}

Index testable_size(const TwoSubsetTest& test, const TreeConfig& config) {
    return std::max(2 * config.min_leaf, test.min_pool_size() + 1);
}

std::vector<Index> sorted_members(std::span<const Index> members) {
    std::vector<Index> out(members.begin(), members.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<SplitCandidate> enumerate_splits(const DataMatrix& data, std::span<const Index> members,
                                             Index feature, Index min_leaf) {
    if (feature >= data.cols()) throw InvalidArgument("feature index out of range");
    std::vector<double> values;
    values.reserve(members.size());
    for (Index i : members) values.push_back(data(i, feature));
    std::sort(values.begin(), values.end());

    std::vector<SplitCandidate> out;
    const Index n = values.size();
    for (Index i = 0; i + 1 < n; ++i) {
        if (values[i] == values[i + 1]) continue;
        const Index left = i + 1;
        const Index right = n - left;
        if (left < min_leaf || right < min_leaf) continue;
        double threshold = values[i] + 0.5 * (values[i + 1] - values[i]);
        if (threshold >= values[i + 1]) threshold = values[i];
        out.push_back({feature, threshold, left, right, 1.0});
    }
    return out;
}

std::optional<SplitCandidate> best_split(const DataMatrix& data, std::span<const Index> members_in,
                                         const TwoSubsetTest& test, const TreeConfig& config) {
    if (members_in.size() < testable_size(test, config)) return std::nullopt;
    const std::vector<Index> members = sorted_members(members_in);

    std::vector<std::vector<SplitCandidate>> per_feature;
    std::size_t total = 0;
    for (Index f = 0; f < data.cols(); ++f) {
        per_feature.push_back(enumerate_splits(data, members, f, config.min_leaf));
        total += per_feature.back().size();
    }
    if (total == 0) return std::nullopt;

    const auto evaluator = test.prepare(data.select(members));
    std::optional<SplitCandidate> best;
    for (auto& candidates : per_feature) {
        for (auto& c : candidates) {
            try {
                const TestOutcome outcome =
                    evaluator->evaluate(split_labels(data, members, c.feature, c.threshold));
                c.p_value = outcome.p_value;
                if (outcome.no_boundary()) c.separation_rank = std::get<BtctDetail>(outcome.detail).boundary_rank;
            } catch (const NoBoundary&) {
                continue;
            }
            if (config.bonferroni) c.p_value = std::min(1.0, c.p_value * static_cast<double>(total));
            if (!best || candidate_less(c, *best)) best = c;
        }
    }
    if (best && best->p_value < config.alpha) return best;
    return std::nullopt;
}

namespace {

struct Grower {
    const DataMatrix& data;
    const TwoSubsetTest& test;
    const TreeConfig& config;
    ClusterTree& tree;

    std::unique_ptr<ClusterTreeNode> grow(std::vector<Index> members, int depth) {
        auto node = std::make_unique<ClusterTreeNode>();
        node->members = std::move(members);
        node->depth = depth;

        std::optional<SplitCandidate> split;
        if (depth >= config.max_depth) {
            if (node->members.size() >= testable_size(test, config)) {
                tree.warnings.push_back("maximum depth " + std::to_string(config.max_depth) +
                                        " reached; node with " +
                                        std::to_string(node->members.size()) + " samples kept as a leaf");
            }
        } else {
            split = best_split(data, node->members, test, config);
        }

        if (!split) {
            node->cluster_id = ++tree.leaf_count;
            return node;
        }

        std::vector<Index> left;
        std::vector<Index> right;
        for (Index i : node->members) {
            (data(i, split->feature) <= split->threshold ? left : right).push_back(i);
        }
        node->split = split;
        node->left = grow(std::move(left), depth + 1);
        node->right = grow(std::move(right), depth + 1);
        return node;
    }
};

void collect_assignment(const ClusterTreeNode& node, std::vector<int>& out) {
    if (node.is_leaf()) {
        for (Index i : node.members) out[i] = node.cluster_id;
        return;
    }
    collect_assignment(*node.left, out);
    collect_assignment(*node.right, out);
}

}  // namespace

ClusterTree grow_tree(const DataMatrix& data, const TwoSubsetTest& test, const TreeConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (config.min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
    ClusterTree tree;
    std::vector<Index> all(data.rows());
    for (Index i = 0; i < all.size(); ++i) all[i] = i;
    Grower grower{data, test, config, tree};
    tree.root = grower.grow(std::move(all), 0);
    return tree;
}

std::vector<int> ClusterTree::assignment() const {
    std::vector<int> out;
    if (!root) return out;
    out.assign(root->members.size(), 0);
    collect_assignment(*root, out);
    return out;
}

TestOutcome retest_split(const DataMatrix& data, const ClusterTreeNode& branch, const TwoSubsetTest& test) {
    if (branch.is_leaf()) throw InvalidArgument("node is a leaf");
    const auto evaluator = test.prepare(data.select(branch.members));
    return evaluator->evaluate(split_labels(data, branch.members, branch.split->feature, branch.split->threshold));
}

}  // namespace clustersig
