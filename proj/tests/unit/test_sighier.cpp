#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "clustersig/dataset.hpp"
#include "clustersig/error.hpp"
#include "clustersig/sighier.hpp"

using namespace clustersig;

namespace {

std::unique_ptr<TwoSubsetTest> btct() { return make_test(Method::Btct, {}); }

DataMatrix blobs(int k, Index n, std::uint64_t seed) {
    return generate_synthetic(BlobsSpec{.k = k, .n_per_blob = n, .separation = 10}, seed);
}

int count_internal(const HierarchyNode& node) {
    if (node.is_terminal()) return 0;
    return 1 + count_internal(*node.left) + count_internal(*node.right);
}

void check_node(const DataMatrix& data, const HierarchyNode& node, const TwoSubsetTest& test, double alpha) {
    if (node.is_terminal()) {
        EXPECT_EQ(node.right, nullptr);
        if (node.p_value) {
            EXPECT_GE(*node.p_value, alpha);
        }
        return;
    }
    ASSERT_TRUE(node.p_value.has_value());
    EXPECT_LT(*node.p_value, alpha);
    EXPECT_EQ(retest_bisection(data, node, test).p_value, *node.p_value);
    EXPECT_FALSE(node.left->members.empty());
    EXPECT_FALSE(node.right->members.empty());
    EXPECT_EQ(node.left->members.front(), node.members.front());
    std::vector<Index> merged;
    std::merge(node.left->members.begin(), node.left->members.end(), node.right->members.begin(),
               node.right->members.end(), std::back_inserter(merged));
    EXPECT_EQ(merged, node.members);
    EXPECT_EQ(node.left->depth, node.depth + 1);
    check_node(data, *node.left, test, alpha);
    check_node(data, *node.right, test, alpha);
}

}  // namespace

TEST(DivisiveCluster, SinglePoint) {
    const auto test = btct();
    const Hierarchy h = divisive_cluster(DataMatrix(1, 2, {0.5, 0.5}), *test);
    EXPECT_EQ(h.predicted_k, 1);
    EXPECT_TRUE(h.root->is_terminal());
    EXPECT_FALSE(h.root->p_value.has_value());
    EXPECT_EQ(flat_assignment(*h.root), std::vector<int>{1});
}

TEST(DivisiveCluster, SmallNodeIsTerminal) {
    const auto test = btct();
    const DataMatrix x = blobs(2, 5, 1);
    const Hierarchy h = divisive_cluster(x, *test);
    EXPECT_EQ(h.predicted_k, 1);
    EXPECT_EQ(flat_assignment(*h.root), std::vector<int>(10, 1));
}

TEST(DivisiveCluster, TwoSeparatedBlobs) {
    const auto test = btct();
    const DataMatrix x = blobs(2, 100, 4);
    const Hierarchy h = divisive_cluster(x, *test);
    EXPECT_EQ(h.predicted_k, 2);
    ASSERT_TRUE(h.root->p_value.has_value());
    EXPECT_LT(*h.root->p_value, 0.05);
    EXPECT_EQ(flat_assignment(*h.root), x.labels());
}

TEST(DivisiveCluster, SingleBlobUsuallyStaysWhole) {
    const auto test = btct();
    int ones = 0;
    const int seeds = 50;
    for (int s = 1; s <= seeds; ++s) {
        const DataMatrix x = generate_synthetic(GaussianSpec{.n = 200, .d = 2}, s);
        ones += divisive_cluster(x, *test).predicted_k == 1;
    }
    EXPECT_GE(ones, 0.9 * seeds);
}

TEST(DivisiveCluster, StructureAndRetest) {
    const auto test = btct();
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const DataMatrix x = blobs(3, 50, s);
        const Hierarchy h = divisive_cluster(x, *test);
        check_node(x, *h.root, *test, 0.05);
        EXPECT_EQ(h.predicted_k, count_internal(*h.root) + 1);

        const std::vector<int> ids = flat_assignment(*h.root);
        ASSERT_EQ(ids.size(), x.rows());
        const std::set<int> distinct(ids.begin(), ids.end());
        EXPECT_EQ(static_cast<int>(distinct.size()), h.predicted_k);
        EXPECT_EQ(*distinct.begin(), 1);
        EXPECT_EQ(*distinct.rbegin(), h.predicted_k);
    }
}

TEST(DivisiveCluster, ThreeTerminalIdsInDepthFirstOrder) {
    const auto test = btct();
    const DataMatrix x = blobs(3, 50, 2);
    const Hierarchy h = divisive_cluster(x, *test);
    ASSERT_EQ(h.predicted_k, 3);
    const std::vector<int> ids = flat_assignment(*h.root);
    std::vector<int> counts(4, 0);
    for (int id : ids) ++counts[id];
    EXPECT_EQ(counts[0], 0);
    EXPECT_EQ(counts[1] + counts[2] + counts[3], 150);
    // Ids follow the first appearance of each terminal in depth-first order,
    // and the left child always holds the smallest index.
    EXPECT_EQ(ids.front(), 1);
}

TEST(DivisiveCluster, MonotoneInAlpha) {
    const auto test = btct();
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const DataMatrix x = generate_synthetic(BlobsSpec{.k = 3, .n_per_blob = 40, .separation = 4}, s);
        int prev = 0;
        for (double alpha : {0.001, 0.01, 0.05, 0.2, 0.5}) {
            const int k = divisive_cluster(x, *test, HierarchyConfig{.alpha = alpha}).predicted_k;
            EXPECT_GE(k, prev) << "seed " << s << " alpha " << alpha;
            prev = k;
        }
    }
}

TEST(DivisiveCluster, RejectsBadAlpha) {
    const auto test = btct();
    const DataMatrix x = blobs(2, 10, 1);
    EXPECT_THROW(divisive_cluster(x, *test, HierarchyConfig{.alpha = 0.0}), InvalidArgument);
    EXPECT_THROW(divisive_cluster(x, *test, HierarchyConfig{.alpha = 1.0}), InvalidArgument);
}

TEST(DivisiveCluster, DepthGuardWarns) {
    const auto test = btct();
    const Hierarchy h = divisive_cluster(blobs(4, 40, 3), *test, HierarchyConfig{.max_depth = 1});
    EXPECT_LE(h.predicted_k, 2);
    EXPECT_FALSE(h.warnings.empty());
}
