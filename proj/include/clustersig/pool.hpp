#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "clustersig/geometry.hpp"

namespace clustersig {

// Subset membership of a pooled sample: A is label 1, B is label 2.
enum class Side : std::uint8_t { A = 1, B = 2 };

using SideLabels = std::vector<Side>;

// Z = A u B with per-row subset labels. Rows of A come first when built from
// two matrices.
class LabeledPool {
public:
    LabeledPool(DataMatrix points, SideLabels labels);
    LabeledPool(const DataMatrix& a, const DataMatrix& b);

    // Rows `a` then rows `b` of `data`. The index sets must be disjoint.
    static LabeledPool from_subsets(const DataMatrix& data, std::span<const Index> a,
                                    std::span<const Index> b);

    const DataMatrix& points() const noexcept { return points_; }
    const SideLabels& labels() const noexcept { return labels_; }
    Index size() const noexcept { return labels_.size(); }
    Index count_a() const noexcept { return n_a_; }
    Index count_b() const noexcept { return n_b_; }

private:
    DataMatrix points_;
    SideLabels labels_;
    Index n_a_ = 0;
    Index n_b_ = 0;
};

// Counts of A and B in a label vector; throws InvalidArgument if either is 0.
std::pair<Index, Index> side_counts(std::span<const Side> labels);

enum class Method { Btct, FriedmanRafsky, Energy, Mmd };

std::string_view method_name(Method m);   // "btct", "fr", "energy", "mmd"
Method parse_method(std::string_view name);

struct BtctDetail {
    std::vector<Index> boundary;          // pool indices, ascending
    std::vector<Index> partner;           // mutual nearest neighbour of boundary[i]
    int boundary_rank = 1;                // neighbour rank used; above 1 after widening, above k
                                          // when separated (first rank with a cross pair)
    std::vector<int> same_label_counts;   // t_i
    std::vector<double> point_p_values;   // p_i
    bool no_boundary = false;
};

struct PermutationDetail {
    std::size_t permutations = 0;  // arrangements evaluated (excluding the observed one when sampled)
    std::size_t extreme = 0;       // arrangements at least as extreme as observed
    bool exhaustive = false;
};

// Result of any two-subset test. p_value is in [0, 1]; for BTCT with an empty
// boundary it carries the policy value and detail.no_boundary is set.
struct TestOutcome {
    Method method = Method::Btct;
    double statistic = 0.0;
    double p_value = 1.0;
    std::variant<BtctDetail, PermutationDetail> detail;

    bool rejects(double alpha) const noexcept { return p_value < alpha; }
    bool no_boundary() const noexcept {
        const auto* d = std::get_if<BtctDetail>(&detail);
        return d != nullptr && d->no_boundary;
    }
};

}  // namespace clustersig
