#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "clustersig/geometry.hpp"
#include "clustersig/pool.hpp"

namespace clustersig {

// Boundary-based two-cluster test.
//
// A sample of the pooled set is a boundary point when its nearest neighbour
// is mutual and carries the other subset label. For each boundary point the
// number t of same-label samples among its k nearest neighbours is Bin(k, 1/2)
// under the null, giving an upper-tail p-value; the per-point p-values are
// combined with Fisher's method against chi^2 with 2b degrees of freedom.

// Widen: when no mutual 1-NN pair crosses the subsets, use the smallest rank
// r <= k at which some cross pair are mutual r-nearest neighbours; t is then
// counted over the k neighbours starting at the partner. A point whose whole
// own side lies nearer than its partner is dropped. With no pair up to rank k,
// or none left after dropping, the subsets are treated as separated (p = 0)
// and the detail records the rank at which the first cross pair appears.
enum class EmptyBoundaryPolicy {
    Widen,
    RejectOnEmpty,  // p = 0
    AcceptOnEmpty,  // p = 1
    Error,          // throw NoBoundary
};

struct BtctConfig {
    int k = 7;
    EmptyBoundaryPolicy empty_boundary = EmptyBoundaryPolicy::Widen;
    bool mid_p = false;  // P(T > t) + P(T = t) / 2 instead of P(T >= t)
};

struct BoundaryReport {
    std::vector<Index> boundary;  // ascending pool indices
    std::vector<Index> partner;   // partner[i] is the mutual r-NN of boundary[i]
    int rank = 1;                 // r; above 1 only after widening

    Index count() const noexcept { return boundary.size(); }
};

BoundaryReport detect_boundary(const LabeledPool& pool);

// t for pool row `point` with a k-neighbourhood taken in the whole pool.
int boundary_statistic(const LabeledPool& pool, Index point, int k);

// P(T >= t) for T ~ Bin(k, 1/2). Exact integer arithmetic up to k = 60.
double binomial_tail_p(int t, int k);
double binomial_mid_p(int t, int k);

// Upper tail of chi^2(dof) at x.
double chi_square_sf(double x, int dof);

struct FisherResult {
    double statistic;
    double p_value;
};

FisherResult fisher_combine(std::span<const double> p_values);

// Precomputed neighbourhoods of a fixed pool geometry; evaluates BTCT for any
// A/B labelling of the same points. This is what the clustering applications
// use: every candidate split of a node shares one geometry.
class BtctEvaluator {
public:
    BtctEvaluator(const DistanceMatrix& dist, BtctConfig config);

    Index size() const noexcept { return neighbors_.size(); }
    const BtctConfig& config() const noexcept { return config_; }

    // Mutual 1-NN boundary.
    BoundaryReport boundary(std::span<const Side> labels) const;
    // Cross pairs that are mutual r-nearest neighbours for the smallest such
    // r <= k; empty when there is none.
    BoundaryReport widened_boundary(std::span<const Side> labels) const;
    // Smallest r for which some cross pair are mutual r-nearest neighbours,
    // over full neighbour orderings (so at most size() - 1).
    int separation_rank(std::span<const Side> labels) const;
    TestOutcome evaluate(std::span<const Side> labels) const;

private:
    BtctConfig config_;
    std::vector<NeighborList> neighbors_;
    DistanceMatrix dist_;
    // ranks_[i * m + j]: 1-based position of j in i's full ordering; built on first use.
    mutable std::vector<std::uint32_t> ranks_;
    mutable std::once_flag ranks_once_;
};

TestOutcome btct_test(const LabeledPool& pool, const BtctConfig& config = {});
TestOutcome btct_test(const DataMatrix& a, const DataMatrix& b, const BtctConfig& config = {});

}  // namespace clustersig
