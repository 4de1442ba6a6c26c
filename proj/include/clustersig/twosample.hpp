#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clustersig/geometry.hpp"
#include "clustersig/pool.hpp"

namespace clustersig {

// Classic two-sample baselines (Friedman-Rafsky, energy distance, Gaussian
// MMD) with p-values from label permutations.

enum class Tail {
    Lower,  // small statistic is evidence against H0 (FR: few cross edges)
    Upper,  // large statistic is evidence against H0 (energy, MMD)
};

enum class PermutationMode {
    Auto,        // exhaustive when the number of arrangements <= exhaustive_limit
    Sampled,
    Exhaustive,
};

struct PermutationConfig {
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    PermutationMode mode = PermutationMode::Auto;
    std::uint64_t exhaustive_limit = 10000;
};

// A statistic over a fixed pool geometry, evaluated for any A/B labelling.
class LabelStatistic {
public:
    virtual ~LabelStatistic() = default;
    virtual double operator()(std::span<const Side> labels) const = 0;
    virtual Tail tail() const noexcept = 0;
    virtual Method method() const noexcept = 0;
};

// Number of MST edges joining different labels. The tree is built once.
class FrStatistic final : public LabelStatistic {
public:
    explicit FrStatistic(const DistanceMatrix& dist);
    double operator()(std::span<const Side> labels) const override;
    Tail tail() const noexcept override { return Tail::Lower; }
    Method method() const noexcept override { return Method::FriedmanRafsky; }

    const SpanningTree& tree() const noexcept { return tree_; }

private:
    SpanningTree tree_;
};

// V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'|.
class EnergyStatistic final : public LabelStatistic {
public:
    explicit EnergyStatistic(DistanceMatrix dist);
    double operator()(std::span<const Side> labels) const override;
    Tail tail() const noexcept override { return Tail::Upper; }
    Method method() const noexcept override { return Method::Energy; }

private:
    DistanceMatrix dist_;
    std::vector<double> row_sums_;
    double total_ = 0.0;
};

// Unbiased MMD^2 with kernel exp(-|x-y|^2 / (2 sigma^2)). Needs both sides >= 2.
class MmdStatistic final : public LabelStatistic {
public:
    MmdStatistic(const DistanceMatrix& dist, double bandwidth);
    double operator()(std::span<const Side> labels) const override;
    Tail tail() const noexcept override { return Tail::Upper; }
    Method method() const noexcept override { return Method::Mmd; }

    double bandwidth() const noexcept { return bandwidth_; }

private:
    double bandwidth_;
    DistanceMatrix kernel_;
    std::vector<double> row_sums_;
    double total_ = 0.0;
};

int fr_statistic(const LabeledPool& pool);
double energy_statistic(const DataMatrix& a, const DataMatrix& b);
double mmd_statistic(const DataMatrix& a, const DataMatrix& b, double bandwidth);

// Median of the m(m-1)/2 pairwise distances; falls back to the smallest
// positive distance, then 1, when the median is 0.
double median_heuristic_bandwidth(const DistanceMatrix& dist);
double median_heuristic_bandwidth(const LabeledPool& pool);

// C(m, n_a), saturating at UINT64_MAX.
std::uint64_t arrangement_count(std::size_t m, std::size_t n_a);

// Statistic values over relabellings with fixed side sizes, sorted ascending.
// Sampled: permutation r shuffles the canonical labelling (A..A B..B) with
// stream (seed, r), so the null depends only on (n_a, n_b, config) and can be
// shared by every labelling with the same side sizes.
struct PermutationNull {
    std::vector<double> values;
    bool exhaustive = false;
};

PermutationNull permutation_null(const LabelStatistic& statistic, Index n_a, Index n_b,
                                 const PermutationConfig& config);

// Sampled: p = (1 + #extreme) / (1 + count). Exhaustive: p = #extreme / C(m, n_a)
// over all arrangements, observed included.
TestOutcome outcome_from_null(const LabelStatistic& statistic, double observed,
                              const PermutationNull& null);

TestOutcome permutation_p(std::span<const Side> labels, const LabelStatistic& statistic,
                          const PermutationConfig& config);

// Builds the statistic for `method` (not Btct) on the pool and runs permutation_p.
TestOutcome permutation_test(const LabeledPool& pool, Method method,
                             const PermutationConfig& config = {});

}  // namespace clustersig
