#include "clustersig/subset_test.hpp"

#include <map>
#include <mutex>

#include "clustersig/error.hpp"

namespace clustersig {

namespace {

class BtctPoolEvaluator final : public PoolEvaluator {
public:
    BtctPoolEvaluator(const DistanceMatrix& dist, const BtctConfig& config) : inner_(dist, config) {}
    TestOutcome evaluate(std::span<const Side> labels) const override { return inner_.evaluate(labels); }

private:
    BtctEvaluator inner_;
};

class PermutationPoolEvaluator final : public PoolEvaluator {
public:
    PermutationPoolEvaluator(std::unique_ptr<LabelStatistic> stat, const PermutationConfig& config)
        : stat_(std::move(stat)), config_(config) {}
    // The null only depends on the side sizes, so it is cached per n_a.
    TestOutcome evaluate(std::span<const Side> labels) const override {
        const auto [n_a, n_b] = side_counts(labels);
        const double observed = (*stat_)(labels);
        std::shared_ptr<const PermutationNull> null;
        {
            std::lock_guard lock(mutex_);
            auto it = nulls_.find(n_a);
            if (it != nulls_.end()) null = it->second;
        }
        if (!null) {
            null = std::make_shared<const PermutationNull>(permutation_null(*stat_, n_a, n_b, config_));
            std::lock_guard lock(mutex_);
            nulls_.emplace(n_a, null);
        }
        return outcome_from_null(*stat_, observed, *null);
    }

private:
    std::unique_ptr<LabelStatistic> stat_;
    PermutationConfig config_;
    mutable std::mutex mutex_;
    mutable std::map<Index, std::shared_ptr<const PermutationNull>> nulls_;
};

class BtctTest final : public TwoSubsetTest {
public:
    explicit BtctTest(const BtctConfig& config) : config_(config) {
        if (config_.k < 1) throw InvalidArgument("k must be >= 1");
    }
    Method method() const noexcept override { return Method::Btct; }
    Index min_pool_size() const noexcept override { return static_cast<Index>(config_.k) + 1; }
    std::unique_ptr<PoolEvaluator> prepare(const DataMatrix& points) const override {
        return std::make_unique<BtctPoolEvaluator>(euclidean_distance_matrix(points), config_);
    }

private:
    BtctConfig config_;
};

class PermutationTest final : public TwoSubsetTest {
public:
    PermutationTest(Method method, const PermutationConfig& config) : method_(method), config_(config) {
        if (config_.count < 1) throw InvalidArgument("permutation count must be >= 1");
    }
    Method method() const noexcept override { return method_; }
    Index min_pool_size() const noexcept override { return method_ == Method::Mmd ? 4 : 2; }
    std::unique_ptr<PoolEvaluator> prepare(const DataMatrix& points) const override {
        DistanceMatrix dist = euclidean_distance_matrix(points);
        std::unique_ptr<LabelStatistic> stat;
        switch (method_) {
            case Method::FriedmanRafsky: stat = std::make_unique<FrStatistic>(dist); break;
            case Method::Energy: stat = std::make_unique<EnergyStatistic>(std::move(dist)); break;
            case Method::Mmd: {
                const double bw = median_heuristic_bandwidth(dist);
                stat = std::make_unique<MmdStatistic>(dist, bw);
                break;
            }
            case Method::Btct: throw InvalidArgument("not a permutation method");
        }
        return std::make_unique<PermutationPoolEvaluator>(std::move(stat), config_);
    }

private:
    Method method_;
    PermutationConfig config_;
};

}  // namespace

std::unique_ptr<TwoSubsetTest> make_test(Method method, const TestSettings& settings) {
    if (method == Method::Btct) return std::make_unique<BtctTest>(settings.btct);
    return std::make_unique<PermutationTest>(method, settings.permutation);
}

}  // namespace clustersig
