#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "clustersig/btct.hpp"
#include "clustersig/dataset.hpp"
#include "clustersig/error.hpp"
#include "clustersig/twosample.hpp"
#include "oracles.hpp"

using namespace clustersig;

namespace {

DataMatrix line(std::vector<double> xs) {
    const Index n = xs.size();
    return DataMatrix(n, 1, std::move(xs));
}

DataMatrix random_points(Index m, std::uint64_t seed) { return generate_synthetic(GaussianSpec{.n = m, .d = 2}, seed); }

SideLabels swapped(const SideLabels& l) {
    SideLabels out(l);
    for (Side& s : out) s = s == Side::A ? Side::B : Side::A;
    return out;
}

class Constant final : public LabelStatistic {
public:
    double operator()(std::span<const Side>) const override { return 3.0; }
    Tail tail() const noexcept override { return Tail::Upper; }
    Method method() const noexcept override { return Method::Energy; }
};

// Position-weighted sum of A labels: strictly ordered, so the canonical
// labelling is the unique maximum.
class Weighted final : public LabelStatistic {
public:
    double operator()(std::span<const Side> l) const override {
        double s = 0;
        for (std::size_t i = 0; i < l.size(); ++i)
            if (l[i] == Side::A) s += std::ldexp(1.0, -static_cast<int>(i));
        return s;
    }
    Tail tail() const noexcept override { return Tail::Upper; }
    Method method() const noexcept override { return Method::Energy; }
};

}  // namespace

TEST(FrStatistic, Examples) {
    EXPECT_EQ(fr_statistic(LabeledPool(line({0.0, 1.0}), line({1.1, 2.5}))), 1);
    EXPECT_EQ(fr_statistic(LabeledPool(line({0.0}), line({1.0}))), 1);
    const DistanceMatrix d = euclidean_distance_matrix(line({0, 1, 3, 7}));
    const FrStatistic fr(d);
    EXPECT_EQ(fr(SideLabels(4, Side::A)), 0.0);
}

TEST(FrStatistic, MatchesBruteForceTree) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Index m = 2 + seed % 6;
        const DataMatrix x = random_points(m, seed);
        const DistanceMatrix d = euclidean_distance_matrix(x);
        const FrStatistic fr(d);
        EXPECT_NEAR(fr.tree().total_weight(), oracle::brute_mst_weight(x), 1e-12);
        for (const auto& l : oracle::all_labellings(m, m / 2)) {
            if (m / 2 == 0) continue;
            EXPECT_EQ(fr(l), oracle::fr(x, l));
        }
    }
}

TEST(EnergyStatistic, Examples) {
    EXPECT_DOUBLE_EQ(energy_statistic(line({0}), line({1})), 2.0);
    EXPECT_DOUBLE_EQ(energy_statistic(line({0, 0}), line({1, 1})), 2.0);
    EXPECT_NEAR(energy_statistic(line({0, 3, 4}), line({4, 0, 3})), 0.0, 1e-12);
}

TEST(EnergyStatistic, IsometryInvariantAndMatchesDefinition) {
    const DataMatrix x = random_points(12, 4);
    SideLabels l(12, Side::A);
    for (Index i = 7; i < 12; ++i) l[i] = Side::B;
    const EnergyStatistic e{euclidean_distance_matrix(x)};
    EXPECT_NEAR(e(l), oracle::energy(x, l), 1e-12);

    std::vector<double> moved;
    for (Index i = 0; i < x.rows(); ++i) {
        moved.push_back(-x(i, 1) + 4.0);
        moved.push_back(x(i, 0) - 2.5);
    }
    const EnergyStatistic e2{euclidean_distance_matrix(DataMatrix(12, 2, moved))};
    EXPECT_NEAR(e2(l), e(l), 1e-12);
}

TEST(MmdStatistic, Examples) {
    // The unbiased form drops the within-set diagonal but keeps the cross one,
    // so identical sets give exp(-2) - 1 here rather than 0.
    EXPECT_NEAR(mmd_statistic(line({0, 2}), line({0, 2}), 1.0), std::exp(-2.0) - 1.0, 1e-15);
    const double cross = (2 * std::exp(-12.5) + std::exp(-13.005) + std::exp(-12.005)) / 4;
    EXPECT_NEAR(mmd_statistic(line({0, 0.1}), line({5, 5.1}), 1.0), 2 * std::exp(-0.005) - 2 * cross, 1e-15);
    EXPECT_NEAR(mmd_statistic(line({0, 0.1}), line({5, 5.1}), 1.0), 1.990, 1e-3);
    EXPECT_THROW(mmd_statistic(line({0, 1}), line({2, 3}), 0.0), InvalidArgument);
    EXPECT_THROW(mmd_statistic(line({0, 1}), line({2, 3}), -1.0), InvalidArgument);
}

TEST(MmdStatistic, MatchesDefinition) {
    const DataMatrix x = random_points(11, 9);
    const DistanceMatrix d = euclidean_distance_matrix(x);
    const double sigma = median_heuristic_bandwidth(d);
    const MmdStatistic mmd(d, sigma);
    for (const auto& l : oracle::all_labellings(11, 4)) EXPECT_NEAR(mmd(l), oracle::mmd(x, l, sigma), 1e-12);
}

TEST(MedianBandwidth, Examples) {
    EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(euclidean_distance_matrix(line({0, 1, 3}))), 2.0);
    EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(euclidean_distance_matrix(line({0, 1, 2, 3}))), 1.5);
    EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(euclidean_distance_matrix(line({4, 4, 4}))), 1.0);
    // Median zero but a positive distance exists.
    EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(euclidean_distance_matrix(line({4, 4, 4, 4, 6.5}))), 2.5);
}

TEST(Statistics, LabelSwapSymmetric) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DataMatrix x = random_points(15, seed);
        const DistanceMatrix d = euclidean_distance_matrix(x);
        SideLabels l(15, Side::B);
        for (Index i = 0; i < 15; i += 2) l[i] = Side::A;
        const FrStatistic fr(d);
        const EnergyStatistic e(d);
        const MmdStatistic mmd(d, median_heuristic_bandwidth(d));
        EXPECT_EQ(fr(l), fr(swapped(l)));
        EXPECT_NEAR(e(l), e(swapped(l)), 1e-12);
        EXPECT_NEAR(mmd(l), mmd(swapped(l)), 1e-12);
    }
}

TEST(ArrangementCount, ExactAndSaturating) {
    EXPECT_EQ(arrangement_count(4, 2), 6u);
    EXPECT_EQ(arrangement_count(10, 5), 252u);
    EXPECT_EQ(arrangement_count(60, 30), oracle::choose(60, 30));
    EXPECT_EQ(arrangement_count(500, 250), UINT64_MAX);
}

TEST(PermutationP, ConstantStatisticGivesOne) {
    const SideLabels l{Side::A, Side::A, Side::B, Side::B, Side::A, Side::B, Side::B, Side::A, Side::B, Side::A,
                       Side::B, Side::A, Side::B, Side::A, Side::B, Side::A};
    for (PermutationMode mode : {PermutationMode::Sampled, PermutationMode::Exhaustive}) {
        const TestOutcome out = permutation_p(l, Constant{}, {.count = 200, .seed = 1, .mode = mode});
        EXPECT_EQ(out.p_value, 1.0);
    }
}

TEST(PermutationP, AddOneFloor) {
    // 30 labels, 15 A: C(30,15) far exceeds the exhaustive limit.
    SideLabels l(30, Side::B);
    std::fill(l.begin(), l.begin() + 15, Side::A);
    const TestOutcome out = permutation_p(l, Weighted{}, {.count = 99, .seed = 5});
    EXPECT_DOUBLE_EQ(out.p_value, 1.0 / 100);
    const auto& d = std::get<PermutationDetail>(out.detail);
    EXPECT_EQ(d.permutations, 99u);
    EXPECT_FALSE(d.exhaustive);
}

TEST(PermutationP, WithinBoundsAndDeterministic) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DataMatrix x = random_points(40, seed);
        SideLabels l(40, Side::A);
        for (Index i = 0; i < 40; ++i)
            if (x(i, 0) > 0) l[i] = Side::B;
        if (std::count(l.begin(), l.end(), Side::A) == 0 || std::count(l.begin(), l.end(), Side::B) == 0) continue;
        const LabeledPool pool(x, l);
        for (Method m : {Method::FriedmanRafsky, Method::Energy, Method::Mmd}) {
            const PermutationConfig cfg{.count = 50, .seed = seed};
            const TestOutcome a = permutation_test(pool, m, cfg);
            EXPECT_GE(a.p_value, 1.0 / 51);
            EXPECT_LE(a.p_value, 1.0);
            EXPECT_EQ(a.p_value, permutation_test(pool, m, cfg).p_value);
            EXPECT_EQ(a.method, m);
        }
    }
}

TEST(PermutationP, ExhaustiveMatchesEnumeration) {
    for (Index m = 4; m <= 10; ++m) {
        const DataMatrix x = random_points(m, 100 + m);
        const Index n_a = m / 2;
        const SideLabels l = oracle::all_labellings(m, n_a)[m % 3];
        const LabeledPool pool(x, l);
        const auto all = oracle::all_labellings(m, n_a);
        const double s0 = oracle::energy(x, l);
        long extreme = 0;
        for (const auto& q : all)
            if (oracle::energy(x, q) >= s0 - 1e-12) ++extreme;
        const TestOutcome out = permutation_test(pool, Method::Energy, {.count = 1000, .seed = 3});
        EXPECT_TRUE(std::get<PermutationDetail>(out.detail).exhaustive);
        EXPECT_NEAR(out.p_value, static_cast<double>(extreme) / all.size(), 1e-12) << "m=" << m;
    }
    // Four points, two per side: six arrangements.
    const LabeledPool four(line({0.0, 1.0}), line({1.1, 2.5}));
    const TestOutcome fr = permutation_test(four, Method::FriedmanRafsky, {});
    EXPECT_EQ(std::get<PermutationDetail>(fr.detail).permutations, 6u);
    long le = 0;
    for (const auto& q : oracle::all_labellings(4, 2)) le += oracle::fr(four.points(), q) <= 1;
    EXPECT_DOUBLE_EQ(fr.p_value, le / 6.0);
}

TEST(PermutationP, SampledNullFitsExhaustiveDistribution) {
    const DataMatrix x = random_points(9, 77);
    const DistanceMatrix d = euclidean_distance_matrix(x);
    const FrStatistic fr(d);
    const PermutationNull exact = permutation_null(fr, 4, 5, {.mode = PermutationMode::Exhaustive});
    ASSERT_EQ(exact.values.size(), 126u);
    const std::size_t draws = 4000;
    const PermutationNull sampled = permutation_null(fr, 4, 5, {.count = draws, .seed = 11, .mode = PermutationMode::Sampled});
    ASSERT_EQ(sampled.values.size(), draws);

    std::map<double, double> expected, observed;
    for (double v : exact.values) expected[v] += static_cast<double>(draws) / exact.values.size();
    for (double v : sampled.values) observed[v] += 1;
    for (const auto& [v, n] : observed) ASSERT_TRUE(expected.count(v)) << v;

    // Pool sparse cells until each expects at least 5.
    double chi2 = 0, e_acc = 0, o_acc = 0;
    int cells = 0;
    for (const auto& [v, e] : expected) {
        e_acc += e;
        o_acc += observed[v];
        if (e_acc >= 5) {
            chi2 += (o_acc - e_acc) * (o_acc - e_acc) / e_acc;
            ++cells;
            e_acc = o_acc = 0;
        }
    }
    if (e_acc > 0) chi2 += (o_acc - e_acc) * (o_acc - e_acc) / std::max(e_acc, 1e-9);
    ASSERT_GE(cells, 2);
    EXPECT_GT(chi_square_sf(chi2, cells - 1), 0.01) << "chi2=" << chi2 << " cells=" << cells;
}
