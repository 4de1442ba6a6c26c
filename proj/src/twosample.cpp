#include "clustersig/twosample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clustersig/error.hpp"
#include "clustersig/rng.hpp"

namespace clustersig {

namespace {

void check_size(std::span<const Side> labels, Index m) {
    if (labels.size() != m) throw InvalidArgument("label count does not match pool size");
}

// Cross-sum over A x B of a symmetric matrix plus the row-sum mass of A.
struct CrossSums {
    double cross = 0.0;   // sum_{i in A, j in B} M(i, j)
    double a_rows = 0.0;  // sum_{i in A} sum_j M(i, j)
    Index n_a = 0;
    Index n_b = 0;
};

CrossSums cross_sums(const DistanceMatrix& mat, std::span<const double> row_sums,
                     std::span<const Side> labels) {
    CrossSums s;
    std::vector<Index> b_idx;
    b_idx.reserve(labels.size());
    for (Index j = 0; j < labels.size(); ++j) {
        if (labels[j] == Side::B) b_idx.push_back(j);
    }
    s.n_b = b_idx.size();
    for (Index i = 0; i < labels.size(); ++i) {
        if (labels[i] != Side::A) continue;
        ++s.n_a;
        s.a_rows += row_sums[i];
        const double* row = mat.row(i).data();
        double acc = 0.0;
        for (Index j : b_idx) acc += row[j];
        s.cross += acc;
    }
    if (s.n_a == 0 || s.n_b == 0) throw InvalidArgument("both subsets must be non-empty");
    return s;
}

std::vector<double> sums_of_rows(const DistanceMatrix& mat, double& total) {
    std::vector<double> sums(mat.size(), 0.0);
    total = 0.0;
    for (Index i = 0; i < mat.size(); ++i) {
        for (double v : mat.row(i)) sums[i] += v;
        total += sums[i];
    }
    return sums;
}

}  // namespace

FrStatistic::FrStatistic(const DistanceMatrix& dist) : tree_(minimum_spanning_tree(dist)) {}

double FrStatistic::operator()(std::span<const Side> labels) const {
    check_size(labels, tree_.edges.size() + 1);
    int cross = 0;
    for (const auto& e : tree_.edges) {
        if (labels[e.i] != labels[e.j]) ++cross;
    }
    return cross;
}

EnergyStatistic::EnergyStatistic(DistanceMatrix dist) : dist_(std::move(dist)) {
    row_sums_ = sums_of_rows(dist_, total_);
}

double EnergyStatistic::operator()(std::span<const Side> labels) const {
    check_size(labels, dist_.size());
    const CrossSums s = cross_sums(dist_, row_sums_, labels);
    const double within_a = s.a_rows - s.cross;               // ordered pairs, zero diagonal
    const double within_b = total_ - s.a_rows - s.cross;
    const auto na = static_cast<double>(s.n_a);
    const auto nb = static_cast<double>(s.n_b);
    return 2.0 * s.cross / (na * nb) - within_a / (na * na) - within_b / (nb * nb);
}

MmdStatistic::MmdStatistic(const DistanceMatrix& dist, double bandwidth) : bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw InvalidArgument("MMD bandwidth must be positive");
    }
    const Index m = dist.size();
    const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
    std::vector<double> k(m * m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            const double d = dist(i, j);
            k[i * m + j] = std::exp(-d * d * scale);
        }
    }
    kernel_ = DistanceMatrix(m, std::move(k));
    row_sums_ = sums_of_rows(kernel_, total_);
}

double MmdStatistic::operator()(std::span<const Side> labels) const {
    check_size(labels, kernel_.size());
    const CrossSums s = cross_sums(kernel_, row_sums_, labels);
    if (s.n_a < 2 || s.n_b < 2) {
        throw InsufficientSamples("unbiased MMD needs at least 2 samples per subset");
    }
    const auto na = static_cast<double>(s.n_a);
    const auto nb = static_cast<double>(s.n_b);
    // Kernel diagonal is exactly 1.
    const double within_a = s.a_rows - s.cross - na;
    const double within_b = total_ - s.a_rows - s.cross - nb;
    return within_a / (na * (na - 1.0)) + within_b / (nb * (nb - 1.0)) -
           2.0 * s.cross / (na * nb);
}

int fr_statistic(const LabeledPool& pool) {
    const FrStatistic stat(euclidean_distance_matrix(pool.points()));
    return static_cast<int>(stat(pool.labels()));
}

double energy_statistic(const DataMatrix& a, const DataMatrix& b) {
    const LabeledPool pool(a, b);
    const EnergyStatistic stat(euclidean_distance_matrix(pool.points()));
    return stat(pool.labels());
}

double mmd_statistic(const DataMatrix& a, const DataMatrix& b, double bandwidth) {
    const LabeledPool pool(a, b);
    const MmdStatistic stat(euclidean_distance_matrix(pool.points()), bandwidth);
    return stat(pool.labels());
}

double median_heuristic_bandwidth(const DistanceMatrix& dist) {
    const Index m = dist.size();
    if (m < 2) throw InsufficientSamples("bandwidth heuristic needs at least 2 samples");
    std::vector<double> d;
    d.reserve(m * (m - 1) / 2);
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j) d.push_back(dist(i, j));
    }
    const std::size_t n = d.size();
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(d.begin(), mid, d.end());
    double median = *mid;
    if (n % 2 == 0) {
        const double lower = *std::max_element(d.begin(), mid);
        median = 0.5 * (lower + median);
    }
    if (median > 0.0) return median;
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : d) {
        if (v > 0.0) smallest = std::min(smallest, v);
    }
    return std::isfinite(smallest) ? smallest : 1.0;
}

double median_heuristic_bandwidth(const LabeledPool& pool) {
    return median_heuristic_bandwidth(euclidean_distance_matrix(pool.points()));
}

std::uint64_t arrangement_count(std::size_t m, std::size_t n_a) {
    if (n_a > m) return 0;
    const std::size_t r = std::min(n_a, m - n_a);
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= r; ++i) {
        std::uint64_t scaled = 0;
        if (__builtin_mul_overflow(c, static_cast<std::uint64_t>(m - r + i), &scaled)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        c = scaled / i;
    }
    return c;
}

PermutationNull permutation_null(const LabelStatistic& statistic, Index n_a, Index n_b,
                                 const PermutationConfig& config) {
    if (config.count < 1) throw InvalidArgument("permutation count must be >= 1");
    if (n_a == 0 || n_b == 0) throw InvalidArgument("both subsets must be non-empty");
    const std::uint64_t arrangements = arrangement_count(n_a + n_b, n_a);

    PermutationNull null;
    null.exhaustive =
        config.mode == PermutationMode::Exhaustive ||
        (config.mode == PermutationMode::Auto && arrangements <= config.exhaustive_limit);

    SideLabels perm(n_a, Side::A);
    perm.resize(n_a + n_b, Side::B);
    if (null.exhaustive) {
        null.values.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(arrangements, 1u << 20)));
        do {
            null.values.push_back(statistic(perm));
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        const SideLabels canonical = perm;
        null.values.reserve(config.count);
        for (std::size_t r = 0; r < config.count; ++r) {
            SplitMix64 rng(stream_seed(config.seed, r));
            std::copy(canonical.begin(), canonical.end(), perm.begin());
            fisher_yates(std::span<Side>(perm), rng);
            null.values.push_back(statistic(perm));
        }
    }
    std::sort(null.values.begin(), null.values.end());
    return null;
}

TestOutcome outcome_from_null(const LabelStatistic& statistic, double observed,
                              const PermutationNull& null) {
    const double tol = 1e-12 * std::max(1.0, std::abs(observed));
    const auto& v = null.values;
    std::size_t extreme = 0;
    if (statistic.tail() == Tail::Upper) {
        extreme = static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), observed - tol));
    } else {
        extreme = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), observed + tol) - v.begin());
    }

    PermutationDetail detail;
    detail.exhaustive = null.exhaustive;
    detail.permutations = v.size();
    detail.extreme = extreme;

    TestOutcome out;
    out.method = statistic.method();
    out.statistic = observed;
    out.p_value = null.exhaustive
                      ? static_cast<double>(extreme) / static_cast<double>(v.size())
                      : (1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(v.size()));
    out.detail = detail;
    return out;
}

TestOutcome permutation_p(std::span<const Side> labels, const LabelStatistic& statistic,
                          const PermutationConfig& config) {
    const auto [n_a, n_b] = side_counts(labels);
    const double observed = statistic(labels);
    return outcome_from_null(statistic, observed, permutation_null(statistic, n_a, n_b, config));
}

TestOutcome permutation_test(const LabeledPool& pool, Method method,
                             const PermutationConfig& config) {
    DistanceMatrix dist = euclidean_distance_matrix(pool.points());
    switch (method) {
        case Method::FriedmanRafsky:
            return permutation_p(pool.labels(), FrStatistic(dist), config);
        case Method::Energy:
            return permutation_p(pool.labels(), EnergyStatistic(std::move(dist)), config);
        case Method::Mmd: {
            const double bw = median_heuristic_bandwidth(dist);
            return permutation_p(pool.labels(), MmdStatistic(dist, bw), config);
        }
        case Method::Btct:
            break;
    }
    throw InvalidArgument("permutation_test does not handle btct");
}

}  // namespace clustersig
