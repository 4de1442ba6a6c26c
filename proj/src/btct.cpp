#include "clustersig/btct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "clustersig/error.hpp"

namespace clustersig {

namespace {

constexpr int kExactBinomialLimit = 60;

void check_tail_args(int t, int k) {
    if (k < 1) throw InvalidArgument("binomial tail needs k >= 1");
    if (t < 0 || t > k) {
        throw InvalidArgument("t = " + std::to_string(t) + " outside [0, " + std::to_string(k) + "]");
    }
}

// Sum of C(k, r) for r in [from, k], exact for k <= 60: the sum is bounded by
// 2^60 and the largest intermediate C(60, 29) * 31 stays below 2^62.
std::uint64_t binomial_upper_sum(int from, int k) {
    std::uint64_t sum = 0;
    std::uint64_t c = 1;  // C(k, 0)
    for (int r = 0; r <= k; ++r) {
        if (r >= from) sum += c;
        c = c * static_cast<std::uint64_t>(k - r) / static_cast<std::uint64_t>(r + 1);
    }
    return sum;
}

double log_choose(int k, int r) {
    return std::lgamma(k + 1.0) - std::lgamma(r + 1.0) - std::lgamma(k - r + 1.0);
}

double log_space_tail(int t, int k) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int r = t; r <= k; ++r) peak = std::max(peak, log_choose(k, r));
    double acc = 0.0;
    for (int r = t; r <= k; ++r) acc += std::exp(log_choose(k, r) - peak);
    return std::min(1.0, std::exp(peak + std::log(acc) - k * std::log(2.0)));
}

double binomial_pmf_half(int t, int k) {
    if (k <= kExactBinomialLimit) {
        const auto upper = binomial_upper_sum(t, k);
        const auto above = t < k ? binomial_upper_sum(t + 1, k) : 0;
        return std::ldexp(static_cast<double>(upper - above), -k);
    }
    return std::exp(log_choose(k, t) - k * std::log(2.0));
}

}  // namespace

double binomial_tail_p(int t, int k) {
    check_tail_args(t, k);
    if (k <= kExactBinomialLimit) {
        return std::ldexp(static_cast<double>(binomial_upper_sum(t, k)), -k);
    }
    return log_space_tail(t, k);
}

double binomial_mid_p(int t, int k) {
    check_tail_args(t, k);
    const double above = t < k ? binomial_tail_p(t + 1, k) : 0.0;
    return above + 0.5 * binomial_pmf_half(t, k);
}

double chi_square_sf(double x, int dof) {
    if (std::isnan(x) || x < 0.0) throw InvalidArgument("chi-square statistic must be >= 0");
    if (dof < 1) throw InvalidArgument("chi-square degrees of freedom must be >= 1");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

FisherResult fisher_combine(std::span<const double> p_values) {
    if (p_values.empty()) throw InvalidArgument("Fisher combination needs at least one p-value");
    double sum_log = 0.0;
    for (double p : p_values) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw InvalidArgument("p-values for Fisher combination must lie in (0, 1]");
        }
        sum_log += std::log(p);
    }
    const double statistic = -2.0 * sum_log;
    return {statistic, chi_square_sf(statistic, 2 * static_cast<int>(p_values.size()))};
}

BtctEvaluator::BtctEvaluator(const DistanceMatrix& dist, BtctConfig config) : config_(config), dist_(dist) {
    if (config_.k < 1) throw InvalidArgument("k must be >= 1");
    if (dist.size() < 2) throw InsufficientSamples("two-cluster test needs at least 2 samples");
    // Widened boundaries count k neighbours starting at the partner, which can
    // sit at rank k, so keep 2k - 1.
    const Index keep = std::min<Index>(2 * static_cast<Index>(config_.k) - 1, dist.size() - 1);
    neighbors_ = all_knn(dist, keep);
}

BoundaryReport BtctEvaluator::boundary(std::span<const Side> labels) const {
    if (labels.size() != neighbors_.size()) {
        throw InvalidArgument("label count does not match pool size");
    }
    BoundaryReport report;
    for (Index i = 0; i < neighbors_.size(); ++i) {
        const Index j = neighbors_[i].neighbors.front().index;
        if (neighbors_[j].neighbors.front().index == i && labels[i] != labels[j]) {
            report.boundary.push_back(i);
            report.partner.push_back(j);
        }
    }
    return report;
}

BoundaryReport BtctEvaluator::widened_boundary(std::span<const Side> labels) const {
    if (labels.size() != neighbors_.size()) {
        throw InvalidArgument("label count does not match pool size");
    }
    const std::size_t k = static_cast<std::size_t>(config_.k);
    // 1-based position of j in i's neighbour list, 0 if absent.
    auto rank_of = [&](Index i, Index j) -> int {
        const auto& nb = neighbors_[i].neighbors;
        for (std::size_t p = 0; p < k; ++p) {
            if (nb[p].index == j) return static_cast<int>(p) + 1;
        }
        return 0;
    };
    // Smallest mutual rank of any cross pair touching i, with that partner.
    std::vector<int> best(neighbors_.size(), 0);
    std::vector<Index> partner(neighbors_.size(), 0);
    int r_min = 0;
    for (Index i = 0; i < neighbors_.size(); ++i) {
        const auto& nb = neighbors_[i].neighbors;
        for (std::size_t p = 0; p < k; ++p) {
            const Index j = nb[p].index;
            if (labels[j] == labels[i]) continue;
            const int back = rank_of(j, i);
            if (back == 0) continue;
            const int r = std::max(static_cast<int>(p) + 1, back);
            if (best[i] == 0 || r < best[i]) {
                best[i] = r;
                partner[i] = j;
            }
        }
        if (best[i] != 0 && (r_min == 0 || best[i] < r_min)) r_min = best[i];
    }
    BoundaryReport report;
    if (r_min == 0) return report;
    report.rank = r_min;
    for (Index i = 0; i < neighbors_.size(); ++i) {
        if (best[i] == r_min) {
            report.boundary.push_back(i);
            report.partner.push_back(partner[i]);
        }
    }
    return report;
}

int BtctEvaluator::separation_rank(std::span<const Side> labels) const {
    const Index m = dist_.size();
    if (labels.size() != m) throw InvalidArgument("label count does not match pool size");
    std::call_once(ranks_once_, [&] {
        ranks_.assign(m * m, 0);
        std::vector<Index> order(m);
        for (Index i = 0; i < m; ++i) {
            std::iota(order.begin(), order.end(), Index{0});
            std::sort(order.begin(), order.end(), [&](Index a, Index b) {
                return std::pair(dist_(i, a), a) < std::pair(dist_(i, b), b);
            });
            std::uint32_t r = 0;
            for (Index j : order) {
                if (j != i) ranks_[i * m + j] = ++r;
            }
        }
    });
    std::uint32_t best = static_cast<std::uint32_t>(m);
    for (Index i = 0; i < m; ++i) {
        if (labels[i] != Side::A) continue;
        for (Index j = 0; j < m; ++j) {
            if (labels[j] != Side::B) continue;
            best = std::min(best, std::max(ranks_[i * m + j], ranks_[j * m + i]));
        }
    }
    return static_cast<int>(best);
}

TestOutcome BtctEvaluator::evaluate(std::span<const Side> labels) const {
    BoundaryReport report = boundary(labels);
    if (report.count() == 0 && config_.empty_boundary == EmptyBoundaryPolicy::Widen) {
        report = widened_boundary(labels);
    }

    const auto [n_a, n_b] = side_counts(labels);
    BtctDetail detail;
    detail.boundary_rank = report.rank;
    for (std::size_t b = 0; b < report.count(); ++b) {
        const Index i = report.boundary[b];
        const auto& nb = neighbors_[i].neighbors;
        // The neighbourhood starts at the partner. Below rank 1 the nearer
        // neighbours are same-label by construction and would inflate t.
        std::size_t first = 0;
        Index own_before = 0;
        while (report.rank > 1 && nb[first].index != report.partner[b]) {
            if (labels[nb[first].index] == labels[i]) ++own_before;
            ++first;
        }
        // Whole own side ahead of the partner: nothing left to draw.
        const Index own_total = (labels[i] == Side::A ? n_a : n_b) - 1;
        if (report.rank > 1 && own_before == own_total) continue;
        const std::size_t last = std::min(nb.size(), first + static_cast<std::size_t>(config_.k));
        int t = 0;
        for (std::size_t p = first; p < last; ++p) {
            if (labels[nb[p].index] == labels[i]) ++t;
        }
        const int trials = static_cast<int>(last - first);
        detail.boundary.push_back(i);
        detail.partner.push_back(report.partner[b]);
        detail.same_label_counts.push_back(t);
        detail.point_p_values.push_back(config_.mid_p ? binomial_mid_p(t, trials) : binomial_tail_p(t, trials));
    }

    TestOutcome out;
    out.method = Method::Btct;
    if (detail.boundary.empty()) {
        detail.no_boundary = true;
        switch (config_.empty_boundary) {
            case EmptyBoundaryPolicy::Widen:
                detail.boundary_rank = separation_rank(labels);
                out.p_value = 0.0;
                break;
            case EmptyBoundaryPolicy::RejectOnEmpty: out.p_value = 0.0; break;
            case EmptyBoundaryPolicy::AcceptOnEmpty: out.p_value = 1.0; break;
            case EmptyBoundaryPolicy::Error:
                throw NoBoundary("no cross-subset mutual nearest-neighbour pair");
        }
        out.statistic = 0.0;
    } else {
        const FisherResult combined = fisher_combine(detail.point_p_values);
        out.statistic = combined.statistic;
        out.p_value = combined.p_value;
    }
    out.detail = std::move(detail);
    return out;
}

BoundaryReport detect_boundary(const LabeledPool& pool) {
    if (pool.size() < 2) throw InsufficientSamples("boundary detection needs at least 2 samples");
    const BtctEvaluator evaluator(euclidean_distance_matrix(pool.points()), BtctConfig{.k = 1});
    return evaluator.boundary(pool.labels());
}

int boundary_statistic(const LabeledPool& pool, Index point, int k) {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    const NeighborList nl = knn(pool.points(), point, static_cast<Index>(k));
    const auto& labels = pool.labels();
    int t = 0;
    for (const auto& nb : nl.neighbors) {
        if (labels[nb.index] == labels[point]) ++t;
    }
    return t;
}

TestOutcome btct_test(const LabeledPool& pool, const BtctConfig& config) {
    if (config.k < 1) throw InvalidArgument("k must be >= 1");
    if (static_cast<Index>(config.k) > pool.size() - 1) {
        throw InsufficientSamples("k = " + std::to_string(config.k) + " exceeds pool size - 1 = " +
                                  std::to_string(pool.size() - 1));
    }
    const BtctEvaluator evaluator(euclidean_distance_matrix(pool.points()), config);
    return evaluator.evaluate(pool.labels());
}

TestOutcome btct_test(const DataMatrix& a, const DataMatrix& b, const BtctConfig& config) {
    return btct_test(LabeledPool(a, b), config);
}

}  // namespace clustersig
