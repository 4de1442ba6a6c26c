#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Everything here is deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "clustersig/geometry.hpp"
#include "clustersig/pool.hpp"

namespace oracle {

using clustersig::DataMatrix;
using clustersig::Index;
using clustersig::Side;

inline double dist(const DataMatrix& x, Index i, Index j) {
    double s = 0.0;
    for (Index c = 0; c < x.cols(); ++c) {
        const double d = x(i, c) - x(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}

// Sort every other index by (distance, index) and keep k.
inline std::vector<Index> knn(const DataMatrix& x, Index q, Index k) {
    std::vector<Index> others;
    for (Index i = 0; i < x.rows(); ++i)
        if (i != q) others.push_back(i);
    std::stable_sort(others.begin(), others.end(),
                     [&](Index a, Index b) { return dist(x, q, a) < dist(x, q, b); });
    others.resize(k);
    return others;
}

// Pascal's triangle; exact for k <= 62.
inline std::uint64_t choose(int n, int r) {
    std::vector<std::vector<std::uint64_t>> t(n + 1);
    for (int i = 0; i <= n; ++i) {
        t[i].assign(i + 1, 1);
        for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return t[n][r];
}

// Numerator of P(Bin(k, 1/2) >= t) over the denominator 2^k.
inline std::uint64_t tail_numerator(int t, int k) {
    std::uint64_t s = 0;
    for (int r = t; r <= k; ++r) s += choose(k, r);
    return s;
}

// Even-dof chi-square survival: exp(-x/2) * sum_{j < dof/2} (x/2)^j / j!.
inline double chi2_sf_even(double x, int dof) {
    const long double h = 0.5L * x;
    long double term = 1.0L;
    long double sum = 0.0L;
    for (int j = 0; j < dof / 2; ++j) {
        if (j > 0) term *= h / j;
        sum += term;
    }
    return static_cast<double>(std::exp(-h) * sum);
}

// Minimum spanning tree weight by trying every (m-1)-subset of the edges.
inline double brute_mst_weight(const DataMatrix& x) {
    const Index m = x.rows();
    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) edges.emplace_back(i, j);
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> pick(edges.size(), false);
    std::fill(pick.end() - static_cast<long>(m - 1), pick.end(), true);
    do {
        std::vector<Index> parent(m);
        std::iota(parent.begin(), parent.end(), Index{0});
        std::function<Index(Index)> find = [&](Index v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
        bool acyclic = true;
        double w = 0.0;
        for (std::size_t e = 0; e < edges.size() && acyclic; ++e) {
            if (!pick[e]) continue;
            const Index a = find(edges[e].first);
            const Index b = find(edges[e].second);
            if (a == b) acyclic = false;
            parent[a] = b;
            w += dist(x, edges[e].first, edges[e].second);
        }
        if (acyclic) best = std::min(best, w);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

// Every labelling of m points with exactly n_a A's, in lexicographic order.
inline std::vector<std::vector<Side>> all_labellings(Index m, Index n_a) {
    std::vector<std::vector<Side>> out;
    std::vector<bool> in_a(m, false);
    std::fill(in_a.begin(), in_a.begin() + static_cast<long>(n_a), true);
    do {
        std::vector<Side> l(m);
        for (Index i = 0; i < m; ++i) l[i] = in_a[i] ? Side::A : Side::B;
        out.push_back(std::move(l));
    } while (std::prev_permutation(in_a.begin(), in_a.end()));
    return out;
}

// Energy V-statistic straight from the definition.
inline double energy(const DataMatrix& x, const std::vector<Side>& l) {
    double ab = 0, aa = 0, bb = 0;
    double na = 0, nb = 0;
    for (Side s : l) (s == Side::A ? na : nb) += 1;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.rows(); ++j) {
            const double d = dist(x, i, j);
            if (l[i] == Side::A && l[j] == Side::B) ab += d;
            else if (l[i] == Side::A && l[j] == Side::A) aa += d;
            else if (l[i] == Side::B && l[j] == Side::B) bb += d;
        }
    return 2 * ab / (na * nb) - aa / (na * na) - bb / (nb * nb);
}

// Unbiased Gaussian-kernel MMD^2 straight from the definition.
inline double mmd(const DataMatrix& x, const std::vector<Side>& l, double sigma) {
    double ab = 0, aa = 0, bb = 0;
    double na = 0, nb = 0;
    for (Side s : l) (s == Side::A ? na : nb) += 1;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.rows(); ++j) {
            if (i == j) continue;
            const double d = dist(x, i, j);
            const double kv = std::exp(-d * d / (2 * sigma * sigma));
            if (l[i] == Side::A && l[j] == Side::B) ab += kv;
            else if (l[i] == Side::A && l[j] == Side::A) aa += kv;
            else if (l[i] == Side::B && l[j] == Side::B) bb += kv;
        }
    return aa / (na * (na - 1)) + bb / (nb * (nb - 1)) - 2 * ab / (na * nb);
}

// FR cross-edge count of a brute-force-verified Prim tree (tie rule: lower index).
inline int fr(const DataMatrix& x, const std::vector<Side>& l) {
    const Index m = x.rows();
    std::vector<bool> in(m, false);
    std::vector<double> best(m, std::numeric_limits<double>::infinity());
    std::vector<Index> from(m, 0);
    best[0] = 0;
    int cross = 0;
    for (Index step = 0; step < m; ++step) {
        Index u = m;
        for (Index v = 0; v < m; ++v)
            if (!in[v] && (u == m || best[v] < best[u])) u = v;
        in[u] = true;
        if (step > 0 && l[u] != l[from[u]]) ++cross;
        for (Index v = 0; v < m; ++v)
            if (!in[v] && dist(x, u, v) < best[v]) {
                best[v] = dist(x, u, v);
                from[v] = u;
            }
    }
    return cross;
}

// Within-group sum of squares of a bipartition.
inline double within_ss(const DataMatrix& x, const std::vector<Index>& g) {
    double s = 0.0;
    for (Index c = 0; c < x.cols(); ++c) {
        double mean = 0.0;
        for (Index i : g) mean += x(i, c);
        mean /= static_cast<double>(g.size());
        for (Index i : g) s += (x(i, c) - mean) * (x(i, c) - mean);
    }
    return s;
}

// Pairwise co-membership counts (tp, fp, fn) by direct enumeration.
struct PairCounts {
    long tp = 0, fp = 0, fn = 0;
};
inline PairCounts pair_counts(const std::vector<int>& pred, const std::vector<int>& truth) {
    PairCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            const bool p = pred[i] == pred[j];
            const bool t = truth[i] == truth[j];
            if (p && t) ++c.tp;
            else if (p) ++c.fp;
            else if (t) ++c.fn;
        }
    return c;
}

}  // namespace oracle
