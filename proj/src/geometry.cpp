#include "clustersig/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "clustersig/error.hpp"

namespace clustersig {

DataMatrix::DataMatrix(Index rows, Index cols, std::vector<double> values,
                       std::optional<std::vector<int>> labels)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ < 1 || cols_ < 1) {
        throw InvalidData("data matrix needs at least one row and one column");
    }
    if (values_.size() != rows_ * cols_) {
        throw InvalidData("data matrix has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(rows_ * cols_));
    }
    for (Index p = 0; p < values_.size(); ++p) {
        if (!std::isfinite(values_[p])) {
            throw InvalidData("non-finite value at row " + std::to_string(p / cols_) +
                              ", column " + std::to_string(p % cols_));
        }
    }
    if (labels) {
        if (labels->size() != rows_) {
            throw InvalidData("label count does not match row count");
        }
        const int k = *std::max_element(labels->begin(), labels->end());
        std::vector<bool> seen(static_cast<std::size_t>(std::max(k, 0)) + 1, false);
        for (int l : *labels) {
            if (l < 1) throw InvalidData("cluster labels must be >= 1");
            seen[static_cast<std::size_t>(l)] = true;
        }
        for (int l = 1; l <= k; ++l) {
            if (!seen[static_cast<std::size_t>(l)]) {
                throw InvalidData("cluster label " + std::to_string(l) + " never occurs");
            }
        }
        num_clusters_ = k;
        labels_ = std::move(labels);
    }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::vector<int>> labels) {
    if (rows.empty()) throw InvalidData("data matrix needs at least one row");
    const Index d = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (const auto& r : rows) {
        if (r.size() != d) throw InvalidData("ragged rows");
        values.insert(values.end(), r.begin(), r.end());
    }
    return DataMatrix(rows.size(), d, std::move(values), std::move(labels));
}

const std::vector<int>& DataMatrix::labels() const {
    if (!labels_) throw InvalidData("data matrix carries no labels");
    return *labels_;
}

DataMatrix DataMatrix::select(std::span<const Index> members) const {
    std::vector<double> values;
    values.reserve(members.size() * cols_);
    for (Index i : members) {
        auto r = row(i);
        values.insert(values.end(), r.begin(), r.end());
    }
    return DataMatrix(members.size(), cols_, std::move(values));
}

DataMatrix DataMatrix::with_labels(std::optional<std::vector<int>> labels) const {
    return DataMatrix(rows_, cols_, values_, std::move(labels));
}

double SpanningTree::total_weight() const noexcept {
    double w = 0.0;
    for (const auto& e : edges) w += e.weight;
    return w;
}

DistanceMatrix euclidean_distance_matrix(const DataMatrix& data) {
    const Index n = data.rows();
    const Index d = data.cols();
    std::vector<double> out(n * n, 0.0);
    for (Index i = 0; i < n; ++i) {
        const double* xi = data.row(i).data();
        for (Index j = i + 1; j < n; ++j) {
            const double* xj = data.row(j).data();
            double s = 0.0;
            for (Index c = 0; c < d; ++c) {
                const double diff = xi[c] - xj[c];
                s += diff * diff;
            }
            const double dist = std::sqrt(s);
            out[i * n + j] = dist;
            out[j * n + i] = dist;
        }
    }
    return DistanceMatrix(n, std::move(out));
}

namespace {

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

NeighborList knn_from_row(std::span<const double> row, Index query, Index k) {
    const Index m = row.size();
    if (m == 0 || k > m - 1) {
        throw InsufficientSamples("k = " + std::to_string(k) + " needs at least " +
                                  std::to_string(k + 1) + " samples, pool has " +
                                  std::to_string(m));
    }
    std::vector<Neighbor> cand;
    cand.reserve(m - 1);
    for (Index j = 0; j < m; ++j) {
        if (j != query) cand.push_back({j, row[j]});
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                      neighbor_less);
    cand.resize(k);
    return {query, std::move(cand)};
}

}  // namespace

NeighborList knn(const DistanceMatrix& dist, Index query, Index k) {
    if (query >= dist.size()) throw InvalidArgument("query index out of range");
    return knn_from_row(dist.row(query), query, k);
}

NeighborList knn(const DataMatrix& data, Index query, Index k) {
    if (query >= data.rows()) throw InvalidArgument("query index out of range");
    const Index n = data.rows();
    std::vector<double> row(n, 0.0);
    const auto xq = data.row(query);
    for (Index j = 0; j < n; ++j) {
        const auto xj = data.row(j);
        double s = 0.0;
        for (Index c = 0; c < data.cols(); ++c) {
            const double diff = xq[c] - xj[c];
            s += diff * diff;
        }
        row[j] = std::sqrt(s);
    }
    return knn_from_row(row, query, k);
}

std::vector<NeighborList> all_knn(const DistanceMatrix& dist, Index k) {
    std::vector<NeighborList> out;
    out.reserve(dist.size());
    for (Index i = 0; i < dist.size(); ++i) out.push_back(knn(dist, i, k));
    return out;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(Index n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), Index{0});
    }

    Index find(Index x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<Index> parent_;
    std::vector<unsigned> rank_;
};

}  // namespace

SpanningTree minimum_spanning_tree(const DistanceMatrix& dist) {
    const Index m = dist.size();
    if (m < 2) throw InsufficientSamples("spanning tree needs at least 2 samples");

    std::vector<Edge> edges;
    edges.reserve(m * (m - 1) / 2);
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j) edges.push_back({i, j, dist(i, j)});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
    });

    SpanningTree tree;
    tree.edges.reserve(m - 1);
    DisjointSets sets(m);
    for (const auto& e : edges) {
        if (sets.unite(e.i, e.j)) {
            tree.edges.push_back(e);
            if (tree.edges.size() == m - 1) break;
        }
    }
    return tree;
}

DataMatrix min_max_normalize(const DataMatrix& data) {
    const Index n = data.rows();
    const Index d = data.cols();
    std::vector<double> out(data.values().begin(), data.values().end());
    for (Index c = 0; c < d; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (Index i = 0; i < n; ++i) {
            lo = std::min(lo, data(i, c));
            hi = std::max(hi, data(i, c));
        }
        const double span = hi - lo;
        for (Index i = 0; i < n; ++i) {
            double& v = out[i * d + c];
            v = span > 0.0 ? (v - lo) / span : 0.0;
        }
    }
    std::optional<std::vector<int>> labels;
    if (data.has_labels()) labels = data.labels();
    return DataMatrix(n, d, std::move(out), std::move(labels));
}

namespace {

// Ordering of candidate merges: cost first, then the pair of cluster ids
// (smallest original index inside each cluster).
struct MergeKey {
    double cost;
    Index lo;
    Index hi;

    bool operator<(const MergeKey& o) const {
        return std::tie(cost, lo, hi) < std::tie(o.cost, o.lo, o.hi);
    }
};

}  // namespace

Bisection ward_bisect(const DataMatrix& data, std::span<const Index> members) {
    const Index m = members.size();
    if (m < 2) throw InsufficientSamples("ward bisection needs at least 2 members");

    // Squared euclidean distances; under the Lance-Williams Ward update the
    // entry between two clusters is 2 * (increase in within-cluster SS).
    std::vector<double> dist(m * m, 0.0);
    for (Index a = 0; a < m; ++a) {
        const auto xa = data.row(members[a]);
        for (Index b = a + 1; b < m; ++b) {
            const auto xb = data.row(members[b]);
            double s = 0.0;
            for (Index c = 0; c < data.cols(); ++c) {
                const double diff = xa[c] - xb[c];
                s += diff * diff;
            }
            dist[a * m + b] = s;
            dist[b * m + a] = s;
        }
    }

    std::vector<Index> id(m);
    std::vector<double> size(m, 1.0);
    std::vector<bool> active(m, true);
    std::vector<Index> parent(m);  // slot each original slot was merged into
    for (Index a = 0; a < m; ++a) {
        id[a] = members[a];
        parent[a] = a;
    }

    auto key = [&](Index a, Index b) {
        return MergeKey{dist[a * m + b], std::min(id[a], id[b]), std::max(id[a], id[b])};
    };

    std::vector<Index> nearest(m, 0);
    auto refresh = [&](Index a) {
        bool found = false;
        MergeKey best{};
        for (Index b = 0; b < m; ++b) {
            if (b == a || !active[b]) continue;
            const MergeKey kb = key(a, b);
            if (!found || kb < best) {
                best = kb;
                nearest[a] = b;
                found = true;
            }
        }
    };
    for (Index a = 0; a < m; ++a) refresh(a);

    for (Index remaining = m; remaining > 2; --remaining) {
        Index best_a = m;
        MergeKey best{};
        for (Index a = 0; a < m; ++a) {
            if (!active[a]) continue;
            const MergeKey ka = key(a, nearest[a]);
            if (best_a == m || ka < best) {
                best = ka;
                best_a = a;
            }
        }
        Index keep = best_a;
        Index drop = nearest[best_a];
        if (id[drop] < id[keep]) std::swap(keep, drop);

        const double ni = size[keep];
        const double nj = size[drop];
        const double dij = dist[keep * m + drop];
        for (Index c = 0; c < m; ++c) {
            if (!active[c] || c == keep || c == drop) continue;
            const double nc = size[c];
            const double updated =
                ((nc + ni) * dist[c * m + keep] + (nc + nj) * dist[c * m + drop] - nc * dij) /
                (nc + ni + nj);
            dist[c * m + keep] = updated;
            dist[keep * m + c] = updated;
        }
        size[keep] = ni + nj;
        active[drop] = false;
        parent[drop] = keep;

        refresh(keep);
        for (Index c = 0; c < m; ++c) {
            if (!active[c] || c == keep) continue;
            if (nearest[c] == keep || nearest[c] == drop) {
                refresh(c);
            } else if (key(c, keep) < key(c, nearest[c])) {
                nearest[c] = keep;
            }
        }
    }

    auto root = [&](Index a) {
        while (parent[a] != a) a = parent[a];
        return a;
    };

    Bisection out;
    Index first_root = m;
    Index smallest = m;  // slot holding the smallest original index
    for (Index a = 0; a < m; ++a) {
        if (smallest == m || members[a] < members[smallest]) smallest = a;
    }
    first_root = root(smallest);
    for (Index a = 0; a < m; ++a) {
        (root(a) == first_root ? out.first : out.second).push_back(members[a]);
    }
    std::sort(out.first.begin(), out.first.end());
    std::sort(out.second.begin(), out.second.end());
    return out;
}

}  // namespace clustersig
