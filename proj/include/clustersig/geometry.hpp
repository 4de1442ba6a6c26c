#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace clustersig {

using Index = std::size_t;

// n x d sample matrix, row-major, with optional ground-truth cluster ids.
//
// Invariants (checked on construction, InvalidData otherwise):
//   n >= 1, d >= 1, every value finite;
//   labels, when present, take values in {1..K} and each id occurs at least once.
class DataMatrix {
public:
    DataMatrix(Index rows, Index cols, std::vector<double> values,
               std::optional<std::vector<int>> labels = std::nullopt);

    // Convenience for small literals: one inner vector per row.
    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                std::optional<std::vector<int>> labels = std::nullopt);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    double operator()(Index i, Index j) const noexcept { return values_[i * cols_ + j]; }
    std::span<const double> row(Index i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }
    std::span<const double> values() const noexcept { return values_; }

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::vector<int>& labels() const;  // throws InvalidData when absent
    int num_clusters() const noexcept { return num_clusters_; }

    // Rows `members` in the given order; labels are dropped because a subset
    // need not contain every cluster id.
    DataMatrix select(std::span<const Index> members) const;

    DataMatrix with_labels(std::optional<std::vector<int>> labels) const;

private:
    Index rows_;
    Index cols_;
    std::vector<double> values_;
    std::optional<std::vector<int>> labels_;
    int num_clusters_ = 0;
};

// Dense symmetric matrix of pairwise l2 distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(Index size, std::vector<double> values) : size_(size), values_(std::move(values)) {}

    Index size() const noexcept { return size_; }
    double operator()(Index i, Index j) const noexcept { return values_[i * size_ + j]; }
    std::span<const double> row(Index i) const noexcept {
        return {values_.data() + i * size_, size_};
    }

private:
    Index size_ = 0;
    std::vector<double> values_;
};

struct Neighbor {
    Index index;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// k nearest neighbours of `owner`, self excluded, ascending by (distance, index).
struct NeighborList {
    Index owner;
    std::vector<Neighbor> neighbors;
};

struct Edge {
    Index i;  // i < j
    Index j;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct SpanningTree {
    std::vector<Edge> edges;  // in Kruskal acceptance order

    double total_weight() const noexcept;
};

DistanceMatrix euclidean_distance_matrix(const DataMatrix& data);

// Exact k-NN over a precomputed distance matrix. Ties go to the lower index.
NeighborList knn(const DistanceMatrix& dist, Index query, Index k);
NeighborList knn(const DataMatrix& data, Index query, Index k);

// knn for every row; result[i].owner == i.
std::vector<NeighborList> all_knn(const DistanceMatrix& dist, Index k);

// Kruskal over all pairs, edges ordered by (weight, i, j).
SpanningTree minimum_spanning_tree(const DistanceMatrix& dist);

// Columns mapped affinely onto [0, 1]; constant columns become 0. Labels kept.
DataMatrix min_max_normalize(const DataMatrix& data);

struct Bisection {
    std::vector<Index> first;   // contains the smallest member index
    std::vector<Index> second;
};

// Ward agglomeration over `members` (row indices into `data`) stopped at two
// clusters. Both returned groups are sorted and non-empty.
Bisection ward_bisect(const DataMatrix& data, std::span<const Index> members);

}  // namespace clustersig
