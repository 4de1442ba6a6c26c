#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustersig/btct.hpp"
#include "clustersig/geometry.hpp"
#include "clustersig/sighier.hpp"
#include "clustersig/sigtree.hpp"

namespace clustersig {

// Parameters shared by every protocol and CLI subcommand.
struct RunConfig {
    int k = 7;
    double alpha = 0.05;
    std::size_t permutations = 1000;
    std::uint64_t seed = 0;
    EmptyBoundaryPolicy empty_boundary = EmptyBoundaryPolicy::Widen;
    Index min_leaf = 8;
    Index min_node = 16;
    std::vector<Method> methods{Method::Btct, Method::FriedmanRafsky, Method::Energy, Method::Mmd};

    void validate() const;  // InvalidArgument on out-of-range values
    TestSettings test_settings() const;  // permutation seed drawn from the "permutation" sub-stream
};

struct Dataset {
    std::string name;
    DataMatrix data;  // ground-truth labels expected for every protocol
};

struct SubsetPair {
    std::vector<Index> a;
    std::vector<Index> b;
    std::string description;
};

// Each ground-truth cluster split at the median of the first feature: members
// sorted by (value, index), the first ceil(c/2) go to A. Singleton clusters are
// skipped with a warning.
std::vector<SubsetPair> same_cluster_pairs(const DataMatrix& data,
                                           std::vector<std::string>* warnings = nullptr);

// Every unordered pair of whole ground-truth clusters.
std::vector<SubsetPair> diff_cluster_pairs(const DataMatrix& data,
                                           std::vector<std::string>* warnings = nullptr);

enum class Truth { Same, Different };

// Same: correct iff p >= alpha. Different: correct iff p < alpha.
double identification_accuracy(std::span<const double> p_values, Truth truth, double alpha);

double purity(std::span<const int> predicted, std::span<const int> truth);

// F1 over sample pairs with co-membership as the positive class.
double pairwise_f_score(std::span<const int> predicted, std::span<const int> truth);

struct TreeShape {
    double avg_depth = 0.0;
    int max_depth = 0;
    int n_leaf = 0;
};

TreeShape tree_shape_metrics(const ClusterTreeNode& root);

enum class Protocol { Same, Different, Tree, Hierarchy };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);

struct ReportRow {
    Method method = Method::Btct;
    std::size_t index = 0;  // pair index for Same/Different, 0 otherwise
    std::string description;
    Index n_a = 0;
    Index n_b = 0;
    std::optional<TestOutcome> outcome;
    std::optional<bool> correct;
    std::optional<double> purity;
    std::optional<double> f_score;
    std::optional<TreeShape> shape;
    std::optional<int> predicted_k;
    nlohmann::json model;  // serialized tree or hierarchy, null otherwise
    std::optional<std::string> error;
};

struct Aggregates {
    std::size_t rows = 0;
    std::size_t failed = 0;
    std::optional<double> accuracy;
    std::optional<double> purity;
    std::optional<double> f_score;
    std::optional<TreeShape> shape;
    std::optional<int> predicted_k;
    std::optional<bool> k_in_band;  // predicted K within [K-2, K+2]
};

struct ExperimentReport {
    std::string dataset;
    Protocol protocol = Protocol::Same;
    RunConfig config;
    int true_k = 0;
    std::vector<ReportRow> rows;
    std::vector<std::pair<Method, Aggregates>> aggregates;  // in config.methods order
    std::vector<std::string> warnings;
};

// Normalizes the dataset, then evaluates every configured method under
// `protocol`. Per-row failures are recorded in the row, not thrown.
ExperimentReport run_protocol(const Dataset& dataset, Protocol protocol, const RunConfig& config);

}  // namespace clustersig
