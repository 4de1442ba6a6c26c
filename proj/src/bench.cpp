#include "clustersig/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "clustersig/error.hpp"
#include "clustersig/rng.hpp"
#include "clustersig/serialize.hpp"
#include "clustersig/subset_test.hpp"

namespace clustersig {

void RunConfig::validate() const {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (permutations < 1) throw InvalidArgument("permutation count must be >= 1");
    if (min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
    if (methods.empty()) throw InvalidArgument("at least one method is required");
}

TestSettings RunConfig::test_settings() const {
    TestSettings s;
    s.btct.k = k;
    s.btct.empty_boundary = empty_boundary;
    s.permutation.count = permutations;
    s.permutation.seed = derive_seed(seed, "permutation");
    return s;
}

namespace {

std::vector<std::vector<Index>> members_by_label(const DataMatrix& data) {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(data.num_clusters()));
    const auto& labels = data.labels();
    for (Index i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
    return out;
}

}  // namespace

std::vector<SubsetPair> same_cluster_pairs(const DataMatrix& data, std::vector<std::string>* warnings) {
    std::vector<SubsetPair> pairs;
    const auto clusters = members_by_label(data);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        auto members = clusters[c];
        if (members.size() < 2) {
            if (warnings) warnings->push_back("cluster " + std::to_string(c + 1) + " has a single sample; skipped");
            continue;
        }
        std::sort(members.begin(), members.end(), [&](Index x, Index y) {
            return std::make_tuple(data(x, 0), x) < std::make_tuple(data(y, 0), y);
        });
        const std::size_t half = (members.size() + 1) / 2;
        SubsetPair p;
        p.a.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(half));
        p.b.assign(members.begin() + static_cast<std::ptrdiff_t>(half), members.end());
        std::sort(p.a.begin(), p.a.end());
        std::sort(p.b.begin(), p.b.end());
        p.description = "cluster " + std::to_string(c + 1) + " median split";
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<SubsetPair> diff_cluster_pairs(const DataMatrix& data, std::vector<std::string>* warnings) {
    std::vector<SubsetPair> pairs;
    const auto clusters = members_by_label(data);
    if (clusters.size() < 2) {
        if (warnings) warnings->push_back("fewer than 2 clusters; no cluster pairs");
        return pairs;
    }
    for (std::size_t x = 0; x < clusters.size(); ++x) {
        for (std::size_t y = x + 1; y < clusters.size(); ++y) {
            pairs.push_back({clusters[x], clusters[y],
                             "clusters " + std::to_string(x + 1) + " vs " + std::to_string(y + 1)});
        }
    }
    return pairs;
}

double identification_accuracy(std::span<const double> p_values, Truth truth, double alpha) {
    if (p_values.empty()) return 0.0;
    std::size_t correct = 0;
    for (double p : p_values) {
        const bool rejected = p < alpha;
        if (rejected == (truth == Truth::Different)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(p_values.size());
}

namespace {

// Contingency counts keyed by (predicted, truth).
std::map<std::pair<int, int>, std::size_t> contingency(std::span<const int> predicted,
                                                      std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw InvalidArgument("partitions cover different sample counts");
    std::map<std::pair<int, int>, std::size_t> table;
    for (std::size_t i = 0; i < predicted.size(); ++i) ++table[{predicted[i], truth[i]}];
    return table;
}

double pairs_of(double c) { return c * (c - 1.0) / 2.0; }

}  // namespace

double purity(std::span<const int> predicted, std::span<const int> truth) {
    const auto table = contingency(predicted, truth);
    if (predicted.empty()) return 1.0;
    std::map<int, std::size_t> best;
    for (const auto& [key, count] : table) best[key.first] = std::max(best[key.first], count);
    std::size_t sum = 0;
    for (const auto& [cluster, count] : best) sum += count;
    return static_cast<double>(sum) / static_cast<double>(predicted.size());
}

double pairwise_f_score(std::span<const int> predicted, std::span<const int> truth) {
    const auto table = contingency(predicted, truth);
    std::map<int, double> pred_sizes;
    std::map<int, double> truth_sizes;
    double tp = 0.0;
    for (const auto& [key, count] : table) {
        tp += pairs_of(static_cast<double>(count));
        pred_sizes[key.first] += static_cast<double>(count);
        truth_sizes[key.second] += static_cast<double>(count);
    }
    double pred_pairs = 0.0;
    for (const auto& [id, c] : pred_sizes) pred_pairs += pairs_of(c);
    double truth_pairs = 0.0;
    for (const auto& [id, c] : truth_sizes) truth_pairs += pairs_of(c);
    const double fp = pred_pairs - tp;
    const double fn = truth_pairs - tp;
    if (tp == 0.0) return (fp == 0.0 && fn == 0.0) ? 1.0 : 0.0;
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

void leaf_depths(const ClusterTreeNode& node, std::vector<int>& depths) {
    if (node.is_leaf()) {
        depths.push_back(node.depth);
        return;
    }
    leaf_depths(*node.left, depths);
    leaf_depths(*node.right, depths);
}

}  // namespace

TreeShape tree_shape_metrics(const ClusterTreeNode& root) {
    std::vector<int> depths;
    leaf_depths(root, depths);
    TreeShape s;
    s.n_leaf = static_cast<int>(depths.size());
    s.max_depth = *std::max_element(depths.begin(), depths.end());
    s.avg_depth = std::accumulate(depths.begin(), depths.end(), 0.0) / static_cast<double>(depths.size());
    return s;
}

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Same: return "same";
        case Protocol::Different: return "diff";
        case Protocol::Tree: return "tree";
        case Protocol::Hierarchy: return "hclust";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "same") return Protocol::Same;
    if (name == "diff") return Protocol::Different;
    if (name == "tree") return Protocol::Tree;
    if (name == "hclust") return Protocol::Hierarchy;
    throw InvalidArgument("unknown protocol '" + std::string(name) + "'");
}

namespace {

void run_pairs(const DataMatrix& data, Protocol protocol, const RunConfig& config, ExperimentReport& report) {
    const auto pairs = protocol == Protocol::Same ? same_cluster_pairs(data, &report.warnings)
                                                  : diff_cluster_pairs(data, &report.warnings);
    const Truth truth = protocol == Protocol::Same ? Truth::Same : Truth::Different;
    const TestSettings settings = config.test_settings();

    for (Method method : config.methods) {
        const auto test = make_test(method, settings);
        Aggregates agg;
        std::vector<double> p_values;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            ReportRow row;
            row.method = method;
            row.index = i;
            row.description = pairs[i].description;
            row.n_a = pairs[i].a.size();
            row.n_b = pairs[i].b.size();
            try {
                const LabeledPool pool = LabeledPool::from_subsets(data, pairs[i].a, pairs[i].b);
                if (pool.size() < test->min_pool_size()) {
                    throw InsufficientSamples("pool of " + std::to_string(pool.size()) +
                                              " samples is too small for " + std::string(method_name(method)));
                }
                row.outcome = test->run(pool);
                row.correct = identification_accuracy(std::span(&row.outcome->p_value, 1), truth, config.alpha) == 1.0;
                p_values.push_back(row.outcome->p_value);
            } catch (const Error& e) {
                row.error = e.what();
                ++agg.failed;
            }
            report.rows.push_back(std::move(row));
            ++agg.rows;
        }
        if (!p_values.empty()) agg.accuracy = identification_accuracy(p_values, truth, config.alpha);
        report.aggregates.emplace_back(method, agg);
    }
}

void run_application(const DataMatrix& data, Protocol protocol, const RunConfig& config,
                     ExperimentReport& report) {
    const TestSettings settings = config.test_settings();
    for (Method method : config.methods) {
        const auto test = make_test(method, settings);
        ReportRow row;
        row.method = method;
        row.description = std::string(protocol_name(protocol));
        Aggregates agg;
        agg.rows = 1;
        try {
            std::vector<int> predicted;
            if (protocol == Protocol::Tree) {
                TreeConfig tc;
                tc.alpha = config.alpha;
                tc.min_leaf = config.min_leaf;
                const ClusterTree tree = grow_tree(data, *test, tc);
                predicted = tree.assignment();
                row.shape = tree_shape_metrics(*tree.root);
                row.predicted_k = tree.leaf_count;
                row.model = tree_to_json(*tree.root);
                for (const auto& w : tree.warnings) report.warnings.push_back(std::string(method_name(method)) + ": " + w);
            } else {
                HierarchyConfig hc;
                hc.alpha = config.alpha;
                hc.min_node = config.min_node;
                const Hierarchy h = divisive_cluster(data, *test, hc);
                predicted = flat_assignment(*h.root);
                row.predicted_k = h.predicted_k;
                row.model = hierarchy_to_json(*h.root);
                for (const auto& w : h.warnings) report.warnings.push_back(std::string(method_name(method)) + ": " + w);
            }
            if (data.has_labels()) {
                row.purity = purity(predicted, data.labels());
                row.f_score = pairwise_f_score(predicted, data.labels());
            }
        } catch (const Error& e) {
            row.error = e.what();
            agg.failed = 1;
        }
        agg.purity = row.purity;
        agg.f_score = row.f_score;
        agg.shape = row.shape;
        agg.predicted_k = row.predicted_k;
        if (row.predicted_k && report.true_k > 0) {
            agg.k_in_band = std::abs(*row.predicted_k - report.true_k) <= 2;
        }
        report.rows.push_back(std::move(row));
        report.aggregates.emplace_back(method, agg);
    }
}

}  // namespace

ExperimentReport run_protocol(const Dataset& dataset, Protocol protocol, const RunConfig& config) {
    config.validate();
    ExperimentReport report;
    report.dataset = dataset.name;
    report.protocol = protocol;
    report.config = config;
    report.true_k = dataset.data.has_labels() ? dataset.data.num_clusters() : 0;

    const DataMatrix data = min_max_normalize(dataset.data);
    if (protocol == Protocol::Same || protocol == Protocol::Different) {
        if (!data.has_labels()) throw InvalidData("protocol '" + std::string(protocol_name(protocol)) +
                                                  "' needs ground-truth labels");
        run_pairs(data, protocol, config, report);
    } else {
        run_application(data, protocol, config, report);
    }
    return report;
}

}  // namespace clustersig
