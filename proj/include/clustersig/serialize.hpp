#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustersig/pool.hpp"
#include "clustersig/sighier.hpp"
#include "clustersig/sigtree.hpp"

namespace clustersig {

struct ExperimentReport;
struct RunConfig;

inline constexpr int kSchemaVersion = 1;

nlohmann::json outcome_to_json(const TestOutcome& outcome);
nlohmann::json config_to_json(const RunConfig& config);

// Branch: {"feature", "threshold", "p_value", "size", "depth", "left", "right"}
// Leaf:   {"cluster", "size", "depth"}
nlohmann::json tree_to_json(const ClusterTreeNode& root);
std::string tree_to_text(const ClusterTreeNode& root);

// Same scheme as the tree; internal nodes carry "p_value" and children,
// terminal nodes "cluster" plus "p_value" when their bisection was tested.
nlohmann::json hierarchy_to_json(const HierarchyNode& root);
std::string hierarchy_to_text(const HierarchyNode& root);

// {schema_version, dataset, protocol, true_k, config, rows[], aggregates{}, warnings[]}
nlohmann::json report_to_json(const ExperimentReport& report);

// One line per row, header first.
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_text(const ExperimentReport& report);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace clustersig
