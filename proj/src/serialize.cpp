#include "clustersig/serialize.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "clustersig/bench.hpp"

namespace clustersig {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view policy_name(EmptyBoundaryPolicy p) {
    switch (p) {
        case EmptyBoundaryPolicy::Widen: return "widen";
        case EmptyBoundaryPolicy::RejectOnEmpty: return "reject";
        case EmptyBoundaryPolicy::AcceptOnEmpty: return "accept";
        case EmptyBoundaryPolicy::Error: return "error";
    }
    return "unknown";
}

json shape_to_json(const TreeShape& s) {
    return {{"avg_depth", s.avg_depth}, {"max_depth", s.max_depth}, {"n_leaf", s.n_leaf}};
}

}  // namespace

json outcome_to_json(const TestOutcome& outcome) {
    json j;
    j["method"] = method_name(outcome.method);
    j["statistic"] = outcome.statistic;
    j["p_value"] = outcome.p_value;
    if (const auto* d = std::get_if<BtctDetail>(&outcome.detail)) {
        j["boundary_count"] = d->boundary.size();
        j["no_boundary"] = d->no_boundary;
        j["boundary_rank"] = d->boundary_rank;
        j["boundary"] = d->boundary;
        j["partner"] = d->partner;
        j["same_label_counts"] = d->same_label_counts;
        j["point_p_values"] = d->point_p_values;
    } else if (const auto* d = std::get_if<PermutationDetail>(&outcome.detail)) {
        j["permutations"] = d->permutations;
        j["extreme"] = d->extreme;
        j["exhaustive"] = d->exhaustive;
    }
    return j;
}

json config_to_json(const RunConfig& config) {
    json methods = json::array();
    for (Method m : config.methods) methods.push_back(method_name(m));
    return {
        {"k", config.k},
        {"alpha", config.alpha},
        {"permutations", config.permutations},
        {"seed", config.seed},
        {"empty_boundary", policy_name(config.empty_boundary)},
        {"min_leaf", config.min_leaf},
        {"min_node", config.min_node},
        {"methods", methods},
    };
}

json tree_to_json(const ClusterTreeNode& node) {
    json j;
    j["size"] = node.members.size();
    j["depth"] = node.depth;
    if (node.is_leaf()) {
        j["cluster"] = node.cluster_id;
        return j;
    }
    j["feature"] = node.split->feature;
    j["threshold"] = node.split->threshold;
    j["p_value"] = node.split->p_value;
    if (node.split->separation_rank > 0) j["separation_rank"] = node.split->separation_rank;
    j["left"] = tree_to_json(*node.left);
    j["right"] = tree_to_json(*node.right);
    return j;
}

namespace {

void tree_text(const ClusterTreeNode& node, std::ostringstream& os) {
    const std::string indent(static_cast<std::size_t>(node.depth) * 2, ' ');
    if (node.is_leaf()) {
        os << indent << "leaf " << node.cluster_id << " (n=" << node.members.size() << ")\n";
        return;
    }
    const auto& s = *node.split;
    os << indent << "x" << s.feature << " <= " << format_double(s.threshold)
       << " (n=" << node.members.size() << ", p=" << format_double(s.p_value) << ")\n";
    tree_text(*node.left, os);
    tree_text(*node.right, os);
}

void hierarchy_text(const HierarchyNode& node, std::ostringstream& os) {
    const std::string indent(static_cast<std::size_t>(node.depth) * 2, ' ');
    if (node.is_terminal()) {
        os << indent << "cluster " << node.cluster_id << " (n=" << node.members.size();
        if (node.p_value) os << ", p=" << format_double(*node.p_value);
        os << ")\n";
        return;
    }
    os << indent << "split (n=" << node.members.size() << ", p=" << format_double(*node.p_value) << ")\n";
    hierarchy_text(*node.left, os);
    hierarchy_text(*node.right, os);
}

}  // namespace

std::string tree_to_text(const ClusterTreeNode& root) {
    std::ostringstream os;
    tree_text(root, os);
    return os.str();
}

json hierarchy_to_json(const HierarchyNode& node) {
    json j;
    j["size"] = node.members.size();
    j["depth"] = node.depth;
    if (node.p_value) j["p_value"] = *node.p_value;
    if (node.is_terminal()) {
        j["cluster"] = node.cluster_id;
        return j;
    }
    j["left"] = hierarchy_to_json(*node.left);
    j["right"] = hierarchy_to_json(*node.right);
    return j;
}

std::string hierarchy_to_text(const HierarchyNode& root) {
    std::ostringstream os;
    hierarchy_text(root, os);
    return os.str();
}

json report_to_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json j;
        j["method"] = method_name(r.method);
        j["index"] = r.index;
        j["description"] = r.description;
        if (r.n_a + r.n_b > 0) {
            j["n_a"] = r.n_a;
            j["n_b"] = r.n_b;
        }
        if (r.outcome) j["outcome"] = outcome_to_json(*r.outcome);
        if (r.correct) j["correct"] = *r.correct;
        if (r.purity) j["purity"] = *r.purity;
        if (r.f_score) j["f_score"] = *r.f_score;
        if (r.shape) j["shape"] = shape_to_json(*r.shape);
        if (r.predicted_k) j["predicted_k"] = *r.predicted_k;
        if (!r.model.is_null()) j["model"] = r.model;
        if (r.error) j["error"] = *r.error;
        rows.push_back(std::move(j));
    }

    json aggregates = json::object();
    for (const auto& [method, a] : report.aggregates) {
        json j;
        j["rows"] = a.rows;
        j["failed"] = a.failed;
        if (a.accuracy) j["accuracy"] = *a.accuracy;
        if (a.purity) j["purity"] = *a.purity;
        if (a.f_score) j["f_score"] = *a.f_score;
        if (a.shape) {
            j["avg_depth"] = a.shape->avg_depth;
            j["max_depth"] = a.shape->max_depth;
            j["n_leaf"] = a.shape->n_leaf;
        }
        if (a.predicted_k) j["predicted_k"] = *a.predicted_k;
        if (a.k_in_band) j["k_in_band"] = *a.k_in_band;
        aggregates[std::string(method_name(method))] = std::move(j);
    }

    return {
        {"schema_version", kSchemaVersion},
        {"dataset", report.dataset},
        {"protocol", protocol_name(report.protocol)},
        {"true_k", report.true_k},
        {"config", config_to_json(report.config)},
        {"rows", rows},
        {"aggregates", aggregates},
        {"warnings", report.warnings},
    };
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

template <typename T>
std::string opt(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_same_v<T, double>) {
        return format_double(*v);
    } else if constexpr (std::is_same_v<T, bool>) {
        return *v ? "1" : "0";
    } else {
        return std::to_string(*v);
    }
}

}  // namespace

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os << "dataset,protocol,method,index,description,n_a,n_b,statistic,p_value,boundary_count,"
          "correct,purity,f_score,avg_depth,max_depth,n_leaf,predicted_k,error\n";
    for (const auto& r : report.rows) {
        std::optional<double> stat;
        std::optional<double> p;
        std::optional<std::size_t> b;
        if (r.outcome) {
            stat = r.outcome->statistic;
            p = r.outcome->p_value;
            if (const auto* d = std::get_if<BtctDetail>(&r.outcome->detail)) b = d->boundary.size();
        }
        std::optional<double> avg;
        std::optional<int> maxd;
        std::optional<int> leaves;
        if (r.shape) {
            avg = r.shape->avg_depth;
            maxd = r.shape->max_depth;
            leaves = r.shape->n_leaf;
        }
        os << csv_field(report.dataset) << ',' << protocol_name(report.protocol) << ','
           << method_name(r.method) << ',' << r.index << ',' << csv_field(r.description) << ',' << r.n_a
           << ',' << r.n_b << ',' << opt(stat) << ',' << opt(p) << ',' << opt(b) << ',' << opt(r.correct)
           << ',' << opt(r.purity) << ',' << opt(r.f_score) << ',' << opt(avg) << ',' << opt(maxd) << ','
           << opt(leaves) << ',' << opt(r.predicted_k) << ',' << csv_field(r.error.value_or("")) << '\n';
    }
    return os.str();
}

std::string report_to_text(const ExperimentReport& report) {
    std::ostringstream os;
    os << "dataset " << report.dataset << ", protocol " << protocol_name(report.protocol);
    if (report.true_k > 0) os << ", K = " << report.true_k;
    os << '\n';
    for (const auto& [method, a] : report.aggregates) {
        os << "  " << method_name(method) << ':';
        if (a.accuracy) os << " accuracy=" << format_double(*a.accuracy);
        if (a.purity) os << " purity=" << format_double(*a.purity);
        if (a.f_score) os << " f_score=" << format_double(*a.f_score);
        if (a.shape) {
            os << " avgDepth=" << format_double(a.shape->avg_depth) << " maxDepth=" << a.shape->max_depth
               << " nLeaf=" << a.shape->n_leaf;
        }
        if (a.predicted_k) os << " predicted_k=" << *a.predicted_k;
        if (a.k_in_band) os << (*a.k_in_band ? " (in band)" : " (outside band)");
        if (a.failed > 0) os << " failed=" << a.failed << '/' << a.rows;
        os << '\n';
    }
    for (const auto& w : report.warnings) os << "  warning: " << w << '\n';
    return os.str();
}

}  // namespace clustersig
