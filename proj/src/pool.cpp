#include "clustersig/pool.hpp"

#include <string>
#include <tuple>

#include "clustersig/error.hpp"

namespace clustersig {

std::pair<Index, Index> side_counts(std::span<const Side> labels) {
    Index a = 0;
    Index b = 0;
    for (Side s : labels) {
        if (s == Side::A) {
            ++a;
        } else if (s == Side::B) {
            ++b;
        } else {
            throw InvalidArgument("subset label must be A (1) or B (2)");
        }
    }
    if (a == 0 || b == 0) throw InvalidArgument("both subsets must be non-empty");
    return {a, b};
}

LabeledPool::LabeledPool(DataMatrix points, SideLabels labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
    if (labels_.size() != points_.rows()) {
        throw InvalidArgument("subset label count does not match pool size");
    }
    std::tie(n_a_, n_b_) = side_counts(labels_);
}

namespace {

DataMatrix stack(const DataMatrix& a, const DataMatrix& b) {
    if (a.cols() != b.cols()) throw InvalidArgument("subsets have different dimensions");
    std::vector<double> values(a.values().begin(), a.values().end());
    values.insert(values.end(), b.values().begin(), b.values().end());
    return DataMatrix(a.rows() + b.rows(), a.cols(), std::move(values));
}

SideLabels stacked_labels(Index n_a, Index n_b) {
    SideLabels labels(n_a, Side::A);
    labels.resize(n_a + n_b, Side::B);
    return labels;
}

}  // namespace

LabeledPool::LabeledPool(const DataMatrix& a, const DataMatrix& b)
    : LabeledPool(stack(a, b), stacked_labels(a.rows(), b.rows())) {}

LabeledPool LabeledPool::from_subsets(const DataMatrix& data, std::span<const Index> a,
                                      std::span<const Index> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("both subsets must be non-empty");
    std::vector<bool> used(data.rows(), false);
    std::vector<Index> rows;
    rows.reserve(a.size() + b.size());
    for (auto set : {a, b}) {
        for (Index i : set) {
            if (i >= data.rows()) {
                throw InvalidArgument("subset index " + std::to_string(i) + " out of range");
            }
            if (used[i]) throw InvalidArgument("subsets overlap at row " + std::to_string(i));
            used[i] = true;
            rows.push_back(i);
        }
    }
    return LabeledPool(data.select(rows), stacked_labels(a.size(), b.size()));
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Btct: return "btct";
        case Method::FriedmanRafsky: return "fr";
        case Method::Energy: return "energy";
        case Method::Mmd: return "mmd";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "btct") return Method::Btct;
    if (name == "fr") return Method::FriedmanRafsky;
    if (name == "energy") return Method::Energy;
    if (name == "mmd") return Method::Mmd;
    throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

}  // namespace clustersig
