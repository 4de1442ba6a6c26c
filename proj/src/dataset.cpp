#include "clustersig/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "clustersig/error.hpp"
#include "clustersig/rng.hpp"
#include "clustersig/serialize.hpp"

namespace clustersig {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return cells;
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

LoadedData parse_csv(const std::string& text, const CsvOptions& options) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line, options.delimiter);
        if (options.header && header.empty() && records.empty()) {
            header = std::move(cells);
            continue;
        }
        records.push_back(std::move(cells));
        record_lines.push_back(line_no);
    }
    if (records.empty()) throw InvalidData("CSV contains no data rows");

    const std::size_t width = records.front().size();
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw DataFormatError("expected " + std::to_string(width) + " cells, found " +
                                      std::to_string(records[r].size()),
                                  record_lines[r], std::min(records[r].size(), width) + 1);
        }
    }

    std::optional<std::size_t> label_col;
    if (options.label_column.empty()) {
        if (width >= 2) label_col = width - 1;
    } else if (options.label_column != "none") {
        if (all_digits(options.label_column)) {
            label_col = std::stoul(options.label_column);
        } else {
            const auto it = std::find(header.begin(), header.end(), options.label_column);
            if (it == header.end()) {
                throw InvalidArgument("label column '" + options.label_column + "' not found in header");
            }
            label_col = static_cast<std::size_t>(it - header.begin());
        }
        if (*label_col >= width) throw InvalidArgument("label column index out of range");
    }

    LoadedData out{DataMatrix(1, 1, {0.0}), {}, {}};
    const std::size_t d = width - (label_col ? 1 : 0);
    if (d == 0) throw InvalidData("CSV has no feature columns");
    for (std::size_t c = 0; c < width; ++c) {
        if (label_col && c == *label_col) continue;
        out.feature_names.push_back(c < header.size() ? header[c] : "x" + std::to_string(out.feature_names.size()));
    }

    std::vector<double> values;
    values.reserve(records.size() * d);
    std::vector<int> labels;
    std::map<std::string, int> label_ids;
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& cell = records[r][c];
            if (label_col && c == *label_col) {
                auto [it, inserted] = label_ids.emplace(cell, static_cast<int>(label_ids.size()) + 1);
                if (inserted) out.label_names.push_back(cell);
                labels.push_back(it->second);
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw DataFormatError("cannot parse '" + cell + "' as a number", record_lines[r], c + 1);
            }
            if (!std::isfinite(v)) throw DataFormatError("non-finite value '" + cell + "'", record_lines[r], c + 1);
            values.push_back(v);
        }
    }

    std::optional<std::vector<int>> label_opt;
    if (label_col) label_opt = std::move(labels);
    out.data = DataMatrix(records.size(), d, std::move(values), std::move(label_opt));
    return out;
}

LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return parse_csv(buf.str(), options);
}

std::string to_csv(const DataMatrix& data, bool header) {
    std::ostringstream os;
    if (header) {
        for (Index c = 0; c < data.cols(); ++c) os << (c ? "," : "") << 'x' << c;
        if (data.has_labels()) os << ",label";
        os << '\n';
    }
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index c = 0; c < data.cols(); ++c) os << (c ? "," : "") << format_double(data(i, c));
        if (data.has_labels()) os << ',' << data.labels()[i];
        os << '\n';
    }
    return os.str();
}

namespace {

std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> params;
    if (text.empty()) return params;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const std::string item = trim(std::string_view(text).substr(start, end - start));
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + item + "'");
        const std::string key = trim(std::string_view(item).substr(0, eq));
        const std::string val = trim(std::string_view(item).substr(eq + 1));
        double v = 0.0;
        const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
        if (val.empty() || res.ec != std::errc() || res.ptr != val.data() + val.size()) {
            throw InvalidArgument("value of '" + key + "' is not a number");
        }
        params[key] = v;
        start = end + 1;
    }
    return params;
}

Index count_param(double v, const char* key) {
    if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument(std::string(key) + " must be a positive integer");
    return static_cast<Index>(v);
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    const auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1));
    auto take = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, v] : params) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                throw InvalidArgument("unknown parameter '" + key + "' for " + kind);
            }
        }
    };
    auto get = [&](const char* key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };

    if (kind == "gaussian") {
        take({"n", "d", "mean", "scale"});
        GaussianSpec s;
        s.n = count_param(get("n", static_cast<double>(s.n)), "n");
        s.d = count_param(get("d", static_cast<double>(s.d)), "d");
        s.mean = get("mean", s.mean);
        s.scale = get("scale", s.scale);
        if (!(s.scale > 0.0)) throw InvalidArgument("scale must be positive");
        return s;
    }
    if (kind == "blobs") {
        take({"k", "n", "d", "sep", "scale"});
        BlobsSpec s;
        s.k = static_cast<int>(count_param(get("k", s.k), "k"));
        s.n_per_blob = count_param(get("n", static_cast<double>(s.n_per_blob)), "n");
        s.d = count_param(get("d", static_cast<double>(s.d)), "d");
        s.separation = get("sep", s.separation);
        s.scale = get("scale", s.scale);
        if (!(s.scale > 0.0)) throw InvalidArgument("scale must be positive");
        if (!(s.separation >= 0.0)) throw InvalidArgument("sep must be >= 0");
        return s;
    }
    if (kind == "moons") {
        take({"n", "noise"});
        MoonsSpec s;
        s.n = count_param(get("n", static_cast<double>(s.n)), "n");
        s.noise = get("noise", s.noise);
        if (s.n < 2) throw InvalidArgument("moons needs n >= 2");
        if (!(s.noise >= 0.0)) throw InvalidArgument("noise must be >= 0");
        return s;
    }
    throw InvalidArgument("unknown synthetic generator '" + kind + "'");
}

std::string synthetic_spec_name(const SyntheticSpec& spec) {
    struct Visitor {
        std::string operator()(const GaussianSpec& s) const {
            return "gaussian_n" + std::to_string(s.n) + "_d" + std::to_string(s.d);
        }
        std::string operator()(const BlobsSpec& s) const {
            return "blobs_k" + std::to_string(s.k) + "_n" + std::to_string(s.n_per_blob) + "_d" +
                   std::to_string(s.d);
        }
        std::string operator()(const MoonsSpec& s) const { return "moons_n" + std::to_string(s.n); }
    };
    return std::visit(Visitor{}, spec);
}

DataMatrix generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, "generator"));
    std::normal_distribution<double> normal(0.0, 1.0);

    if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
        std::vector<double> values(g->n * g->d);
        for (double& v : values) v = g->mean + g->scale * normal(rng);
        return DataMatrix(g->n, g->d, std::move(values), std::vector<int>(g->n, 1));
    }
    if (const auto* b = std::get_if<BlobsSpec>(&spec)) {
        const Index n = static_cast<Index>(b->k) * b->n_per_blob;
        const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(b->k))));
        std::vector<double> values(n * b->d, 0.0);
        std::vector<int> labels(n);
        Index row = 0;
        for (int c = 0; c < b->k; ++c) {
            std::vector<double> centre(b->d, 0.0);
            if (b->d == 1) {
                centre[0] = c * b->separation;
            } else {
                centre[0] = (c % grid) * b->separation;
                centre[1] = (c / grid) * b->separation;
            }
            for (Index p = 0; p < b->n_per_blob; ++p, ++row) {
                for (Index j = 0; j < b->d; ++j) values[row * b->d + j] = centre[j] + b->scale * normal(rng);
                labels[row] = c + 1;
            }
        }
        return DataMatrix(n, b->d, std::move(values), std::move(labels));
    }
    const auto& m = std::get<MoonsSpec>(spec);
    const Index outer = (m.n + 1) / 2;
    const Index inner = m.n - outer;
    std::vector<double> values;
    values.reserve(m.n * 2);
    std::vector<int> labels;
    labels.reserve(m.n);
    const double pi = std::acos(-1.0);
    for (Index i = 0; i < outer; ++i) {
        const double t = outer > 1 ? pi * static_cast<double>(i) / static_cast<double>(outer - 1) : 0.0;
        values.push_back(std::cos(t) + m.noise * normal(rng));
        values.push_back(std::sin(t) + m.noise * normal(rng));
        labels.push_back(1);
    }
    for (Index i = 0; i < inner; ++i) {
        const double t = inner > 1 ? pi * static_cast<double>(i) / static_cast<double>(inner - 1) : 0.0;
        values.push_back(1.0 - std::cos(t) + m.noise * normal(rng));
        values.push_back(0.5 - std::sin(t) + m.noise * normal(rng));
        labels.push_back(2);
    }
    return DataMatrix(m.n, 2, std::move(values), std::move(labels));
}

}  // namespace clustersig
