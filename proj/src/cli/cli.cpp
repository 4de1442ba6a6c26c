#include "clustersig/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "clustersig/bench.hpp"
#include "clustersig/dataset.hpp"
#include "clustersig/error.hpp"
#include "clustersig/serialize.hpp"
#include "clustersig/subset_test.hpp"

namespace clustersig::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Format { Json, Csv, Text };

struct CommonOptions {
    int k = 7;
    double alpha = 0.05;
    std::size_t permutations = 1000;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> methods;
    std::string label_col;
    bool header = false;
    std::size_t min_leaf = 8;
    std::size_t min_node = 16;
    std::string empty_boundary = "widen";
    std::string out_dir;
    std::string format = "text";
    std::vector<std::string> datasets;
    std::vector<std::string> synthetic;
};

struct TestOptions {
    std::string labels;      // "a,b"
    std::string a_indices;   // "0,1,2"
    std::string b_indices;
    bool median_split = false;
    std::string cluster;     // restrict the median split to one label
    bool no_normalize = false;
};

void add_common(CLI::App& app, CommonOptions& o, bool datasets = true) {
    app.add_option("--k", o.k, "Neighbours per boundary point")->check(CLI::PositiveNumber);
    app.add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    app.add_option("--permutations", o.permutations, "Permutations for fr/energy/mmd")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Root seed (falls back to $CLUSTER_SIG_SEED, then 0)");
    app.add_option("--method", o.methods, "btct, fr, energy or mmd (repeatable)")
        ->check(CLI::IsMember({"btct", "fr", "energy", "mmd"}));
    app.add_option("--label-col", o.label_col, "Label column: index, header name or 'none' (default last)");
    app.add_flag("--header", o.header, "First CSV line is a header");
    app.add_option("--min-leaf", o.min_leaf, "Minimum samples per tree leaf")->check(CLI::PositiveNumber);
    app.add_option("--min-node", o.min_node, "Minimum node size for divisive clustering");
    app.add_option("--empty-boundary", o.empty_boundary, "Policy when BTCT finds no boundary point")
        ->check(CLI::IsMember({"widen", "reject", "accept", "error"}));
    app.add_option("--out", o.out_dir, "Output directory (default: stdout)");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--synthetic", o.synthetic, "Synthetic dataset spec, e.g. blobs:k=4,n=60 (repeatable)");
    if (datasets) app.add_option("datasets", o.datasets, "CSV dataset files");
}

std::uint64_t resolve_seed(const CommonOptions& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("CLUSTER_SIG_SEED")) {
        std::uint64_t v = 0;
        const std::string s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw InvalidArgument("CLUSTER_SIG_SEED is not an unsigned integer: '" + s + "'");
        }
        return v;
    }
    return 0;
}

RunConfig make_config(const CommonOptions& o) {
    RunConfig c;
    c.k = o.k;
    c.alpha = o.alpha;
    c.permutations = o.permutations;
    c.seed = resolve_seed(o);
    c.min_leaf = o.min_leaf;
    c.min_node = o.min_node;
    if (o.empty_boundary == "reject") {
        c.empty_boundary = EmptyBoundaryPolicy::RejectOnEmpty;
    } else if (o.empty_boundary == "accept") {
        c.empty_boundary = EmptyBoundaryPolicy::AcceptOnEmpty;
    } else if (o.empty_boundary == "error") {
        c.empty_boundary = EmptyBoundaryPolicy::Error;
    }
    if (!o.methods.empty()) {
        c.methods.clear();
        for (const auto& m : o.methods) {
            const Method parsed = parse_method(m);
            if (std::find(c.methods.begin(), c.methods.end(), parsed) == c.methods.end()) c.methods.push_back(parsed);
        }
    }
    c.validate();
    return c;
}

Format parse_format(const std::string& f) {
    if (f == "json") return Format::Json;
    if (f == "csv") return Format::Csv;
    return Format::Text;
}

std::string_view extension(Format f) {
    switch (f) {
        case Format::Json: return ".json";
        case Format::Csv: return ".csv";
        case Format::Text: return ".txt";
    }
    return ".txt";
}

// temp + rename so readers never see a partial file
void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f) throw IoError("error writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

struct NamedData {
    std::string name;
    LoadedData loaded;
};

struct LoadResult {
    std::vector<NamedData> datasets;
    std::size_t failures = 0;
};

LoadResult load_all(const CommonOptions& o, std::uint64_t seed, std::ostream& err) {
    LoadResult r;
    CsvOptions csv;
    csv.header = o.header;
    csv.label_column = o.label_col;
    for (const auto& path : o.datasets) {
        try {
            r.datasets.push_back({fs::path(path).stem().string(), load_csv(path, csv)});
        } catch (const Error& e) {
            err << "error: " << path << ": " << e.what() << '\n';
            ++r.failures;
        }
    }
    for (const auto& text : o.synthetic) {
        const SyntheticSpec spec = parse_synthetic_spec(text);
        DataMatrix data = generate_synthetic(spec, seed);
        r.datasets.push_back({synthetic_spec_name(spec) + "_s" + std::to_string(seed),
                              LoadedData{std::move(data), {}, {}}});
    }
    return r;
}

std::string render(const ExperimentReport& report, Format f) {
    switch (f) {
        case Format::Json: return report_to_json(report).dump(2) + "\n";
        case Format::Csv: return report_to_csv(report);
        case Format::Text: break;
    }
    std::string text = report_to_text(report);
    for (const auto& row : report.rows) {
        if (row.model.is_null()) continue;
        // Text rendering of trees/hierarchies is rebuilt from the model document.
        text += "  [" + std::string(method_name(row.method)) + "]\n";
        std::function<void(const json&, int)> walk = [&](const json& node, int depth) {
            const std::string indent(static_cast<std::size_t>(depth + 2) * 2, ' ');
            if (node.contains("left")) {
                if (node.contains("feature")) {
                    text += indent + "x" + std::to_string(node["feature"].get<std::size_t>()) + " <= " +
                            format_double(node["threshold"].get<double>());
                } else {
                    text += indent + "split";
                }
                text += " (n=" + std::to_string(node["size"].get<std::size_t>()) +
                        ", p=" + format_double(node["p_value"].get<double>()) + ")\n";
                walk(node["left"], depth + 1);
                walk(node["right"], depth + 1);
            } else {
                text += indent + "cluster " + std::to_string(node["cluster"].get<int>()) +
                        " (n=" + std::to_string(node["size"].get<std::size_t>()) + ")\n";
            }
        };
        walk(row.model, 0);
    }
    return text;
}

// Two-column plot series, one file per figure analog.
using Series = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

void collect_series(const ExperimentReport& report, Series& series) {
    for (const auto& [method, a] : report.aggregates) {
        const std::string key = report.dataset + "/" + std::string(method_name(method));
        auto add = [&](const std::string& file, const std::optional<double>& v) {
            if (v) series[file].emplace_back(key, format_double(*v));
        };
        switch (report.protocol) {
            case Protocol::Same: add("same_accuracy", a.accuracy); break;
            case Protocol::Different: add("diff_accuracy", a.accuracy); break;
            case Protocol::Tree:
                add("purity", a.purity);
                add("f_score", a.f_score);
                if (a.shape) {
                    add("avg_depth", a.shape->avg_depth);
                    add("max_depth", a.shape->max_depth);
                    add("n_leaf", a.shape->n_leaf);
                }
                break;
            case Protocol::Hierarchy:
                if (a.predicted_k) add("predicted_k", *a.predicted_k);
                break;
        }
    }
    if (report.protocol == Protocol::Hierarchy && report.true_k > 0) {
        series["true_k"].emplace_back(report.dataset, std::to_string(report.true_k));
    }
}

void write_series(const fs::path& dir, const Series& series) {
    for (const auto& [file, rows] : series) {
        std::string body = "series,value\n";
        for (const auto& [k, v] : rows) body += k + "," + v + "\n";
        write_atomic(dir / "series" / (file + ".csv"), body);
    }
}

int run_reports(const CommonOptions& o, const std::vector<Protocol>& protocols, std::ostream& out,
                std::ostream& err) {
    const RunConfig config = make_config(o);
    const Format format = parse_format(o.format);
    LoadResult loaded = load_all(o, config.seed, err);
    std::size_t failures = loaded.failures;
    Series series;

    for (const auto& nd : loaded.datasets) {
        bool any_ok = false;
        for (Protocol protocol : protocols) {
            try {
                const ExperimentReport report = run_protocol({nd.name, nd.loaded.data}, protocol, config);
                any_ok = true;
                collect_series(report, series);
                for (const auto& w : report.warnings) err << "warning: " << nd.name << ": " << w << '\n';
                const std::string body = render(report, format);
                if (o.out_dir.empty()) {
                    out << body;
                } else {
                    const std::string file = nd.name + "." + std::string(protocol_name(protocol)) +
                                             std::string(extension(format));
                    write_atomic(fs::path(o.out_dir) / file, body);
                }
            } catch (const Error& e) {
                err << "error: " << nd.name << " (" << protocol_name(protocol) << "): " << e.what() << '\n';
            }
        }
        if (!any_ok) ++failures;
    }
    if (!o.out_dir.empty()) write_series(o.out_dir, series);
    return failures > 0 ? 1 : 0;
}

std::vector<Index> parse_index_list(const std::string& text) {
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Index v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
            throw InvalidArgument("bad index '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

int resolve_label(const LoadedData& ld, const std::string& name) {
    const auto it = std::find(ld.label_names.begin(), ld.label_names.end(), name);
    if (it != ld.label_names.end()) return static_cast<int>(it - ld.label_names.begin()) + 1;
    int id = 0;
    const auto res = std::from_chars(name.data(), name.data() + name.size(), id);
    if (res.ec == std::errc() && res.ptr == name.data() + name.size() && id >= 1 &&
        id <= ld.data.num_clusters()) {
        return id;
    }
    throw InvalidArgument("unknown label '" + name + "'");
}

std::pair<std::vector<Index>, std::vector<Index>> resolve_subsets(const LoadedData& ld, const TestOptions& t) {
    const int modes = (t.labels.empty() ? 0 : 1) + (t.a_indices.empty() && t.b_indices.empty() ? 0 : 1) +
                      (t.median_split ? 1 : 0);
    if (modes != 1) {
        throw InvalidArgument("choose exactly one of --labels, --a-indices/--b-indices, --median-split");
    }
    const DataMatrix& data = ld.data;
    if (!t.labels.empty()) {
        const auto comma = t.labels.find(',');
        if (comma == std::string::npos) throw InvalidArgument("--labels expects two values 'a,b'");
        if (!data.has_labels()) throw InvalidArgument("--labels needs a label column");
        const int la = resolve_label(ld, t.labels.substr(0, comma));
        const int lb = resolve_label(ld, t.labels.substr(comma + 1));
        if (la == lb) throw InvalidArgument("subsets A and B are the same cluster");
        std::vector<Index> a;
        std::vector<Index> b;
        for (Index i = 0; i < data.rows(); ++i) {
            if (data.labels()[i] == la) a.push_back(i);
            if (data.labels()[i] == lb) b.push_back(i);
        }
        return {a, b};
    }
    if (t.median_split) {
        std::vector<Index> members;
        const int only = t.cluster.empty() ? 0 : resolve_label(ld, t.cluster);
        for (Index i = 0; i < data.rows(); ++i) {
            if (only == 0 || data.labels()[i] == only) members.push_back(i);
        }
        if (members.size() < 2) throw InvalidArgument("median split needs at least 2 samples");
        std::vector<int> one(data.rows(), 2);
        for (Index i : members) one[i] = 1;
        const auto pairs = same_cluster_pairs(data.with_labels(one));
        return {pairs.front().a, pairs.front().b};
    }
    if (t.a_indices.empty() || t.b_indices.empty()) throw InvalidArgument("both --a-indices and --b-indices are required");
    return {parse_index_list(t.a_indices), parse_index_list(t.b_indices)};
}

int cmd_test(const CommonOptions& o, const TestOptions& t, std::ostream& out, std::ostream& err) {
    const RunConfig config = make_config(o);
    LoadResult loaded = load_all(o, config.seed, err);
    if (loaded.failures > 0) return 1;
    if (loaded.datasets.size() != 1) throw InvalidArgument("test takes exactly one dataset");
    const NamedData& nd = loaded.datasets.front();

    DataMatrix data = t.no_normalize ? nd.loaded.data : min_max_normalize(nd.loaded.data);
    const LoadedData view{data, nd.loaded.feature_names, nd.loaded.label_names};
    const auto [a, b] = resolve_subsets(view, t);
    const LabeledPool pool = LabeledPool::from_subsets(data, a, b);

    const TestSettings settings = config.test_settings();
    const Format format = parse_format(o.format);
    json outcomes = json::array();
    std::ostringstream text;
    std::ostringstream csv;
    text << "dataset " << nd.name << ": |A| = " << a.size() << ", |B| = " << b.size() << ", alpha = "
         << format_double(config.alpha) << '\n';
    csv << "method,statistic,p_value,boundary_count,decision\n";
    for (Method m : config.methods) {
        const TestOutcome r = make_test(m, settings)->run(pool);
        const std::string decision = r.rejects(config.alpha) ? "reject" : "fail to reject";
        std::string b_count;
        if (const auto* d = std::get_if<BtctDetail>(&r.detail)) b_count = std::to_string(d->boundary.size());
        text << "  " << method_name(m) << ": statistic = " << format_double(r.statistic)
             << ", p = " << format_double(r.p_value);
        if (!b_count.empty()) text << ", b = " << b_count;
        if (r.no_boundary()) text << " (no boundary points)";
        text << " -> " << decision << '\n';
        csv << method_name(m) << ',' << format_double(r.statistic) << ',' << format_double(r.p_value) << ','
            << b_count << ',' << decision << '\n';
        json j = outcome_to_json(r);
        j["decision"] = decision;
        outcomes.push_back(std::move(j));
    }

    std::string body;
    switch (format) {
        case Format::Json: {
            const json doc = {{"schema_version", kSchemaVersion},
                              {"dataset", nd.name},
                              {"config", config_to_json(config)},
                              {"n_a", a.size()},
                              {"n_b", b.size()},
                              {"outcomes", outcomes}};
            body = doc.dump(2) + "\n";
            break;
        }
        case Format::Csv: body = csv.str(); break;
        case Format::Text: body = text.str(); break;
    }
    if (o.out_dir.empty()) {
        out << body;
    } else {
        write_atomic(fs::path(o.out_dir) / (nd.name + ".test" + std::string(extension(format))), body);
    }
    return 0;
}

int cmd_gen(const CommonOptions& o, std::ostream& out) {
    if (o.synthetic.empty()) throw InvalidArgument("gen needs --synthetic SPEC");
    const std::uint64_t seed = resolve_seed(o);
    for (const auto& text : o.synthetic) {
        const SyntheticSpec spec = parse_synthetic_spec(text);
        const std::string csv = to_csv(generate_synthetic(spec, seed), true);
        if (o.out_dir.empty()) {
            out << csv;
        } else {
            write_atomic(fs::path(o.out_dir) / (synthetic_spec_name(spec) + "_s" + std::to_string(seed) + ".csv"), csv);
        }
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-cluster significance testing and significance-gated clustering"};
    app.require_subcommand(1);

    CommonOptions test_o, bench_o, tree_o, hclust_o, gen_o;
    TestOptions test_t;
    std::string protocol = "all";

    auto* test = app.add_subcommand("test", "Test whether two subsets belong to the same cluster");
    add_common(*test, test_o);
    test->add_option("--labels", test_t.labels, "Two label values 'a,b' selecting whole clusters");
    test->add_option("--a-indices", test_t.a_indices, "Comma-separated row indices of subset A");
    test->add_option("--b-indices", test_t.b_indices, "Comma-separated row indices of subset B");
    test->add_flag("--median-split", test_t.median_split, "Split at the median of the first feature");
    test->add_option("--cluster", test_t.cluster, "Restrict --median-split to one label");
    test->add_flag("--no-normalize", test_t.no_normalize, "Skip min-max normalization");

    auto* bench = app.add_subcommand("bench", "Same-cluster and different-cluster identification protocols");
    add_common(*bench, bench_o);
    bench->add_option("--protocol", protocol, "same, diff or all")->check(CLI::IsMember({"same", "diff", "all"}));

    auto* tree = app.add_subcommand("tree", "Significance-gated interpretable clustering tree");
    add_common(*tree, tree_o);
    auto* hclust = app.add_subcommand("hclust", "Significance-gated divisive Ward clustering");
    add_common(*hclust, hclust_o);
    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    add_common(*gen, gen_o, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*test) return cmd_test(test_o, test_t, out, err);
        if (*bench) {
            if (bench_o.datasets.empty() && bench_o.synthetic.empty()) {
                err << "usage: bench needs at least one dataset or --synthetic spec\n";
                return 2;
            }
            std::vector<Protocol> protocols;
            if (protocol != "diff") protocols.push_back(Protocol::Same);
            if (protocol != "same") protocols.push_back(Protocol::Different);
            return run_reports(bench_o, protocols, out, err);
        }
        for (auto [sub, opts, proto] : {std::tuple{tree, &tree_o, Protocol::Tree},
                                        std::tuple{hclust, &hclust_o, Protocol::Hierarchy}}) {
            if (!*sub) continue;
            if (opts->datasets.empty() && opts->synthetic.empty()) {
                err << "usage: " << sub->get_name() << " needs at least one dataset or --synthetic spec\n";
                return 2;
            }
            return run_reports(*opts, {proto}, out, err);
        }
        if (*gen) return cmd_gen(gen_o, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace clustersig::cli
