#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clustersig/geometry.hpp"

namespace clustersig {

struct CsvOptions {
    bool header = false;
    // Column holding ground-truth labels: a 0-based index, a header name, or
    // "none". Empty means the last column.
    std::string label_column;
    char delimiter = ',';
};

struct LoadedData {
    DataMatrix data;
    std::vector<std::string> feature_names;  // from the header, else "x0", "x1", ...
    std::vector<std::string> label_names;    // label id i+1 was first seen as label_names[i]
};

// Labels are re-encoded to 1..K in order of first appearance. Blank lines are
// skipped. DataFormatError names the offending cell; IoError if unreadable.
LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
LoadedData parse_csv(const std::string& text, const CsvOptions& options = {});

// Features in shortest round-trip form, label id (when present) last.
std::string to_csv(const DataMatrix& data, bool header = true);

struct GaussianSpec {
    Index n = 240;
    Index d = 2;
    double mean = 0.0;
    double scale = 1.0;  // per-coordinate standard deviation
};

// K isotropic blobs with centres on a square grid, adjacent centres
// `separation` apart. Rows are grouped blob by blob.
struct BlobsSpec {
    int k = 2;
    Index n_per_blob = 120;
    Index d = 2;
    double separation = 6.0;
    double scale = 1.0;
};

struct MoonsSpec {
    Index n = 200;
    double noise = 0.1;
};

using SyntheticSpec = std::variant<GaussianSpec, BlobsSpec, MoonsSpec>;

// "gaussian:n=240,d=2,mean=0,scale=1", "blobs:k=4,n=60,d=2,sep=6,scale=1",
// "moons:n=200,noise=0.1". Omitted keys keep their defaults.
SyntheticSpec parse_synthetic_spec(const std::string& text);
std::string synthetic_spec_name(const SyntheticSpec& spec);

// Deterministic for a fixed (spec, seed). Gaussian rows all carry label 1.
DataMatrix generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace clustersig
