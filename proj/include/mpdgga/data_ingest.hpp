#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mpdgga/common.hpp"

namespace mpdgga {

/// One feature column as read from disk. Cells that are empty or "?" are missing.
struct RawColumn {
    std::string name;
    bool numeric = true;
    std::vector<std::string> text;
    std::vector<double> values;  // parsed cells when numeric; NaN marks a missing cell
};

struct RawTable {
    std::vector<RawColumn> columns;  // features in file order, label column excluded
    std::string label_column;
    std::vector<std::string> labels;
    std::size_t n_rows = 0;

    std::size_t n_features() const { return columns.size(); }
    std::size_t n_classes() const;
};

/// Parse CSV text. Without a header, columns are named "0", "1", ... by position.
RawTable parse_csv(std::istream& in, const std::string& label_column, bool header);
RawTable load_csv(const std::filesystem::path& path, const std::string& label_column, bool header);

/// Seeded stratified row cap; returns the table unchanged when cap is 0 or >= n_rows.
RawTable stratified_subsample(const RawTable& raw, std::size_t cap, std::uint64_t seed);

enum class Partition : std::uint8_t { train, validation, test };

struct PrepareOptions {
    /// Fit normalization, binning ranges and imputation on the training rows only.
    /// When false every row contributes (used for whole-table transforms).
    bool fit_on_training_only = true;
};

struct PrepareReport {
    std::vector<std::size_t> missing_per_column;
    std::vector<std::string> warnings;
};

/// Prepared sample table. The continuous view is row-major (for distances), the
/// discretized view column-major (for entropy counting).
struct Dataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t n_classes = 0;
    std::vector<double> x_cont;
    std::vector<std::int32_t> x_disc;
    std::vector<std::int32_t> bins;  // symbol count per column
    std::vector<std::int32_t> y;
    std::vector<Partition> split;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    std::vector<std::size_t> test_rows;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    PrepareReport report;

    std::span<const double> row(std::size_t i) const { return {x_cont.data() + i * d, d}; }
    std::span<const std::int32_t> column(std::size_t j) const { return {x_disc.data() + j * n, n}; }
    double cont(std::size_t i, std::size_t j) const { return x_cont[i * d + j]; }
    std::int32_t disc(std::size_t i, std::size_t j) const { return x_disc[j * n + i]; }
};

/// Encode labels, impute, min-max scale, equal-width bin and split 8:1:1 by class.
Dataset prepare(const RawTable& raw, int bins, std::uint64_t split_seed, const PrepareOptions& options = {});

/// Values mapped into [0,1] from [lo,hi], clamped; a degenerate range maps to 0.
double min_max_scale(double v, double lo, double hi);
/// Equal-width bin index in [0,bins); the top edge belongs to the last bin.
std::int32_t equal_width_bin(double v, double lo, double hi, int bins);

struct SyntheticSpec {
    std::size_t n_rows = 200;
    std::size_t n_informative = 4;
    std::size_t n_redundant = 2;
    std::size_t n_noise = 6;
    std::size_t n_classes = 2;
    std::uint64_t seed = 1;

    std::size_t n_features() const { return n_informative + n_redundant + n_noise; }
};

/// Synthetic table with columns ordered informative, redundant, noise.
/// Redundant column r is a noisy copy of informative column r % n_informative.
RawTable synthetic_table(const SyntheticSpec& spec);
Dataset generate_synthetic(const SyntheticSpec& spec, int bins = 10);

/// Small JSON document naming a CSV file and how to read it.
struct DatasetManifest {
    std::string name;
    std::filesystem::path path;  // resolved against the manifest's directory
    std::string label_column;
    bool header = true;
    int bins = 10;
    std::size_t subsample = 0;
    std::vector<std::string> ignore_columns;  // dropped after loading (ids, annotations)
};

DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

/// Digest of the data file bytes; part of the gain-ratio cache key.
std::string file_digest(const std::filesystem::path& path);

}  // namespace mpdgga
