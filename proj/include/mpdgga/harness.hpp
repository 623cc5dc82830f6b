#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpdgga/data_ingest.hpp"
#include "mpdgga/evolution.hpp"

namespace mpdgga {

/// Experiment parameterization, read from a JSON file.
struct RunConfig {
    std::filesystem::path manifest_path;
    DatasetManifest manifest;
    EvolutionConfig evolution;
    int bins = 10;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::optional<std::uint64_t> split_seed;  // unset: each repetition splits with its own seed
    std::size_t subsample = 0;
    std::filesystem::path out = "results";
    std::optional<std::filesystem::path> omega_cache;

    std::uint64_t split_seed_for(std::uint64_t run_seed) const { return split_seed.value_or(run_seed); }
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> subsample;
    std::optional<int> threads;
    std::optional<int> bins;
    std::optional<double> mutation_prob;
    std::optional<double> alpha;
    std::optional<int> k;
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);
/// Checks referenced files, seeds and the evolution parameters. Throws ConfigError.
void validate(const RunConfig& config);

/// "1,2,5-7" -> {1,2,5,6,7}
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Raw table loaded once per battery; prepared per split seed.
struct LoadedData {
    RawTable raw;
    std::string digest;
};

LoadedData load_data(const RunConfig& config);

struct SeedRow {
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double feature_ratio = 0.0;
    std::size_t n_selected = 0;
    double val_fitness = 0.0;
    std::string mask;
};

struct SeedRunInfo {
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::size_t classifier_calls = 0;
    std::size_t cache_hits = 0;
    std::string omega_cache;  // "hit", "miss" or "off"
};

struct Aggregate {
    double median = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// One metric column of a battery: accuracy, precision, recall, f1, feature_ratio.
struct AggregateRow {
    Aggregate accuracy, precision, recall, f1, feature_ratio;
};

struct BatteryResult {
    std::string dataset;
    std::vector<SeedRow> rows;
    std::vector<SeedRunInfo> info;
    std::vector<std::vector<TraceRow>> traces;
    AggregateRow aggregate;
};

/// Aggregates over values as printed (six decimals), so they can be recomputed from the table.
AggregateRow aggregate_rows(const std::vector<SeedRow>& rows);

/// Runs every seed and writes per_seed.csv, aggregate.csv, trace.csv and run_manifest.json into out_dir.
BatteryResult run_battery(const RunConfig& config, const EvolutionConfig& evolution, const LoadedData& data,
                          const std::filesystem::path& out_dir, std::ostream& log);

// Tables.
std::string format_value(double v);
void write_per_seed_csv(const std::filesystem::path& path, const std::vector<SeedRow>& rows);
std::vector<SeedRow> read_per_seed_csv(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path, const std::string& dataset, const AggregateRow& agg);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv_table(const std::filesystem::path& path);

/// The six component combinations, in table order.
std::vector<EvolutionFlags> ablation_rows();

enum class SweepParameter { subpopulations, elites };
SweepParameter parse_sweep_parameter(const std::string& name);

// Subcommands. Each returns the battery results it produced.
BatteryResult cmd_run(const RunConfig& config, std::ostream& log);
std::vector<BatteryResult> cmd_ablation(const RunConfig& config, std::ostream& log);
std::vector<BatteryResult> cmd_sensitivity(const RunConfig& config, SweepParameter parameter,
                                           const std::vector<std::size_t>& values, std::ostream& log);
/// Writes one cache file per split seed into out_dir; returns the paths.
std::vector<std::filesystem::path> cmd_omega_dump(const RunConfig& config, const std::filesystem::path& out_dir,
                                                  std::ostream& log);

std::filesystem::path omega_cache_file(const std::filesystem::path& dir, const std::string& key);

}  // namespace mpdgga
