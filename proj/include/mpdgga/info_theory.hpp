#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpdgga/data_ingest.hpp"

namespace mpdgga {

/// Shannon entropy in bits of the empirical symbol distribution.
double entropy(std::span<const std::int32_t> values);

/// IG(target, feature) = H(target) - H(target | feature), in bits.
double information_gain(std::span<const std::int32_t> target, std::span<const std::int32_t> feature);

/// Precomputed gain ratios over the discretized view.
///
/// relevance[i]      = IG(class, F_i) / H(F_i)
/// redundancy(i, j)  = IG(F_j, F_i) / H(F_i), zero on the diagonal
///
/// Note that redundancy is not symmetric: row i is normalized by H(F_i).
/// Constant features (H = 0) get a zero relevance and a zero redundancy row.
struct GainRatioMatrix {
    std::size_t d = 0;
    std::vector<double> relevance;
    std::vector<double> redundancy;  // row-major d x d

    double fc(std::size_t i) const { return relevance[i]; }
    double ff(std::size_t i, std::size_t j) const { return redundancy[i * d + j]; }
    std::span<const double> ff_row(std::size_t i) const { return {redundancy.data() + i * d, d}; }

    static GainRatioMatrix from_values(std::vector<double> fc, std::vector<double> ff);
};

enum class Execution { serial, parallel };

/// Gain-ratio matrix over `rows` of the discretized view.
/// Mutual information per pair comes from a joint count table, O(d^2 n) overall.
/// The parallel kernel splits the pair loop across OpenMP threads; results are
/// bit-identical to the serial kernel.
GainRatioMatrix build_omega(const Dataset& ds, std::span<const std::size_t> rows, Execution exec = Execution::parallel,
                            int threads = 0);

/// Training partition shortcut.
GainRatioMatrix build_omega(const Dataset& ds, Execution exec = Execution::parallel, int threads = 0);

// Binary cache file: magic, key, d, relevance, redundancy (little-endian doubles).
void write_omega_cache(const std::filesystem::path& path, const std::string& key, const GainRatioMatrix& omega);
/// Returns nullopt when the file is absent or its key differs.
std::optional<GainRatioMatrix> read_omega_cache(const std::filesystem::path& path, const std::string& key);

std::string omega_cache_key(const std::string& data_digest, int bins, std::uint64_t split_seed, std::size_t subsample);

}  // namespace mpdgga
