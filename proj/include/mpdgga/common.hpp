#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mpdgga {

/// Bit mask over the feature columns; element k is 1 when feature k is selected.
using Mask = std::vector<std::uint8_t>;

/// Raised for malformed configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for unreadable or malformed data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t count_selected(std::span<const std::uint8_t> mask);

/// Indices of the set bits, ascending.
std::vector<std::size_t> selected_indices(std::span<const std::uint8_t> mask);

/// Canonical digest of a mask: hex of the packed bits, prefixed by the length.
std::string mask_key(std::span<const std::uint8_t> mask);

/// "0110..." rendering used in result tables.
std::string mask_to_string(std::span<const std::uint8_t> mask);
Mask mask_from_string(std::string_view bits);

/// 64-bit FNV-1a, used for cache keys. Not cryptographic.
class Fnv1a {
public:
    void update(std::string_view bytes);
    void update_u64(std::uint64_t v);
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

using Rng = std::mt19937_64;

/// Independent stream derived from a tuple of integers (seed, stream tag, ...).
Rng make_stream(std::initializer_list<std::uint64_t> parts);

/// Number of worker threads OpenMP regions should use; 0 means the runtime default.
int resolve_threads(int requested);

}  // namespace mpdgga
