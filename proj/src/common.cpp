#include "mpdgga/common.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>

namespace mpdgga {

std::size_t count_selected(std::span<const std::uint8_t> mask) {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; }));
}

std::vector<std::size_t> selected_indices(std::span<const std::uint8_t> mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

std::string mask_key(std::span<const std::uint8_t> mask) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string key = std::to_string(mask.size());
    key.push_back(':');
    for (std::size_t i = 0; i < mask.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t b = 0; b < 4 && i + b < mask.size(); ++b)
            if (mask[i + b]) nibble |= 1u << b;
        key.push_back(digits[nibble]);
    }
    return key;
}

std::string mask_to_string(std::span<const std::uint8_t> mask) {
    std::string s(mask.size(), '0');
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s[i] = '1';
    return s;
}

Mask mask_from_string(std::string_view bits) {
    Mask m(bits.size(), 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            m[i] = 1;
        else if (bits[i] != '0')
            throw DataError("mask string contains a character other than 0/1");
    }
    return m;
}

void Fnv1a::update(std::string_view bytes) {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
}

void Fnv1a::update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        state_ ^= (v >> (8 * i)) & 0xffu;
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

Rng make_stream(std::initializer_list<std::uint64_t> parts) {
    std::vector<std::uint32_t> words;
    words.reserve(parts.size() * 2);
    for (auto p : parts) {
        words.push_back(static_cast<std::uint32_t>(p));
        words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

int resolve_threads(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace mpdgga
