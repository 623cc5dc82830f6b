#include "mpdgga/info_theory.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

namespace mpdgga {

namespace {

constexpr char kCacheMagic[8] = {'M', 'P', 'D', 'G', 'O', 'M', 'G', '1'};

// Entropies below this are treated as a constant column.
constexpr double kZeroEntropy = 1e-12;

double entropy_of_sorted(std::span<const std::int32_t> sorted) {
    const double n = static_cast<double>(sorted.size());
    double h = 0.0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
            continue;
        }
        const double p = static_cast<double>(run) / n;
        h -= p * std::log2(p);
        run = 1;
    }
    return h;
}

// Entropy in bits from a count histogram using a precomputed c*log2(c) table:
// H = log2(n) - (1/n) * sum c log2 c
double entropy_from_counts(std::span<const std::uint32_t> counts, std::span<const double> clogc, double log2n, double inv_n) {
    double s = 0.0;
    for (auto c : counts) s += clogc[c];
    return std::max(0.0, log2n - s * inv_n);
}

double ratio(double mi, double h) {
    if (h < kZeroEntropy) return 0.0;
    return std::clamp(mi / h, 0.0, 1.0);
}

}  // namespace

double entropy(std::span<const std::int32_t> values) {
    if (values.empty()) throw std::invalid_argument("entropy of an empty vector");
    std::vector<std::int32_t> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return entropy_of_sorted(v);
}

double information_gain(std::span<const std::int32_t> target, std::span<const std::int32_t> feature) {
    if (target.size() != feature.size()) throw std::invalid_argument("information_gain: length mismatch");
    if (target.empty()) throw std::invalid_argument("information_gain: empty input");
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) pairs[i] = {feature[i], target[i]};
    std::sort(pairs.begin(), pairs.end());

    const double n = static_cast<double>(target.size());
    double conditional = 0.0;
    std::vector<std::int32_t> group;
    for (std::size_t b = 0; b < pairs.size();) {
        std::size_t e = b;
        group.clear();
        while (e < pairs.size() && pairs[e].first == pairs[b].first) group.push_back(pairs[e++].second);
        conditional += static_cast<double>(group.size()) / n * entropy_of_sorted(group);
        b = e;
    }
    return std::max(0.0, entropy(target) - conditional);
}

GainRatioMatrix GainRatioMatrix::from_values(std::vector<double> fc, std::vector<double> ff) {
    GainRatioMatrix m;
    m.d = fc.size();
    if (ff.size() != m.d * m.d) throw std::invalid_argument("redundancy matrix must be d x d");
    m.relevance = std::move(fc);
    m.redundancy = std::move(ff);
    return m;
}

GainRatioMatrix build_omega(const Dataset& ds, std::span<const std::size_t> rows, Execution exec, int threads) {
    if (rows.size() < 2) throw DataError("gain-ratio matrix needs at least 2 rows");
    const std::size_t d = ds.d;
    const std::size_t n = rows.size();

    // Compact copy of the selected rows, one contiguous code vector per feature.
    std::vector<std::int32_t> codes(d * n);
    for (std::size_t j = 0; j < d; ++j) {
        auto col = ds.column(j);
        for (std::size_t r = 0; r < n; ++r) codes[j * n + r] = col[rows[r]];
    }
    std::vector<std::int32_t> y(n);
    for (std::size_t r = 0; r < n; ++r) y[r] = ds.y[rows[r]];

    std::vector<double> clogc(n + 1, 0.0);
    for (std::size_t c = 1; c <= n; ++c) clogc[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
    const double log2n = std::log2(static_cast<double>(n));
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<std::size_t> card(d);
    std::int32_t max_bins = static_cast<std::int32_t>(ds.n_classes);
    for (std::size_t j = 0; j < d; ++j) {
        card[j] = static_cast<std::size_t>(ds.bins[j]);
        max_bins = std::max(max_bins, ds.bins[j]);
    }

    auto feature = [&](std::size_t j) { return std::span<const std::int32_t>(codes.data() + j * n, n); };

    auto joint_entropy = [&](std::span<const std::int32_t> a, std::span<const std::int32_t> b, std::size_t card_b,
                             std::vector<std::uint32_t>& table, std::size_t cells) {
        std::fill(table.begin(), table.begin() + static_cast<std::ptrdiff_t>(cells), 0u);
        for (std::size_t r = 0; r < n; ++r)
            ++table[static_cast<std::size_t>(a[r]) * card_b + static_cast<std::size_t>(b[r])];
        return entropy_from_counts({table.data(), cells}, clogc, log2n, inv_n);
    };

    GainRatioMatrix omega;
    omega.d = d;
    omega.relevance.assign(d, 0.0);
    omega.redundancy.assign(d * d, 0.0);

    std::vector<double> h(d);
    const std::size_t table_cells = static_cast<std::size_t>(max_bins) * static_cast<std::size_t>(max_bins);
    const double h_class = [&] {
        std::vector<std::uint32_t> counts(ds.n_classes, 0);
        for (auto c : y) ++counts[static_cast<std::size_t>(c)];
        return entropy_from_counts(counts, clogc, log2n, inv_n);
    }();

    const int nthreads = exec == Execution::parallel ? resolve_threads(threads) : 1;

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
    {
        std::vector<std::uint32_t> table(table_cells);

#pragma omp for schedule(static)
        for (std::size_t j = 0; j < d; ++j) {
            std::fill_n(table.begin(), card[j], 0u);
            for (auto v : feature(j)) ++table[static_cast<std::size_t>(v)];
            h[j] = entropy_from_counts({table.data(), card[j]}, clogc, log2n, inv_n);
        }

#pragma omp for schedule(static)
        for (std::size_t j = 0; j < d; ++j) {
            const double hj = joint_entropy(feature(j), y, ds.n_classes, table, card[j] * ds.n_classes);
            omega.relevance[j] = ratio(std::max(0.0, h_class + h[j] - hj), h[j]);
        }

        // rows are uneven (i < k), so hand them out dynamically
#pragma omp for schedule(dynamic, 1)
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t k = i + 1; k < d; ++k) {
                const double hik = joint_entropy(feature(i), feature(k), card[k], table, card[i] * card[k]);
                const double mi = std::max(0.0, h[i] + h[k] - hik);
                omega.redundancy[i * d + k] = ratio(mi, h[i]);
                omega.redundancy[k * d + i] = ratio(mi, h[k]);
            }
        }
    }
    return omega;
}

GainRatioMatrix build_omega(const Dataset& ds, Execution exec, int threads) {
    return build_omega(ds, ds.train_rows, exec, threads);
}

std::string omega_cache_key(const std::string& data_digest, int bins, std::uint64_t split_seed, std::size_t subsample) {
    return "v1|" + data_digest + "|bins=" + std::to_string(bins) + "|split=" + std::to_string(split_seed) +
           "|subsample=" + std::to_string(subsample);
}

void write_omega_cache(const std::filesystem::path& path, const std::string& key, const GainRatioMatrix& omega) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write(kCacheMagic, sizeof kCacheMagic);
    put_u64(key.size());
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
    put_u64(omega.d);
    out.write(reinterpret_cast<const char*>(omega.relevance.data()),
              static_cast<std::streamsize>(omega.relevance.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(omega.redundancy.data()),
              static_cast<std::streamsize>(omega.redundancy.size() * sizeof(double)));
    if (!out) throw DataError("short write to " + path.string());
}

std::optional<GainRatioMatrix> read_omega_cache(const std::filesystem::path& path, const std::string& key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[sizeof kCacheMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(std::begin(magic), std::end(magic), kCacheMagic)) return std::nullopt;
    auto get_u64 = [&] {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    };
    const auto key_len = get_u64();
    if (!in || key_len > (1u << 20)) return std::nullopt;
    std::string stored(key_len, '\0');
    in.read(stored.data(), static_cast<std::streamsize>(key_len));
    if (!in || stored != key) return std::nullopt;
    const auto d = get_u64();
    if (!in || d > (1u << 16)) return std::nullopt;
    std::vector<double> fc(d), ff(d * d);
    in.read(reinterpret_cast<char*>(fc.data()), static_cast<std::streamsize>(fc.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(ff.data()), static_cast<std::streamsize>(ff.size() * sizeof(double)));
    if (!in) return std::nullopt;
    return GainRatioMatrix::from_values(std::move(fc), std::move(ff));
}

}  // namespace mpdgga
