#include "mpdgga/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpdgga {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

bool parse_number(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ceil-free rounding of n/10 used by both the split and the subsample cap
std::size_t tenth(std::size_t n) { return (n + 5) / 10; }

}  // namespace

std::size_t RawTable::n_classes() const {
    std::set<std::string> distinct(labels.begin(), labels.end());
    return distinct.size();
}

RawTable parse_csv(std::istream& in, const std::string& label_column, bool header) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_record(line);
        if (header && !have_header) {
            names = std::move(fields);
            have_header = true;
            continue;
        }
        const std::size_t expected = !names.empty() ? names.size() : (records.empty() ? fields.size() : records.front().size());
        if (fields.size() != expected)
            throw DataError("ragged row at line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(expected));
        records.push_back(std::move(fields));
    }
    if (records.empty()) throw DataError("empty table");
    const std::size_t width = records.front().size();
    if (names.empty())
        for (std::size_t i = 0; i < width; ++i) names.push_back(std::to_string(i));

    auto label_it = std::find(names.begin(), names.end(), label_column);
    if (label_it == names.end()) throw DataError("label column '" + label_column + "' not found");
    const auto label_idx = static_cast<std::size_t>(label_it - names.begin());

    RawTable table;
    table.label_column = label_column;
    table.n_rows = records.size();
    table.labels.reserve(records.size());
    for (auto& r : records) {
        if (is_missing(r[label_idx])) throw DataError("missing label value");
        table.labels.push_back(r[label_idx]);
    }
    for (std::size_t c = 0; c < width; ++c) {
        if (c == label_idx) continue;
        RawColumn col;
        col.name = names[c];
        col.text.reserve(records.size());
        for (auto& r : records) col.text.push_back(std::move(r[c]));
        col.values.assign(records.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < records.size() && col.numeric; ++i) {
            if (is_missing(col.text[i])) continue;
            col.numeric = parse_number(col.text[i], col.values[i]);
        }
        if (!col.numeric) col.values.clear();
        table.columns.push_back(std::move(col));
    }
    if (table.n_classes() < 2) throw DataError("label column needs at least 2 distinct values");
    return table;
}

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column, bool header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_csv(in, label_column, header);
}

RawTable stratified_subsample(const RawTable& raw, std::size_t cap, std::uint64_t seed) {
    if (cap == 0 || cap >= raw.n_rows) return raw;
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < raw.n_rows; ++i) by_class[raw.labels[i]].push_back(i);

    Rng rng = make_stream({seed, 0x5b5a3d1eULL});
    std::vector<std::size_t> keep;
    for (auto& [label, rows] : by_class) {
        std::shuffle(rows.begin(), rows.end(), rng);
        // proportional share, at least 3 rows so the class survives the split
        auto share = static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * cap / raw.n_rows));
        share = std::clamp<std::size_t>(share, std::min<std::size_t>(3, rows.size()), rows.size());
        keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(share));
    }
    std::sort(keep.begin(), keep.end());

    RawTable out;
    out.label_column = raw.label_column;
    out.n_rows = keep.size();
    for (auto i : keep) out.labels.push_back(raw.labels[i]);
    for (const auto& col : raw.columns) {
        RawColumn c;
        c.name = col.name;
        c.numeric = col.numeric;
        for (auto i : keep) {
            c.text.push_back(col.text[i]);
            if (col.numeric) c.values.push_back(col.values[i]);
        }
        out.columns.push_back(std::move(c));
    }
    return out;
}

double min_max_scale(double v, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

std::int32_t equal_width_bin(double v, double lo, double hi, int bins) {
    if (!(hi > lo)) return 0;
    const double t = (v - lo) / (hi - lo) * bins;
    if (!(t > 0.0)) return 0;
    return static_cast<std::int32_t>(std::min<double>(std::floor(t), bins - 1));
}

Dataset prepare(const RawTable& raw, int bins, std::uint64_t split_seed, const PrepareOptions& options) {
    if (bins < 2) throw ConfigError("bins must be >= 2");
    if (raw.n_rows == 0) throw DataError("empty table");

    Dataset ds;
    ds.n = raw.n_rows;
    ds.d = raw.n_features();

    // labels: sorted distinct strings -> 0..C-1
    std::set<std::string> label_set(raw.labels.begin(), raw.labels.end());
    ds.class_names.assign(label_set.begin(), label_set.end());
    ds.n_classes = ds.class_names.size();
    if (ds.n_classes < 2) throw DataError("label column needs at least 2 distinct values");
    ds.y.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i)
        ds.y[i] = static_cast<std::int32_t>(
            std::lower_bound(ds.class_names.begin(), ds.class_names.end(), raw.labels[i]) - ds.class_names.begin());

    // stratified 8:1:1 split
    ds.split.assign(ds.n, Partition::train);
    Rng rng = make_stream({split_seed, 0x59117ULL});
    std::vector<std::vector<std::size_t>> by_class(ds.n_classes);
    for (std::size_t i = 0; i < ds.n; ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
    std::vector<std::size_t> pooled;
    auto assign = [&](std::vector<std::size_t>& rows, bool at_least_one) {
        std::shuffle(rows.begin(), rows.end(), rng);
        std::size_t n_val = tenth(rows.size());
        std::size_t n_test = tenth(rows.size());
        if (at_least_one) {
            n_val = std::max<std::size_t>(n_val, 1);
            n_test = std::max<std::size_t>(n_test, 1);
        }
        const std::size_t n_train = rows.size() - std::min(rows.size(), n_val + n_test);
        for (std::size_t r = 0; r < rows.size(); ++r)
            ds.split[rows[r]] = r < n_train ? Partition::train
                                : r < n_train + n_val ? Partition::validation
                                                      : Partition::test;
    };
    for (std::size_t c = 0; c < ds.n_classes; ++c) {
        if (by_class[c].size() >= 3) {
            assign(by_class[c], true);
        } else {
            ds.report.warnings.push_back("class '" + ds.class_names[c] + "' has " + std::to_string(by_class[c].size()) +
                                         " samples; split without stratification");
            pooled.insert(pooled.end(), by_class[c].begin(), by_class[c].end());
        }
    }
    if (!pooled.empty()) assign(pooled, false);
    for (std::size_t i = 0; i < ds.n; ++i) {
        switch (ds.split[i]) {
            case Partition::train: ds.train_rows.push_back(i); break;
            case Partition::validation: ds.val_rows.push_back(i); break;
            case Partition::test: ds.test_rows.push_back(i); break;
        }
    }

    std::vector<std::size_t> fit_rows;
    if (options.fit_on_training_only && !ds.train_rows.empty())
        fit_rows = ds.train_rows;
    else {
        fit_rows.resize(ds.n);
        std::iota(fit_rows.begin(), fit_rows.end(), 0);
    }

    ds.x_cont.assign(ds.n * ds.d, 0.0);
    ds.x_disc.assign(ds.n * ds.d, 0);
    ds.bins.assign(ds.d, bins);
    ds.report.missing_per_column.assign(ds.d, 0);
    for (std::size_t j = 0; j < ds.d; ++j) {
        const RawColumn& col = raw.columns[j];
        ds.feature_names.push_back(col.name);
        if (col.numeric) {
            std::vector<double> present;
            for (auto i : fit_rows)
                if (!std::isnan(col.values[i])) present.push_back(col.values[i]);
            const double fill = median_of(present);
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (auto i : fit_rows) {
                const double v = std::isnan(col.values[i]) ? fill : col.values[i];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            for (std::size_t i = 0; i < ds.n; ++i) {
                double v = col.values[i];
                if (std::isnan(v)) {
                    v = fill;
                    ++ds.report.missing_per_column[j];
                }
                ds.x_cont[i * ds.d + j] = min_max_scale(v, lo, hi);
                ds.x_disc[j * ds.n + i] = equal_width_bin(v, lo, hi, bins);
            }
        } else {
            std::map<std::string, std::size_t> freq;
            for (auto i : fit_rows)
                if (!is_missing(col.text[i])) ++freq[col.text[i]];
            std::string mode;
            std::size_t best = 0;
            for (const auto& [v, c] : freq)
                if (c > best) {
                    best = c;
                    mode = v;
                }
            std::set<std::string> categories;
            for (std::size_t i = 0; i < ds.n; ++i) categories.insert(is_missing(col.text[i]) ? mode : col.text[i]);
            std::vector<std::string> cats(categories.begin(), categories.end());
            ds.bins[j] = static_cast<std::int32_t>(std::max<std::size_t>(cats.size(), 1));
            const double denom = cats.size() > 1 ? static_cast<double>(cats.size() - 1) : 0.0;
            for (std::size_t i = 0; i < ds.n; ++i) {
                const bool missing = is_missing(col.text[i]);
                if (missing) ++ds.report.missing_per_column[j];
                const auto code = std::lower_bound(cats.begin(), cats.end(), missing ? mode : col.text[i]) - cats.begin();
                ds.x_disc[j * ds.n + i] = static_cast<std::int32_t>(code);
                ds.x_cont[i * ds.d + j] = denom > 0 ? static_cast<double>(code) / denom : 0.0;
            }
        }
    }
    return ds;
}

RawTable synthetic_table(const SyntheticSpec& spec) {
    if (spec.n_informative < 1) throw ConfigError("synthetic spec needs at least one informative feature");
    if (spec.n_classes < 2) throw ConfigError("synthetic spec needs at least two classes");
    if (spec.n_rows < spec.n_classes) throw ConfigError("synthetic spec needs at least one row per class");

    Rng rng = make_stream({spec.seed, 0x5e7ULL});
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);

    RawTable t;
    t.label_column = "class";
    t.n_rows = spec.n_rows;
    std::vector<std::size_t> cls(spec.n_rows);
    for (std::size_t i = 0; i < spec.n_rows; ++i) {
        cls[i] = i % spec.n_classes;
        t.labels.push_back("c" + std::to_string(cls[i]));
    }

    auto add_column = [&](std::string name, std::vector<double> v) {
        RawColumn c;
        c.name = std::move(name);
        c.values = std::move(v);
        for (double x : c.values) {
            std::ostringstream os;
            os.precision(17);
            os << x;
            c.text.push_back(os.str());
        }
        t.columns.push_back(std::move(c));
    };

    std::vector<std::vector<double>> informative;
    for (std::size_t f = 0; f < spec.n_informative; ++f) {
        // class-conditional means spaced 2 sigma apart, with a per-feature jitter
        std::vector<double> means(spec.n_classes);
        for (std::size_t c = 0; c < spec.n_classes; ++c) means[c] = 2.0 * static_cast<double>(c) + jitter(rng);
        std::shuffle(means.begin(), means.end(), rng);
        std::vector<double> v(spec.n_rows);
        for (std::size_t i = 0; i < spec.n_rows; ++i) v[i] = means[cls[i]] + unit(rng);
        informative.push_back(v);
        add_column("inf" + std::to_string(f), std::move(v));
    }
    for (std::size_t r = 0; r < spec.n_redundant; ++r) {
        const auto& src = informative[r % spec.n_informative];
        std::vector<double> v(spec.n_rows);
        for (std::size_t i = 0; i < spec.n_rows; ++i) v[i] = src[i] + 0.1 * unit(rng);
        add_column("red" + std::to_string(r), std::move(v));
    }
    for (std::size_t z = 0; z < spec.n_noise; ++z) {
        std::vector<double> v(spec.n_rows);
        for (auto& x : v) x = unit(rng);
        add_column("noise" + std::to_string(z), std::move(v));
    }
    return t;
}

Dataset generate_synthetic(const SyntheticSpec& spec, int bins) { return prepare(synthetic_table(spec), bins, spec.seed); }

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + manifest_path.string() + ": " + e.what());
    }
    DatasetManifest m;
    try {
        m.name = j.value("name", manifest_path.stem().string());
        m.path = j.at("path").get<std::string>();
        m.label_column = j.at("label_column").get<std::string>();
        m.header = j.value("header", true);
        m.bins = j.value("bins", 10);
        m.subsample = j.value("subsample", std::size_t{0});
        m.ignore_columns = j.value("ignore_columns", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + manifest_path.string() + ": " + e.what());
    }
    if (m.path.is_relative()) m.path = manifest_path.parent_path() / m.path;
    if (m.bins < 2) throw ConfigError("manifest bins must be >= 2");
    return m;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    Fnv1a h;
    std::string buf(1 << 16, '\0');
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return h.hex();
}

}  // namespace mpdgga
