#include "mpdgga/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpdgga {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kMetricHeader = "Accuracy,Precision,Recall,F1-Score,FeatureRatio";

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

std::string flags_tag(const EvolutionFlags& f) {
    std::string s;
    s += f.multi_pop ? '1' : '0';
    s += f.elite_interaction ? '1' : '0';
    s += f.diversity_crossover ? '1' : '0';
    s += f.diversity_mutation ? '1' : '0';
    return s;
}

const char* mark(bool on) { return on ? "\xE2\x9C\x93" : "\xC3\x97"; }  // check mark / multiplication sign

double rounded(double v) { return std::stod(format_value(v)); }

Aggregate aggregate_of(std::vector<double> v) {
    Aggregate a;
    if (v.empty()) return a;
    for (auto& x : v) x = rounded(x);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    a.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    double s = 0.0;
    for (double x : v) s += x;
    a.mean = s / static_cast<double>(n);
    a.min = v.front();
    a.max = v.back();
    return a;
}

std::string metric_cells(const AggregateRow& a, double Aggregate::*stat) {
    return format_value(a.accuracy.*stat) + "," + format_value(a.precision.*stat) + "," + format_value(a.recall.*stat) +
           "," + format_value(a.f1.*stat) + "," + format_value(a.feature_ratio.*stat);
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

json evolution_to_json(const EvolutionConfig& e) {
    return json{{"population", e.population},
                {"subpopulations", e.subpopulations},
                {"elites", e.elites},
                {"mutation_prob", e.mutation_prob},
                {"iterations", e.iterations},
                {"alpha", e.alpha},
                {"k", e.k},
                {"multi_pop", e.flags.multi_pop},
                {"elite_interaction", e.flags.elite_interaction},
                {"diversity_crossover", e.flags.diversity_crossover},
                {"diversity_mutation", e.flags.diversity_mutation},
                {"chain", e.chain == ChainMode::ring ? "ring" : "line"},
                {"migration", e.migration == MigrationMode::snapshot ? "snapshot" : "sequential"},
                {"final_train_includes_validation", e.final_train_includes_validation},
                {"threads", e.threads}};
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    try {
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            const auto dash = part.find('-');
            if (dash == std::string::npos) {
                seeds.push_back(std::stoull(part));
            } else {
                const auto lo = std::stoull(part.substr(0, dash));
                const auto hi = std::stoull(part.substr(dash + 1));
                if (hi < lo) throw ConfigError("seed range '" + part + "' is reversed");
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            }
        }
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse seed list '" + text + "'");
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    return seeds;
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"dataset", "bins", "seeds", "split_seed", "subsample", "out", "omega_cache", "threads", "evolution"},
                   "config");

    RunConfig c;
    if (!j.contains("dataset")) throw ConfigError("config needs a 'dataset' manifest path");
    c.manifest_path = get_or<std::string>(j, "dataset", "");
    if (c.manifest_path.is_relative()) c.manifest_path = base_dir / c.manifest_path;
    c.manifest = load_manifest(c.manifest_path);
    c.bins = get_or<int>(j, "bins", c.manifest.bins);
    c.subsample = get_or<std::size_t>(j, "subsample", c.manifest.subsample);
    c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", c.seeds);
    if (j.contains("split_seed") && !j["split_seed"].is_null()) c.split_seed = get_or<std::uint64_t>(j, "split_seed", 0);
    c.out = get_or<std::string>(j, "out", "results");
    if (c.out.is_relative()) c.out = base_dir / c.out;
    if (j.contains("omega_cache") && !j["omega_cache"].is_null()) {
        fs::path p = get_or<std::string>(j, "omega_cache", "");
        c.omega_cache = p.is_relative() ? base_dir / p : p;
    }
    c.evolution.threads = get_or<int>(j, "threads", 1);

    if (j.contains("evolution")) {
        const json& e = j["evolution"];
        if (!e.is_object()) throw ConfigError("'evolution' must be an object");
        reject_unknown(e,
                       {"population", "subpopulations", "elites", "mutation_prob", "iterations", "alpha", "k",
                        "multi_pop", "elite_interaction", "diversity_crossover", "diversity_mutation", "chain",
                        "migration", "final_train_includes_validation"},
                       "evolution");
        auto& ev = c.evolution;
        ev.population = get_or<std::size_t>(e, "population", ev.population);
        ev.subpopulations = get_or<std::size_t>(e, "subpopulations", ev.subpopulations);
        ev.elites = get_or<std::size_t>(e, "elites", ev.elites);
        ev.mutation_prob = get_or<double>(e, "mutation_prob", ev.mutation_prob);
        ev.iterations = get_or<std::size_t>(e, "iterations", ev.iterations);
        ev.alpha = get_or<double>(e, "alpha", ev.alpha);
        ev.k = get_or<int>(e, "k", ev.k);
        ev.flags.multi_pop = get_or<bool>(e, "multi_pop", ev.flags.multi_pop);
        ev.flags.elite_interaction = get_or<bool>(e, "elite_interaction", ev.flags.elite_interaction);
        ev.flags.diversity_crossover = get_or<bool>(e, "diversity_crossover", ev.flags.diversity_crossover);
        ev.flags.diversity_mutation = get_or<bool>(e, "diversity_mutation", ev.flags.diversity_mutation);
        ev.final_train_includes_validation =
            get_or<bool>(e, "final_train_includes_validation", ev.final_train_includes_validation);
        const auto chain = get_or<std::string>(e, "chain", "ring");
        if (chain == "ring")
            ev.chain = ChainMode::ring;
        else if (chain == "line")
            ev.chain = ChainMode::line;
        else
            throw ConfigError("chain must be 'ring' or 'line'");
        const auto migration = get_or<std::string>(e, "migration", "snapshot");
        if (migration == "snapshot")
            ev.migration = MigrationMode::snapshot;
        else if (migration == "sequential")
            ev.migration = MigrationMode::sequential;
        else
            throw ConfigError("migration must be 'snapshot' or 'sequential'");
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    // a bare dataset manifest is accepted too, with default experiment settings
    try {
        const json j = json::parse(text);
        if (j.is_object() && !j.contains("dataset") && j.contains("path") && j.contains("label_column")) {
            json wrapped = {{"dataset", fs::absolute(path).string()}};
            return parse_run_config(wrapped.dump(), path.parent_path());
        }
    } catch (const json::exception&) {
        // reported by parse_run_config below
    }
    return parse_run_config(text, path.parent_path());
}

void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
    if (o.seeds) c.seeds = *o.seeds;
    if (o.out) c.out = *o.out;
    if (o.subsample) c.subsample = *o.subsample;
    if (o.threads) c.evolution.threads = *o.threads;
    if (o.bins) c.bins = *o.bins;
    if (o.mutation_prob) c.evolution.mutation_prob = *o.mutation_prob;
    if (o.alpha) c.evolution.alpha = *o.alpha;
    if (o.k) c.evolution.k = *o.k;
}

void validate(const RunConfig& c) {
    if (!fs::exists(c.manifest_path)) throw ConfigError("manifest not found: " + c.manifest_path.string());
    if (!fs::exists(c.manifest.path)) throw ConfigError("dataset file not found: " + c.manifest.path.string());
    if (c.seeds.empty()) throw ConfigError("seed list is empty");
    if (c.bins < 2) throw ConfigError("bins must be >= 2");
    c.evolution.validate();
}

LoadedData load_data(const RunConfig& c) {
    LoadedData data;
    data.raw = load_csv(c.manifest.path, c.manifest.label_column, c.manifest.header);
    for (const auto& name : c.manifest.ignore_columns) {
        auto& cols = data.raw.columns;
        const auto it = std::find_if(cols.begin(), cols.end(), [&](const RawColumn& col) { return col.name == name; });
        if (it == cols.end()) throw ConfigError("ignore_columns names an unknown column '" + name + "'");
        cols.erase(it);
    }
    if (data.raw.n_features() == 0) throw DataError("no feature columns left");
    data.digest = file_digest(c.manifest.path);
    return data;
}

fs::path omega_cache_file(const fs::path& dir, const std::string& key) {
    Fnv1a h;
    h.update(key);
    return dir / ("omega_" + h.hex() + ".bin");
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

AggregateRow aggregate_rows(const std::vector<SeedRow>& rows) {
    auto column = [&](double SeedRow::*field) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.*field);
        return aggregate_of(std::move(v));
    };
    return {column(&SeedRow::accuracy), column(&SeedRow::precision), column(&SeedRow::recall), column(&SeedRow::f1),
            column(&SeedRow::feature_ratio)};
}

void write_per_seed_csv(const fs::path& path, const std::vector<SeedRow>& rows) {
    auto out = open_out(path);
    out << "seed," << kMetricHeader << ",n_selected,val_fitness,mask\n";
    for (const auto& r : rows)
        out << r.seed << ',' << format_value(r.accuracy) << ',' << format_value(r.precision) << ','
            << format_value(r.recall) << ',' << format_value(r.f1) << ',' << format_value(r.feature_ratio) << ','
            << r.n_selected << ',' << format_value(r.val_fitness) << ',' << r.mask << '\n';
}

CsvTable read_csv_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw DataError("ragged row in " + path.string());
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

std::vector<SeedRow> read_per_seed_csv(const fs::path& path) {
    const CsvTable t = read_csv_table(path);
    if (t.header.size() != 9 || t.header[0] != "seed") throw DataError("not a per-seed table: " + path.string());
    std::vector<SeedRow> rows;
    for (const auto& c : t.rows) {
        SeedRow r;
        r.seed = std::stoull(c[0]);
        r.accuracy = std::stod(c[1]);
        r.precision = std::stod(c[2]);
        r.recall = std::stod(c[3]);
        r.f1 = std::stod(c[4]);
        r.feature_ratio = std::stod(c[5]);
        r.n_selected = std::stoull(c[6]);
        r.val_fitness = std::stod(c[7]);
        r.mask = c[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_aggregate_csv(const fs::path& path, const std::string& dataset, const AggregateRow& agg) {
    auto out = open_out(path);
    out << "Dataset,Statistic," << kMetricHeader << '\n';
    out << dataset << ",median," << metric_cells(agg, &Aggregate::median) << '\n';
    out << dataset << ",mean," << metric_cells(agg, &Aggregate::mean) << '\n';
    out << dataset << ",min," << metric_cells(agg, &Aggregate::min) << '\n';
    out << dataset << ",max," << metric_cells(agg, &Aggregate::max) << '\n';
}

BatteryResult run_battery(const RunConfig& config, const EvolutionConfig& evolution, const LoadedData& data,
                          const fs::path& out_dir, std::ostream& log) {
    evolution.validate();
    BatteryResult battery;
    battery.dataset = config.manifest.name;
    json runs = json::array();

    for (const auto seed : config.seeds) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t split = config.split_seed_for(seed);
        const RawTable table = stratified_subsample(data.raw, config.subsample, split);
        const Dataset ds = prepare(table, config.bins, split);
        for (const auto& w : ds.report.warnings) log << "warning: " << w << '\n';

        SeedRunInfo info;
        info.seed = seed;
        info.omega_cache = "off";
        GainRatioMatrix omega;
        if (config.omega_cache) {
            const std::string key = omega_cache_key(data.digest, config.bins, split, config.subsample);
            const fs::path file = omega_cache_file(*config.omega_cache, key);
            if (auto cached = read_omega_cache(file, key); cached && cached->d == ds.d) {
                omega = std::move(*cached);
                info.omega_cache = "hit";
            } else {
                omega = build_omega(ds, Execution::parallel, evolution.threads);
                write_omega_cache(file, key, omega);
                info.omega_cache = "miss";
            }
            log << "seed " << seed << ": omega cache " << info.omega_cache << " (" << file.string() << ")\n";
        } else {
            omega = build_omega(ds, Execution::parallel, evolution.threads);
        }

        EvolutionConfig ev = evolution;
        ev.seed = seed;
        const RunResult r = run(ds, ev, &omega);

        SeedRow row;
        row.seed = seed;
        row.accuracy = r.test.accuracy;
        row.precision = r.test.precision;
        row.recall = r.test.recall;
        row.f1 = r.test.f1;
        row.feature_ratio = r.feature_ratio;
        row.n_selected = count_selected(r.best_mask);
        row.val_fitness = r.best_fitness.fitness;
        row.mask = mask_to_string(r.best_mask);
        battery.rows.push_back(row);
        battery.traces.push_back(r.trace);

        info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        info.classifier_calls = r.classifier_calls;
        info.cache_hits = r.cache_hits;
        battery.info.push_back(info);
        runs.push_back({{"seed", seed},
                        {"split_seed", split},
                        {"wall_seconds", info.wall_seconds},
                        {"classifier_calls", info.classifier_calls},
                        {"fitness_cache_hits", info.cache_hits},
                        {"omega_cache", info.omega_cache}});
        log << battery.dataset << " [" << flags_tag(evolution.flags) << "] seed " << seed
            << ": acc=" << format_value(row.accuracy) << " ratio=" << format_value(row.feature_ratio)
            << " fitness=" << format_value(row.val_fitness) << '\n';
    }
    battery.aggregate = aggregate_rows(battery.rows);

    write_per_seed_csv(out_dir / "per_seed.csv", battery.rows);
    write_aggregate_csv(out_dir / "aggregate.csv", battery.dataset, battery.aggregate);
    {
        auto out = open_out(out_dir / "trace.csv");
        out << "seed,generation,subpop,best_fitness,mean_fitness,best_n_selected\n";
        for (std::size_t s = 0; s < battery.traces.size(); ++s)
            for (const auto& t : battery.traces[s])
                out << battery.rows[s].seed << ',' << t.generation << ',' << t.subpop << ','
                    << format_value(t.best_fitness) << ',' << format_value(t.mean_fitness) << ','
                    << t.best_n_selected << '\n';
    }
    {
        json manifest = {{"version", kVersion},
                         {"dataset", {{"name", config.manifest.name},
                                      {"path", config.manifest.path.string()},
                                      {"label_column", config.manifest.label_column},
                                      {"digest", data.digest},
                                      {"rows", data.raw.n_rows},
                                      {"features", data.raw.n_features()}}},
                         {"bins", config.bins},
                         {"subsample", config.subsample},
                         {"split_seed", config.split_seed ? json(*config.split_seed) : json("per-seed")},
                         {"seeds", config.seeds},
                         {"evolution", evolution_to_json(evolution)},
                         {"aggregation", "per-seed rows in per_seed.csv; median/mean/min/max over seeds in aggregate.csv"},
                         {"runs", runs}};
        auto out = open_out(out_dir / "run_manifest.json");
        out << manifest.dump(2) << '\n';
    }
    return battery;
}

BatteryResult cmd_run(const RunConfig& config, std::ostream& log) {
    validate(config);
    const LoadedData data = load_data(config);
    return run_battery(config, config.evolution, data, config.out, log);
}

std::vector<EvolutionFlags> ablation_rows() {
    return {
        {false, false, false, false},
        {true, false, false, false},
        {true, true, false, false},
        {true, true, true, false},
        {true, true, false, true},
        {true, true, true, true},
    };
}

std::vector<BatteryResult> cmd_ablation(const RunConfig& config, std::ostream& log) {
    validate(config);
    const LoadedData data = load_data(config);
    std::vector<BatteryResult> results;
    const auto rows = ablation_rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EvolutionConfig ev = config.evolution;
        ev.flags = rows[i];
        const fs::path dir = config.out / ("row" + std::to_string(i + 1) + "_" + flags_tag(rows[i]));
        results.push_back(run_battery(config, ev, data, dir, log));
    }
    auto out = open_out(config.out / "ablation.csv");
    out << "Dataset,M_pop,E_iter,D_cro,D_mut," << kMetricHeader << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i];
        out << config.manifest.name << ',' << mark(f.multi_pop) << ',' << mark(f.elite_interaction) << ','
            << mark(f.diversity_crossover) << ',' << mark(f.diversity_mutation) << ','
            << metric_cells(results[i].aggregate, &Aggregate::median) << '\n';
    }
    return results;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "M" || name == "m") return SweepParameter::subpopulations;
    if (name == "S" || name == "s") return SweepParameter::elites;
    throw ConfigError("sensitivity parameter must be 'M' or 'S'");
}

std::vector<BatteryResult> cmd_sensitivity(const RunConfig& config, SweepParameter parameter,
                                           const std::vector<std::size_t>& values, std::ostream& log) {
    validate(config);
    if (values.empty()) throw ConfigError("sensitivity sweep needs at least one value");
    std::vector<EvolutionConfig> configs;
    for (auto v : values) {
        EvolutionConfig ev = config.evolution;
        (parameter == SweepParameter::subpopulations ? ev.subpopulations : ev.elites) = v;
        ev.validate();
        configs.push_back(ev);
    }
    const LoadedData data = load_data(config);
    const char* name = parameter == SweepParameter::subpopulations ? "M" : "S";
    std::vector<BatteryResult> results;
    for (std::size_t i = 0; i < values.size(); ++i)
        results.push_back(
            run_battery(config, configs[i], data, config.out / (std::string(name) + "_" + std::to_string(values[i])), log));

    auto out = open_out(config.out / (std::string("sensitivity_") + name + ".csv"));
    out << "Dataset,Parameter,Value," << kMetricHeader << '\n';
    for (std::size_t i = 0; i < values.size(); ++i)
        out << config.manifest.name << ',' << name << ',' << values[i] << ','
            << metric_cells(results[i].aggregate, &Aggregate::median) << '\n';
    return results;
}

std::vector<fs::path> cmd_omega_dump(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    if (!fs::exists(config.manifest.path)) throw ConfigError("dataset file not found: " + config.manifest.path.string());
    if (config.seeds.empty()) throw ConfigError("seed list is empty");
    const LoadedData data = load_data(config);
    std::set<std::uint64_t> splits;
    for (auto s : config.seeds) splits.insert(config.split_seed_for(s));
    std::vector<fs::path> files;
    for (auto split : splits) {
        const RawTable table = stratified_subsample(data.raw, config.subsample, split);
        const Dataset ds = prepare(table, config.bins, split);
        const GainRatioMatrix omega = build_omega(ds, Execution::parallel, config.evolution.threads);
        const std::string key = omega_cache_key(data.digest, config.bins, split, config.subsample);
        const fs::path file = omega_cache_file(out_dir, key);
        write_omega_cache(file, key, omega);
        log << "wrote " << file.string() << " (d=" << omega.d << ", split seed " << split << ")\n";
        files.push_back(file);
    }
    return files;
}

}  // namespace mpdgga
