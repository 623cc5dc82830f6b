// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance                      every criterion
//   acceptance --criterion 6 --part sonar

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpdgga/harness.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mpdgga;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1. score() against the brute-force criterion on every subset of a 12-feature synthetic set.
Outcome criterion_oracle() {
    const auto t0 = Clock::now();
    const auto ds = generate_synthetic({});
    const auto omega = build_omega(ds);
    const auto ref = test_support::oracle_omega(ds);
    double worst = 0.0;
    const std::size_t d = ds.d;
    for (std::size_t bits = 0; bits < (std::size_t{1} << d); ++bits) {
        Mask m(d);
        for (std::size_t i = 0; i < d; ++i) m[i] = (bits >> i) & 1u;
        worst = std::max(worst, std::abs(score(m, omega).j_value - oracle::criterion(m, ref)));
    }
    const double t = seconds_since(t0);
    return {worst < 1e-9 && t < 10.0, fmt("4096 subsets, max |diff| %.3g, %.2f s", worst, t)};
}

// 2. guided operators against exhaustive enumeration.
Outcome operator_optimality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::size_t cut_ok = 0, flip_ok = 0;
    const std::size_t trials = 1000, d = 30;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto om = test_support::random_omega(d, rng);
        const auto a = test_support::random_mask(d, rng), b = test_support::random_mask(d, rng);
        const auto got = sweep_crossover(a, b, om.lib);
        const auto want = oracle::best_cut(a, b, om.ref, kCriterionTieTolerance);
        cut_ok += got.k_star == want.k && std::abs(got.best_j - want.j) < 1e-9;
        const auto gf = sweep_mutation(a, om.lib);
        const auto wf = oracle::best_flip(a, om.ref, kCriterionTieTolerance);
        flip_ok += gf.r_star == wf.r && std::abs(gf.best_j - wf.j) < 1e-9;
    }
    const double t = seconds_since(t0);
    return {cut_ok == trials && flip_ok == trials && t < 30.0,
            fmt("k* %.0f/1000, r* %.0f/1000, %.2f s", static_cast<double>(cut_ok), static_cast<double>(flip_ok), t)};
}

// 3. golden entropy / IG values and IG symmetry.
Outcome information_golden() {
    const std::vector<std::int32_t> ab{0, 1, 0, 1}, aabc{0, 0, 1, 2}, t{0, 0, 1, 1}, f{0, 0, 0, 1};
    const double h1 = entropy(ab), h2 = entropy(aabc), ig = information_gain(t, f);
    bool ok = std::abs(h1 - 1.0) < 1e-4 && std::abs(h2 - 1.5) < 1e-4 && std::abs(ig - 0.3113) < 1e-4;
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int p = 0; p < 500; ++p) {
        const std::size_t n = 2 + rng() % 300;
        const std::uint64_t ka = 2 + rng() % 9, kb = 2 + rng() % 9;
        std::vector<std::int32_t> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<std::int32_t>(rng() % ka);
            b[i] = static_cast<std::int32_t>(rng() % kb);
        }
        worst = std::max(worst, std::abs(information_gain(a, b) - information_gain(b, a)));
    }
    ok = ok && worst < 1e-9;
    return {ok, fmt("H=%.4f, %.4f, IG=%.4f, max asymmetry %.3g", h1, h2, ig, worst)};
}

// 4. fitness arithmetic and monotonicity.
Outcome fitness_arithmetic() {
    const double v = fitness_value(0.994, 8, 41, 0.01);
    bool mono = true;
    for (int i = 0; i < 100; ++i) {
        const double acc = i / 99.0;
        for (std::size_t ns = 1; ns < 100; ++ns) {
            const double f = fitness_value(acc, ns, 100, 0.01);
            if (i > 0 && !(f > fitness_value((i - 1) / 99.0, ns, 100, 0.01))) mono = false;
            if (!(fitness_value(acc, ns + 1, 100, 0.01) < f)) mono = false;
        }
    }
    return {std::abs(v - 0.99211) < 1e-5 && mono, fmt("fitness %.6f", v) + ", monotone on 100-point grid: " +
                                                      (mono ? "yes" : "no")};
}

// 5. structural invariants over seeded runs, and thread independence.
Outcome evolution_invariants() {
    SyntheticSpec spec;
    spec.n_rows = 240;
    spec.n_noise = 14;
    spec.n_classes = 3;
    std::size_t violations = 0, migrations = 0, mismatched = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        spec.seed = seed;
        const auto ds = generate_synthetic(spec);
        const auto omega = build_omega(ds);
        EvolutionConfig c;  // N=30, M=3, s=2, T=30
        c.seed = seed;
        double last_best = -1.0;
        EvolutionObserver obs;
        obs.on_generation_end = [&](const ChainedPopulation& p) {
            if (p.size() != 30) ++violations;
            for (const auto& chain : p.subpops)
                if (chain.size() != 10) ++violations;
            const double b = p.global_best.fitness_or_zero();
            if (b < last_best) ++violations;
            last_best = b;
        };
        obs.on_migration = [&](const MigrationEvent& e, const ChainedPopulation&, const ChainedPopulation& after) {
            ++migrations;
            const auto& dst = after.subpops[e.to];
            for (const auto& g : e.elites)
                if (std::none_of(dst.begin(), dst.end(), [&](const Chromosome& x) { return x.genes == g; }))
                    ++violations;
        };
        const auto one = run(ds, c, &omega, &obs);
        c.threads = 4;
        const auto many = run(ds, c, &omega);
        bool same = one.best_mask == many.best_mask && one.best_fitness == many.best_fitness &&
                    one.best_per_generation == many.best_per_generation && one.test.accuracy == many.test.accuracy &&
                    one.trace.size() == many.trace.size();
        for (std::size_t i = 0; same && i < one.trace.size(); ++i)
            same = one.trace[i].best_fitness == many.trace[i].best_fitness &&
                   one.trace[i].mean_fitness == many.trace[i].mean_fitness &&
                   one.trace[i].best_n_selected == many.trace[i].best_n_selected;
        mismatched += !same;
    }
    return {violations == 0 && mismatched == 0 && migrations == 20 * 30 * 3,
            fmt("20 runs, %.0f invariant violations, %.0f migrations checked, %.0f thread mismatches",
                static_cast<double>(violations), static_cast<double>(migrations), static_cast<double>(mismatched))};
}

fs::path data_root() {
    if (const char* env = std::getenv("MPDGGA_DATA_DIR")) return env;
    return test_support::data_dir();
}

std::optional<RunConfig> dataset_config(const std::string& manifest, std::string& why) {
    const fs::path m = data_root() / "manifests" / manifest;
    try {
        RunConfig c = load_run_config(m);
        if (!fs::exists(c.manifest.path)) {
            why = "dataset file not found: " + c.manifest.path.string();
            return std::nullopt;
        }
        c.omega_cache.reset();
        return c;
    } catch (const std::exception& e) {
        why = e.what();
        return std::nullopt;
    }
}

// 6. desk-scale reproduction on one dataset of the comparison table.
Outcome reproduction(const std::string& manifest, double reference_acc) {
    std::string why;
    auto c = dataset_config(manifest, why);
    if (!c) return {false, why};
    const auto t0 = Clock::now();
    std::ostringstream log;
    const auto data = load_data(*c);
    const auto out = test_support::scratch_dir("acceptance_" + manifest);
    const auto r = run_battery(*c, c->evolution, data, out, log);
    const double acc = r.aggregate.accuracy.median, ratio = r.aggregate.feature_ratio.median;
    const double t = seconds_since(t0);
    return {std::abs(acc - reference_acc) <= 0.08 && ratio <= 0.5,
            c->manifest.name + fmt(": median acc %.3f (reference %.3f), median feature ratio %.3f, %.1f s", acc,
                                   reference_acc, ratio, t)};
}

Outcome nslkdd_direction() {
    std::string why;
    auto c = dataset_config("nslkdd.json", why);
    if (!c) return {false, why};
    c->subsample = 10000;
    const auto t0 = Clock::now();
    std::ostringstream log;
    const auto data = load_data(*c);
    EvolutionConfig on = c->evolution, off = c->evolution;
    off.flags = {false, false, false, false};
    const auto r_on = run_battery(*c, on, data, test_support::scratch_dir("acceptance_nsl_on"), log);
    const auto r_off = run_battery(*c, off, data, test_support::scratch_dir("acceptance_nsl_off"), log);
    std::size_t wins = 0;
    for (std::size_t i = 0; i < r_on.rows.size(); ++i) wins += r_on.rows[i].val_fitness >= r_off.rows[i].val_fitness;
    return {wins >= 4, fmt("NSL-KDD 10k: all-on >= all-off validation fitness in %.0f/5 seeds, %.1f s",
                           static_cast<double>(wins), seconds_since(t0))};
}

const double kBudgetSeconds = 15 * 60;

Outcome desk_reproduction(const std::string& part) {
    struct Part {
        std::string name;
        std::function<Outcome()> check;
    };
    const std::vector<Part> parts{{"sonar", [] { return reproduction("sonar.json", 0.810); }},
                                  {"spectf", [] { return reproduction("spectf.json", 0.852); }},
                                  {"soybean", [] { return reproduction("soybean.json", 0.926); }},
                                  {"nslkdd", nslkdd_direction}};
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (const auto& p : parts) {
        if (!part.empty() && p.name != part) continue;
        const auto o = p.check();
        std::cout << "  [" << p.name << "] " << (o.pass ? "ok" : "not met") << ": " << o.detail << '\n';
        pass = pass && o.pass;
        detail += (detail.empty() ? "" : "; ") + p.name + (o.pass ? " ok" : " not met");
    }
    const double t = seconds_since(t0);
    if (detail.empty()) return {false, "unknown part '" + part + "'"};
    return {pass && t < kBudgetSeconds, detail + fmt("; %.1f s", t)};
}

// 7. ablation table structure and all-on identity with cmd_run.
Outcome ablation_fidelity() {
    const auto dir = test_support::scratch_dir("acceptance_ablation");
    RunConfig c = load_run_config(test_support::data_dir() / "manifests" / "sonar.json");
    c.omega_cache.reset();
    c.out = dir / "ablation";
    std::ostringstream log;
    cmd_ablation(c, log);
    const auto t = read_csv_table(dir / "ablation" / "ablation.csv");
    const std::string on = "\xE2\x9C\x93", off = "\xC3\x97";
    const std::vector<std::string> want{"0000", "1000", "1100", "1110", "1101", "1111"};
    bool structure = t.rows.size() == 6 && t.header.size() == 10;
    for (std::size_t i = 0; structure && i < 6; ++i)
        for (std::size_t f = 0; f < 4; ++f) structure = structure && t.rows[i][1 + f] == (want[i][f] == '1' ? on : off);

    c.out = dir / "run";
    cmd_run(c, log);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool identical = true;
    for (const char* f : {"per_seed.csv", "aggregate.csv", "trace.csv"})
        identical = identical && slurp(dir / "ablation" / "row6_1111" / f) == slurp(dir / "run" / f);
    return {structure && identical, std::string("six flag rows: ") + (structure ? "yes" : "no") +
                                        ", all-on row byte-identical to run: " + (identical ? "yes" : "no")};
}

// 8. build_omega scales quadratically in d. Sizes are timed alternately, best of several rounds.
Outcome omega_scaling() {
    auto dataset = [](std::size_t d) {
        SyntheticSpec spec;
        spec.n_rows = 2000;
        spec.n_informative = d / 10;
        spec.n_redundant = d / 10;
        spec.n_noise = d - 2 * (d / 10);
        return prepare(synthetic_table(spec), 10, 1, PrepareOptions{false});
    };
    const Dataset small = dataset(100), large = dataset(200);
    std::vector<std::size_t> rows(2000);
    std::iota(rows.begin(), rows.end(), 0);
    auto time_once = [&](const Dataset& ds) {
        const auto t0 = Clock::now();
        const auto om = build_omega(ds, rows, Execution::serial);
        return om.d == ds.d ? seconds_since(t0) : 1e300;
    };
    time_once(small);
    time_once(large);
    double t100 = 1e300, t200 = 1e300;
    for (int round = 0; round < 7; ++round) {
        t100 = std::min(t100, time_once(small));
        t200 = std::min(t200, time_once(large));
    }
    const double ratio = t200 / t100;
    return {ratio >= 3.0 && ratio <= 6.0, fmt("d=100: %.4f s, d=200: %.4f s, ratio %.2f", t100, t200, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    std::string part;
    app.add_option("--criterion", only, "run a single criterion (1-8)");
    app.add_option("--part", part, "criterion 6 only: sonar, spectf, soybean or nslkdd");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"criterion oracle equivalence", criterion_oracle},
        {"guided-operator optimality", operator_optimality},
        {"information-theory golden values", information_golden},
        {"fitness arithmetic", fitness_arithmetic},
        {"structural invariants under evolution", evolution_invariants},
        {"desk-scale reproduction", [&] { return desk_reproduction(part); }},
        {"ablation harness fidelity", ablation_fidelity},
        {"complexity sanity", omega_scaling},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1;
        if (i == 5 && !part.empty()) std::cout << " [" << part << "]";
        std::cout << " (" << criteria[i].first << "): " << o.detail << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
