#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpdgga/harness.hpp"

namespace {

struct SharedFlags {
    std::string config;
    std::string seeds;
    std::string out;
    std::size_t subsample = 0;
    int threads = 0;
    int bins = 0;
    double pm = 0.0;
    double alpha = 0.0;
    int k = 0;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config, "run config (JSON) or dataset manifest")->required();
    cmd->add_option("--seeds", f.seeds, "seed list, e.g. 1,2,3 or 1-5");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--subsample", f.subsample, "stratified row cap (0 keeps every row)");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_option("--bins", f.bins, "equal-width bins for discretization");
    cmd->add_option("--pm", f.pm, "mutation probability");
    cmd->add_option("--alpha", f.alpha, "fitness weight of feature compression");
    cmd->add_option("--k", f.k, "neighbours for KNN");
}

mpdgga::RunConfig resolve(const CLI::App* cmd, const SharedFlags& f) {
    mpdgga::RunConfig config = mpdgga::load_run_config(f.config);
    mpdgga::ConfigOverrides o;
    if (cmd->count("--seeds")) o.seeds = mpdgga::parse_seed_list(f.seeds);
    if (cmd->count("--out")) o.out = f.out;
    if (cmd->count("--subsample")) o.subsample = f.subsample;
    if (cmd->count("--threads")) o.threads = f.threads;
    if (cmd->count("--bins")) o.bins = f.bins;
    if (cmd->count("--pm")) o.mutation_prob = f.pm;
    if (cmd->count("--alpha")) o.alpha = f.alpha;
    if (cmd->count("--k")) o.k = f.k;
    mpdgga::apply_overrides(config, o);
    return config;
}

void print_summary(const mpdgga::BatteryResult& r) {
    std::cout << r.dataset << " median: acc=" << mpdgga::format_value(r.aggregate.accuracy.median)
              << " f1=" << mpdgga::format_value(r.aggregate.f1.median)
              << " ratio=" << mpdgga::format_value(r.aggregate.feature_ratio.median) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chained multi-population genetic search for wrapper feature selection"};
    app.require_subcommand(1);

    SharedFlags run_f, abl_f, sens_f, dump_f;
    auto* run_cmd = app.add_subcommand("run", "run the seed battery for one configuration");
    add_shared(run_cmd, run_f);
    auto* abl_cmd = app.add_subcommand("ablation", "run the six component combinations");
    add_shared(abl_cmd, abl_f);
    auto* sens_cmd = app.add_subcommand("sensitivity", "sweep M or S");
    add_shared(sens_cmd, sens_f);
    std::string param;
    std::vector<std::size_t> values;
    sens_cmd->add_option("--param", param, "M or S")->required();
    sens_cmd->add_option("--values", values, "values to sweep")->required()->delimiter(',');
    auto* dump_cmd = app.add_subcommand("omega-dump", "precompute the gain-ratio matrix cache");
    add_shared(dump_cmd, dump_f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*run_cmd) {
            print_summary(mpdgga::cmd_run(resolve(run_cmd, run_f), std::cerr));
        } else if (*abl_cmd) {
            for (const auto& r : mpdgga::cmd_ablation(resolve(abl_cmd, abl_f), std::cerr)) print_summary(r);
        } else if (*sens_cmd) {
            const auto config = resolve(sens_cmd, sens_f);
            for (const auto& r : mpdgga::cmd_sensitivity(config, mpdgga::parse_sweep_parameter(param), values, std::cerr))
                print_summary(r);
        } else if (*dump_cmd) {
            const auto config = resolve(dump_cmd, dump_f);
            const auto dir = dump_cmd->count("--out") ? config.out : config.omega_cache.value_or(config.out);
            for (const auto& p : mpdgga::cmd_omega_dump(config, dir, std::cerr)) std::cout << p.string() << '\n';
        }
    } catch (const mpdgga::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const mpdgga::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
