#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpdgga/classifier_eval.hpp"
#include "mpdgga/common.hpp"
#include "mpdgga/info_theory.hpp"
#include "mpdgga/subset_criterion.hpp"

namespace mpdgga {

/// Component switches; all off gives a plain single-population GA with random operators.
struct EvolutionFlags {
    bool multi_pop = true;
    bool elite_interaction = true;
    bool diversity_crossover = true;
    bool diversity_mutation = true;

    bool operator==(const EvolutionFlags&) const = default;
};

/// ring: the last chromosome of a chain partners with the first. line: it has no partner.
enum class ChainMode { ring, line };

/// snapshot: every subpopulation sends elites chosen before any migration happened.
/// sequential: subpopulations send in order, so elites can travel further in one generation.
enum class MigrationMode { snapshot, sequential };

struct EvolutionConfig {
    std::size_t population = 30;
    std::size_t subpopulations = 3;
    std::size_t elites = 2;
    double mutation_prob = 0.1;
    std::size_t iterations = 30;
    double alpha = 0.01;
    int k = 5;
    std::uint64_t seed = 1;
    EvolutionFlags flags;
    ChainMode chain = ChainMode::ring;
    MigrationMode migration = MigrationMode::snapshot;
    bool final_train_includes_validation = false;
    int threads = 1;

    /// Subpopulation count actually used (1 when multi_pop is off).
    std::size_t chain_count() const { return flags.multi_pop ? subpopulations : 1; }
    std::size_t chain_length() const { return population / chain_count(); }

    /// Throws ConfigError on an invalid combination.
    void validate() const;
};

struct Chromosome {
    Mask genes;
    std::optional<FitnessRecord> fitness;

    double fitness_or_zero() const { return fitness ? fitness->fitness : 0.0; }
};

using Subpopulation = std::vector<Chromosome>;

struct ChainedPopulation {
    std::vector<Subpopulation> subpops;
    std::size_t generation = 0;
    Chromosome global_best;

    std::size_t size() const;
};

/// Set one uniformly random bit when the mask is empty.
void repair(Mask& genes, Rng& rng);

/// N uniform random chromosomes (empty ones repaired) dealt into chain_count() chains.
ChainedPopulation init_population(std::size_t d, const EvolutionConfig& config, Rng& rng);

struct CrossoverEvent {
    std::size_t generation = 0;
    std::size_t subpop = 0;
    std::size_t position = 0;
    std::size_t partner = 0;
    std::size_t k = 0;
    bool guided = false;
    Mask parent_a;
    Mask parent_b;
    Mask child_a;
    Mask child_b;
    FitnessRecord incumbent_fitness;
    FitnessRecord child_a_fitness;
    FitnessRecord child_b_fitness;
    int winner = 0;  // 0 incumbent, 1 first child, 2 second child
};

/// Cross position j with its chain successor and keep the fittest of
/// {incumbent, child_a, child_b} at j. Ties keep the incumbent, then child_a.
/// Returns false when j has no partner (line mode tail, or a chain of one).
bool chain_crossover_step(Subpopulation& chain, std::size_t j, const GainRatioMatrix& omega,
                          const EvolutionConfig& config, FitnessEvaluator& evaluator, Rng& rng,
                          CrossoverEvent* event = nullptr);

/// With probability mutation_prob flip one bit (guided or uniform) and drop the
/// cached fitness. The mutated chromosome always replaces the original.
/// Returns the flipped index when a mutation happened.
std::optional<std::size_t> mutation_step(Chromosome& chromosome, const GainRatioMatrix& omega,
                                         const EvolutionConfig& config, Rng& rng);

struct MigrationEvent {
    std::size_t generation = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    std::vector<Mask> elites;
};

/// Copy the s fittest chromosomes of chain i over the s least fit of chain (i+1) mod M.
/// Every chromosome must carry a fitness. Elite ties go to the lower chain position;
/// the received elites fill the vacated positions in ascending order, best first.
std::vector<MigrationEvent> migrate_elites(ChainedPopulation& population, std::size_t s,
                                           MigrationMode mode = MigrationMode::snapshot);

struct TraceRow {
    std::size_t generation = 0;
    std::size_t subpop = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t best_n_selected = 0;
};

/// Optional callbacks, always invoked from the calling thread in a fixed order.
struct EvolutionObserver {
    std::function<void(const ChainedPopulation&)> on_generation_end;
    std::function<void(const CrossoverEvent&)> on_crossover;
    std::function<void(const MigrationEvent&, const ChainedPopulation& before, const ChainedPopulation& after)>
        on_migration;
};

struct RunResult {
    Mask best_mask;
    FitnessRecord best_fitness;
    MetricBundle test;
    double feature_ratio = 0.0;
    std::vector<TraceRow> trace;
    std::vector<double> best_per_generation;  // global best fitness after each generation, index 0 = initial
    std::size_t classifier_calls = 0;
    std::size_t cache_hits = 0;
    bool omega_from_cache = false;
};

/// Full generational loop. When `omega` is null it is built from the training partition.
RunResult run(const Dataset& ds, const EvolutionConfig& config, const GainRatioMatrix* omega = nullptr,
              const EvolutionObserver* observer = nullptr);

}  // namespace mpdgga
