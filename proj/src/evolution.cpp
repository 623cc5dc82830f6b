#include "mpdgga/evolution.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <numeric>
#include <stdexcept>

namespace mpdgga {

namespace {

// stream tags
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kGenerationStream = 0xC405;

Mask splice(const Mask& head, const Mask& tail, std::size_t k) {
    Mask out(tail);
    std::copy(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(k), out.begin());
    return out;
}

const FitnessRecord& ensure_fitness(Chromosome& c, FitnessEvaluator& evaluator) {
    if (!c.fitness) c.fitness = evaluator.evaluate(c.genes);
    return *c.fitness;
}

// Positions sorted best-first; equal fitness keeps the lower position first.
std::vector<std::size_t> rank_by_fitness(const Subpopulation& chain) {
    std::vector<std::size_t> order(chain.size());
    std::iota(order.begin(), order.end(), 0);
    for (const auto& c : chain)
        if (!c.fitness) throw std::logic_error("migrate_elites: chromosome without fitness");
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return chain[a].fitness->fitness > chain[b].fitness->fitness;
    });
    return order;
}

// Archive of the fittest chromosome seen by one worker; strict improvement only.
struct LocalBest {
    bool set = false;
    Chromosome best;

    void offer(const Mask& genes, const FitnessRecord& rec) {
        if (!set || rec.fitness > best.fitness->fitness) {
            best.genes = genes;
            best.fitness = rec;
            set = true;
        }
    }
};

}  // namespace

void EvolutionConfig::validate() const {
    if (population < 1) throw ConfigError("population size must be >= 1");
    if (subpopulations < 1 || subpopulations > population)
        throw ConfigError("subpopulation count must lie in [1, population]");
    if (population % subpopulations != 0)
        throw ConfigError("subpopulation count " + std::to_string(subpopulations) + " does not divide population " +
                          std::to_string(population));
    if (elites > population / subpopulations)
        throw ConfigError("elite count " + std::to_string(elites) + " exceeds subpopulation size " +
                          std::to_string(population / subpopulations));
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw ConfigError("mutation probability must lie in [0,1]");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
}

std::size_t ChainedPopulation::size() const {
    std::size_t n = 0;
    for (const auto& s : subpops) n += s.size();
    return n;
}

void repair(Mask& genes, Rng& rng) {
    if (genes.empty() || count_selected(genes) > 0) return;
    std::uniform_int_distribution<std::size_t> pick(0, genes.size() - 1);
    genes[pick(rng)] = 1;
}

ChainedPopulation init_population(std::size_t d, const EvolutionConfig& config, Rng& rng) {
    config.validate();
    if (d == 0) throw DataError("cannot evolve masks over zero features");
    const std::size_t m = config.chain_count();
    const std::size_t len = config.chain_length();
    ChainedPopulation pop;
    pop.subpops.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        pop.subpops[i].resize(len);
        for (auto& c : pop.subpops[i]) {
            c.genes.resize(d);
            for (auto& g : c.genes) g = static_cast<std::uint8_t>(rng() >> 63);
            repair(c.genes, rng);
        }
    }
    return pop;
}

bool chain_crossover_step(Subpopulation& chain, std::size_t j, const GainRatioMatrix& omega,
                          const EvolutionConfig& config, FitnessEvaluator& evaluator, Rng& rng, CrossoverEvent* event) {
    const std::size_t n = chain.size();
    if (n < 2 || j >= n) return false;
    std::size_t partner = j + 1;
    if (partner == n) {
        if (config.chain == ChainMode::line) return false;
        partner = 0;
    }
    const Mask& a = chain[j].genes;
    const Mask& b = chain[partner].genes;
    const std::size_t d = a.size();
    if (d < 2) return false;

    std::size_t k;
    if (config.flags.diversity_crossover) {
        k = sweep_crossover(a, b, omega).k_star;
    } else {
        std::uniform_int_distribution<std::size_t> cut(1, d - 1);
        k = cut(rng);
    }
    Mask child_a = splice(a, b, k);
    Mask child_b = splice(b, a, k);
    repair(child_a, rng);
    repair(child_b, rng);

    const FitnessRecord incumbent = ensure_fitness(chain[j], evaluator);
    const FitnessRecord fa = evaluator.evaluate(child_a);
    const FitnessRecord fb = evaluator.evaluate(child_b);

    int winner = 0;
    double best = incumbent.fitness;
    if (fa.fitness > best) {
        winner = 1;
        best = fa.fitness;
    }
    if (fb.fitness > best) winner = 2;

    if (event) {
        event->position = j;
        event->partner = partner;
        event->k = k;
        event->guided = config.flags.diversity_crossover;
        event->parent_a = a;
        event->parent_b = b;
        event->child_a = child_a;
        event->child_b = child_b;
        event->incumbent_fitness = incumbent;
        event->child_a_fitness = fa;
        event->child_b_fitness = fb;
        event->winner = winner;
    }
    if (winner == 1) {
        chain[j].genes = std::move(child_a);
        chain[j].fitness = fa;
    } else if (winner == 2) {
        chain[j].genes = std::move(child_b);
        chain[j].fitness = fb;
    }
    return true;
}

std::optional<std::size_t> mutation_step(Chromosome& chromosome, const GainRatioMatrix& omega,
                                         const EvolutionConfig& config, Rng& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (!(coin(rng) < config.mutation_prob)) return std::nullopt;
    const std::size_t d = chromosome.genes.size();
    std::size_t r;
    if (config.flags.diversity_mutation) {
        r = sweep_mutation(chromosome.genes, omega).r_star;
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, d - 1);
        r = pick(rng);
    }
    chromosome.genes[r] ^= 1u;
    repair(chromosome.genes, rng);
    chromosome.fitness.reset();
    return r;
}

std::vector<MigrationEvent> migrate_elites(ChainedPopulation& population, std::size_t s, MigrationMode mode) {
    const std::size_t m = population.subpops.size();
    std::vector<MigrationEvent> events;
    if (s == 0 || m < 2) return events;
    for (const auto& chain : population.subpops)
        if (s > chain.size()) throw std::invalid_argument("migrate_elites: s exceeds subpopulation size");

    auto move_elites = [&](std::size_t from, const std::vector<Chromosome>& elites, const std::vector<std::size_t>& slots) {
        const std::size_t to = (from + 1) % m;
        MigrationEvent ev;
        ev.generation = population.generation;
        ev.from = from;
        ev.to = to;
        for (std::size_t e = 0; e < elites.size(); ++e) {
            population.subpops[to][slots[e]] = elites[e];
            ev.elites.push_back(elites[e].genes);
        }
        events.push_back(std::move(ev));
    };
    auto pick = [&](const Subpopulation& chain, std::vector<Chromosome>& elites, std::vector<std::size_t>& worst) {
        const auto order = rank_by_fitness(chain);
        elites.clear();
        for (std::size_t e = 0; e < s; ++e) elites.push_back(chain[order[e]]);
        worst.assign(order.end() - static_cast<std::ptrdiff_t>(s), order.end());
        std::sort(worst.begin(), worst.end());
    };

    if (mode == MigrationMode::snapshot) {
        std::vector<std::vector<Chromosome>> elites(m);
        std::vector<std::vector<std::size_t>> worst(m);
        for (std::size_t i = 0; i < m; ++i) pick(population.subpops[i], elites[i], worst[i]);
        for (std::size_t i = 0; i < m; ++i) move_elites(i, elites[i], worst[(i + 1) % m]);
    } else {
        std::vector<Chromosome> elites;
        std::vector<std::size_t> own_worst;
        std::vector<std::size_t> target_worst;
        std::vector<Chromosome> unused;
        for (std::size_t i = 0; i < m; ++i) {
            pick(population.subpops[i], elites, own_worst);
            pick(population.subpops[(i + 1) % m], unused, target_worst);
            move_elites(i, elites, target_worst);
        }
    }
    return events;
}

RunResult run(const Dataset& ds, const EvolutionConfig& config, const GainRatioMatrix* omega_in,
              const EvolutionObserver* observer) {
    config.validate();
    const int threads = resolve_threads(config.threads);
    const std::size_t m = config.chain_count();

    GainRatioMatrix omega_local;
    if (!omega_in) {
        omega_local = build_omega(ds, Execution::parallel, threads);
        omega_in = &omega_local;
    }
    const GainRatioMatrix& omega = *omega_in;
    if (omega.d != ds.d) throw DataError("gain-ratio matrix does not match the dataset width");

    // One chain: give the threads to the classifier instead.
    FitnessEvaluator evaluator(ds, {config.alpha, config.k, m == 1 ? threads : 1});
    const int chain_threads = m > 1 ? std::min<int>(threads, static_cast<int>(m)) : 1;

    Rng init_rng = make_stream({config.seed, kInitStream});
    ChainedPopulation pop = init_population(ds.d, config, init_rng);

    RunResult result;
    std::vector<LocalBest> local(m);
    std::vector<std::vector<CrossoverEvent>> events(m);
    std::vector<std::exception_ptr> errors(m);

    auto worker = [&](std::size_t i, std::size_t generation) {
        Subpopulation& chain = pop.subpops[i];
        LocalBest& archive = local[i];
        events[i].clear();
        if (generation > 0) {
            Rng rng = make_stream({config.seed, kGenerationStream, i, generation});
            for (std::size_t j = 0; j < chain.size(); ++j) {
                CrossoverEvent ev;
                if (!chain_crossover_step(chain, j, omega, config, evaluator, rng, &ev)) continue;
                ev.generation = generation;
                ev.subpop = i;
                archive.offer(ev.parent_a, ev.incumbent_fitness);
                archive.offer(ev.child_a, ev.child_a_fitness);
                archive.offer(ev.child_b, ev.child_b_fitness);
                if (observer && observer->on_crossover) events[i].push_back(std::move(ev));
            }
            for (auto& c : chain) mutation_step(c, omega, config, rng);
        }
        for (auto& c : chain) archive.offer(c.genes, ensure_fitness(c, evaluator));
    };

    auto step = [&](std::size_t generation) {
        pop.generation = generation;
#pragma omp parallel for num_threads(chain_threads) schedule(static) if (chain_threads > 1)
        for (std::size_t i = 0; i < m; ++i) {
            try {
                worker(i, generation);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        if (observer && observer->on_crossover)
            for (const auto& per_chain : events)
                for (const auto& ev : per_chain) observer->on_crossover(ev);

        for (auto& lb : local) {
            if (!lb.set) continue;
            if (!pop.global_best.fitness || lb.best.fitness->fitness > pop.global_best.fitness->fitness)
                pop.global_best = lb.best;
        }

        if (generation > 0 && config.flags.elite_interaction && m > 1) {
            if (observer && observer->on_migration) {
                const ChainedPopulation before = pop;
                const auto moved = migrate_elites(pop, config.elites, config.migration);
                for (const auto& ev : moved) observer->on_migration(ev, before, pop);
            } else {
                migrate_elites(pop, config.elites, config.migration);
            }
        }

        for (std::size_t i = 0; i < m; ++i) {
            const auto& chain = pop.subpops[i];
            TraceRow row;
            row.generation = generation;
            row.subpop = i;
            double sum = 0.0;
            std::size_t best_pos = 0;
            for (std::size_t j = 0; j < chain.size(); ++j) {
                const double f = chain[j].fitness_or_zero();
                sum += f;
                if (f > chain[best_pos].fitness_or_zero()) best_pos = j;
            }
            row.best_fitness = chain[best_pos].fitness_or_zero();
            row.best_n_selected = count_selected(chain[best_pos].genes);
            row.mean_fitness = chain.empty() ? 0.0 : sum / static_cast<double>(chain.size());
            result.trace.push_back(row);
        }
        result.best_per_generation.push_back(pop.global_best.fitness_or_zero());
        if (observer && observer->on_generation_end) observer->on_generation_end(pop);
    };

    for (std::size_t t = 0; t <= config.iterations; ++t) step(t);

    result.best_mask = pop.global_best.genes;
    result.best_fitness = *pop.global_best.fitness;
    result.test = evaluate_on_test(ds, result.best_mask, config.k, config.final_train_includes_validation);
    result.feature_ratio = static_cast<double>(count_selected(result.best_mask)) / static_cast<double>(ds.d);
    result.classifier_calls = evaluator.classifier_calls();
    result.cache_hits = evaluator.cache_hits();
    return result;
}

}  // namespace mpdgga
