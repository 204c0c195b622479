#include "graphtextack/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "graphtextack/rng.hpp"

namespace graphtextack {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int EvolutionConfig::resolved_elite_count() const {
    const int wanted = elite_count < 0 ? std::max(2, population_size / 5) : elite_count;
    return std::min(wanted, population_size);
}

void EvolutionConfig::validate() const {
    if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (p_crossover < 0.0 || p_crossover > 1.0 || p_mut < 0.0 || p_mut > 1.0)
        throw std::invalid_argument("p_crossover and p_mut must lie in [0,1]");
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    const int n_e = resolved_elite_count();
    if (n_e < 1 || n_e > population_size) throw std::invalid_argument("elite_count out of range");
    if (p_crossover > 0.0 && n_e < 2 && population_size >= 2)
        throw std::invalid_argument("crossover needs at least two elites");
    fitness.validate();
}

std::vector<std::size_t> ranked_indices(const Population& pop, const std::vector<double>* totals_override) {
    const std::size_t n = pop.members.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!pop.members[i].cached_fitness)
            throw std::invalid_argument("ranking requires a fully evaluated population");
    if (totals_override && totals_override->size() != n)
        throw std::invalid_argument("totals override has wrong length");

    auto total = [&](std::size_t i) {
        return totals_override ? (*totals_override)[i] : pop.members[i].cached_fitness->total;
    };
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (total(a) != total(b)) return total(a) > total(b);
        const double da = pop.members[a].cached_fitness->delta_conf;
        const double db = pop.members[b].cached_fitness->delta_conf;
        if (da != db) return da > db;
        return a < b;
    });
    return idx;
}

std::vector<InjectionCandidate> select_elites(const Population& pop, int elite_count,
                                              const std::vector<double>* totals_override) {
    if (elite_count < 0 || static_cast<std::size_t>(elite_count) > pop.members.size())
        throw std::invalid_argument("elite_count exceeds population size");
    const auto idx = ranked_indices(pop, totals_override);
    std::vector<InjectionCandidate> elites;
    elites.reserve(static_cast<std::size_t>(elite_count));
    for (int i = 0; i < elite_count; ++i) elites.push_back(pop.members[idx[static_cast<std::size_t>(i)]]);
    return elites;
}

InjectionCandidate crossover_at(const InjectionCandidate& a, const InjectionCandidate& b,
                                std::size_t j, bool class_from_a) {
    if (j > a.endpoints.size() || j > b.endpoints.size())
        throw std::invalid_argument("crossover split beyond a parent's endpoint list");

    InjectionCandidate child;
    child.endpoints.reserve(b.endpoints.size());
    std::unordered_set<NodeId> seen;
    auto push = [&](NodeId u) {
        if (seen.insert(u).second) child.endpoints.push_back(u);
    };
    for (std::size_t i = 0; i < j; ++i) push(a.endpoints[i]);
    for (std::size_t i = j; i < b.endpoints.size(); ++i) push(b.endpoints[i]);
    if (child.endpoints.empty()) child.endpoints = a.endpoints;

    child.sample_class = class_from_a ? a.sample_class : b.sample_class;
    return child;
}

InjectionCandidate crossover(const InjectionCandidate& a, const InjectionCandidate& b,
                             std::mt19937_64& rng) {
    const std::size_t hi = std::min(a.endpoints.size(), b.endpoints.size());
    std::uniform_int_distribution<std::size_t> split(0, hi);
    const std::size_t j = split(rng);
    std::uniform_int_distribution<int> coin(0, 1);
    return crossover_at(a, b, j, coin(rng) == 0);
}

InjectionCandidate mutate(const InjectionCandidate& s, const TagGraph& graph, double p_mut,
                          std::mt19937_64& rng, bool allow_rewire, bool allow_reclass) {
    InjectionCandidate out = s;
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);
    if (!(uniform01(rng) < p_mut)) return out;

    const bool can_rewire =
        allow_rewire && graph.num_nodes() > static_cast<int>(s.endpoints.size());
    const bool can_reclass = allow_reclass && graph.num_classes() > 1;
    if (!can_rewire && !can_reclass) return out;

    bool rewire = can_rewire;
    if (can_rewire && can_reclass) {
        std::uniform_int_distribution<int> coin(0, 1);
        rewire = coin(rng) == 0;
    }

    if (rewire) {
        std::uniform_int_distribution<std::size_t> slot(0, out.endpoints.size() - 1);
        const std::size_t at = slot(rng);
        std::uniform_int_distribution<NodeId> pick(0, graph.num_nodes() - 1);
        NodeId u;
        do {
            u = pick(rng);
        } while (std::find(out.endpoints.begin(), out.endpoints.end(), u) != out.endpoints.end());
        out.endpoints[at] = u;
    } else {
        std::uniform_int_distribution<int> pick(0, graph.num_classes() - 2);
        int cls = pick(rng);
        if (cls >= out.sample_class) ++cls;  // uniform over classes other than the current one
        out.sample_class = cls;
    }
    out.cached_fitness.reset();
    return out;
}

EvolveResult evolve_one_injection(const TagGraph& base, BlackBoxModel& model,
                                  const ClassFeatureBank& bank, const EvolutionConfig& config,
                                  int injection_index, const DegreeDistribution* degrees,
                                  const FreezeSpec* freeze, std::uint64_t query_baseline) {
    config.validate();
    const std::uint64_t step_seed =
        derive_stream(config.seed, {streams::kAttack, static_cast<std::uint64_t>(injection_index)});

    std::optional<DegreeDistribution> own_degrees;
    if (!degrees) degrees = &own_degrees.emplace(base);

    auto init_rng = make_rng(derive_stream(step_seed, {streams::kInit}));
    std::vector<NodeId> shared_endpoints;
    if (freeze && freeze->freeze_endpoints)
        shared_endpoints = random_candidate(base, *degrees, config.d_max, init_rng).endpoints;

    auto fresh = [&](std::mt19937_64& rng) {
        InjectionCandidate c = random_candidate(base, *degrees, config.d_max, rng);
        if (freeze) {
            if (freeze->frozen_class) c.sample_class = *freeze->frozen_class;
            if (freeze->freeze_endpoints) c.endpoints = shared_endpoints;
        }
        return c;
    };

    Population pop;
    pop.members.reserve(static_cast<std::size_t>(config.population_size));
    for (int i = 0; i < config.population_size; ++i) pop.members.push_back(fresh(init_rng));

    InjectionTrace trace;
    trace.injection_index = injection_index;

    if (config.generations == 0) {
        // Degenerate loop: commit the first random genome without evaluation.
        auto [realized, id] = realize(pop.members[0], base, bank, step_seed);
        return {pop.members[0], 0, std::move(realized), id, std::move(trace)};
    }

    const std::vector<double> base_conf = max_confidence(model.predict(base));
    const FitnessContext ctx{model, base, base_conf, bank, config.fitness, step_seed};

    InjectionCandidate incumbent;
    int incumbent_generation = 0;
    double incumbent_total = -std::numeric_limits<double>::infinity();
    const int n_e = config.resolved_elite_count();

    for (int gen = 0; gen < config.generations; ++gen) {
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<FitnessBreakdown> breakdowns;
        breakdowns.reserve(pop.members.size());
        double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
        for (std::size_t i = 0; i < pop.members.size(); ++i) {
            const FitnessBreakdown fb = evaluate(pop.members[i], ctx);
            breakdowns.push_back(fb);
            trace.fitness_rows.push_back(
                {gen, static_cast<int>(i), fb.delta_conf, fb.pr, fb.total});
            best = std::max(best, fb.total);
            sum += fb.total;
            if (fb.total > incumbent_total) {  // ties keep the earliest find
                incumbent_total = fb.total;
                incumbent = pop.members[i];
                incumbent_generation = gen;
            }
        }

        trace.generations.push_back({gen, best, sum / static_cast<double>(pop.members.size()),
                                     model.query_count() - query_baseline, elapsed_ms(t0)});

        if (gen + 1 == config.generations) break;

        const std::vector<double> totals = selection_totals(breakdowns, config.fitness);
        std::vector<InjectionCandidate> next = select_elites(pop, n_e, &totals);
        auto ops_rng =
            make_rng(derive_stream(step_seed, {streams::kOps, static_cast<std::uint64_t>(gen)}));

        if (config.p_crossover > 0.0 && n_e >= 2) {
            std::bernoulli_distribution cross(config.p_crossover);
            for (int i = 0; i < n_e && static_cast<int>(next.size()) < config.population_size; ++i)
                for (int j = 0; j < n_e && static_cast<int>(next.size()) < config.population_size; ++j) {
                    if (i == j) continue;
                    if (cross(ops_rng))
                        next.push_back(crossover(next[static_cast<std::size_t>(i)],
                                                 next[static_cast<std::size_t>(j)], ops_rng));
                }
        }
        while (static_cast<int>(next.size()) < config.population_size) next.push_back(fresh(ops_rng));

        const bool allow_rewire = !(freeze && freeze->freeze_endpoints);
        const bool allow_reclass = !(freeze && freeze->frozen_class);
        for (std::size_t k = static_cast<std::size_t>(n_e); k < next.size(); ++k)
            next[k] = mutate(next[k], base, config.p_mut, ops_rng, allow_rewire, allow_reclass);

        pop.members = std::move(next);
        pop.generation = gen + 1;
    }

    // Same step seed as during evaluation, so the incumbent's feature draw is
    // reproduced bit for bit.
    auto [realized, id] = realize(incumbent, base, bank, step_seed);
    return {std::move(incumbent), incumbent_generation, std::move(realized), id, std::move(trace)};
}

AttackOutcome run_attack(const TagGraph& graph, BlackBoxModel& model, double budget_fraction,
                         const EvolutionConfig& config, const FreezeSpec* freeze,
                         const ClassFeatureBank* bank) {
    config.validate();
    if (!std::isfinite(budget_fraction) || budget_fraction < 0.0)
        throw std::invalid_argument("budget_fraction must be finite and >= 0");

    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t q0 = model.query_count();
    const int n_inject = ceil_count(budget_fraction, graph.num_nodes());

    std::optional<ClassFeatureBank> own_bank;
    if (!bank) bank = &own_bank.emplace(graph, model, config.feature_source);
    const DegreeDistribution degrees(graph);  // budgets follow the clean graph throughout

    AttackOutcome out{graph, {}, {}, {}, 0, 0.0};
    for (int step = 0; step < n_inject; ++step) {
        EvolveResult res =
            evolve_one_injection(out.poisoned, model, *bank, config, step, &degrees, freeze, q0);
        out.poisoned = std::move(res.realized);
        out.committed.push_back(std::move(res.best));
        out.injected_ids.push_back(res.injected_id);
        out.traces.push_back(std::move(res.trace));
    }
    out.attacker_queries = model.query_count() - q0;
    out.wall_ms = elapsed_ms(t0);
    return out;
}

std::string trace_to_csv(const std::vector<InjectionTrace>& traces, bool include_timing) {
    std::string out = "injection_index,generation,best_fitness,mean_fitness,queries_cumulative,wall_clock_ms\n";
    char buf[192];
    for (const auto& trace : traces) {
        for (const auto& gs : trace.generations) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.9f,%.9f,%llu,%.3f\n", trace.injection_index,
                          gs.generation, gs.best_total, gs.mean_total,
                          static_cast<unsigned long long>(gs.queries_cumulative),
                          include_timing ? gs.wall_ms : 0.0);
            out += buf;
        }
    }
    return out;
}

std::string fitness_rows_to_csv(const InjectionTrace& trace) {
    std::string out = "generation,candidate_index,delta_conf,pr,total\n";
    char buf[160];
    for (const auto& row : trace.fitness_rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9f,%.9f,%.9f\n", row.generation,
                      row.candidate_index, row.delta_conf, row.pr, row.total);
        out += buf;
    }
    return out;
}

}  // namespace graphtextack
