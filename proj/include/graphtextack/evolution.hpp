#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "graphtextack/fitness.hpp"
#include "graphtextack/injection.hpp"
#include "graphtextack/reference_model.hpp"
#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

struct EvolutionConfig {
    int population_size = 30;
    int generations = 50;
    // -1 resolves to max(2, population_size / 5), clamped to population_size.
    int elite_count = -1;
    double p_crossover = 0.5;
    double p_mut = 0.25;
    int d_max = 10;
    FitnessConfig fitness;
    LabelSource feature_source = LabelSource::kPseudoLabels;
    std::uint64_t seed = 0;

    int resolved_elite_count() const;
    void validate() const;
};

struct Population {
    std::vector<InjectionCandidate> members;
    int generation = 0;
};

// Indices of `pop.members` ranked by fitness total descending; ties broken by
// higher delta_conf, then lower index. All members must carry cached_fitness.
// `totals_override` substitutes the ranking totals (used for population-level
// influence normalization) while tie-breaks still read the cached breakdowns.
std::vector<std::size_t> ranked_indices(const Population& pop,
                                        const std::vector<double>* totals_override = nullptr);

// Top elite_count members in rank order. Throws if elite_count exceeds the
// population.
std::vector<InjectionCandidate> select_elites(const Population& pop, int elite_count,
                                              const std::vector<double>* totals_override = nullptr);

// Deterministic-split child: endpoints = a.endpoints[:j] followed by
// b.endpoints[j:] with duplicates removed (first occurrence wins); empty
// result falls back to a copy of a's endpoints. Class from a or b per
// `class_from_a`. cached_fitness cleared.
InjectionCandidate crossover_at(const InjectionCandidate& a, const InjectionCandidate& b,
                                std::size_t j, bool class_from_a);

// Random split j ~ U[0, min(|a|, |b|)], class side fair coin.
InjectionCandidate crossover(const InjectionCandidate& a, const InjectionCandidate& b,
                             std::mt19937_64& rng);

// With probability p_mut applies one of {rewire one endpoint, resample the
// class}, fair coin, falling through to the other when the chosen move has no
// legal outcome; otherwise returns the input unchanged. Rewire draws a
// uniform node outside the current endpoint set; reclass draws a uniform
// class different from the current one. allow_* gates support the uni-modal
// search variants.
InjectionCandidate mutate(const InjectionCandidate& s, const TagGraph& graph, double p_mut,
                          std::mt19937_64& rng, bool allow_rewire = true, bool allow_reclass = true);

// Constraints for the uni-modal control searches.
struct FreezeSpec {
    std::optional<int> frozen_class;  // all candidates use this class; reclass disabled
    bool freeze_endpoints = false;    // one endpoint draw shared by all candidates; rewire disabled
};

struct GenerationStats {
    int generation = 0;
    double best_total = 0.0;  // raw totals (no population normalization)
    double mean_total = 0.0;
    std::uint64_t queries_cumulative = 0;
    double wall_ms = 0.0;
};

struct FitnessRow {
    int generation = 0;
    int candidate_index = 0;
    double delta_conf = 0.0;
    double pr = 0.0;
    double total = 0.0;
};

struct InjectionTrace {
    int injection_index = 0;
    std::vector<GenerationStats> generations;
    std::vector<FitnessRow> fitness_rows;
};

struct EvolveResult {
    InjectionCandidate best;  // cached_fitness = raw breakdown of the incumbent
    int best_generation = 0;
    TagGraph realized;  // base graph plus the incumbent injected
    NodeId injected_id = 0;
    InjectionTrace trace;
};

// One injection step: random init of population_size genomes, then
// `generations` rounds of evaluate / elite-select / crossover / mutate.
// Returns the incumbent (best raw fitness over all generations) realized
// against `base`. All randomness derives from (config.seed, injection_index),
// so a candidate's realized features are fixed for the whole step and the
// returned graph reproduces the incumbent's evaluated realization exactly.
// generations == 0 commits the first random genome unevaluated.
// `query_baseline` is subtracted from the model's query counter in the trace.
EvolveResult evolve_one_injection(const TagGraph& base, BlackBoxModel& model,
                                  const ClassFeatureBank& bank, const EvolutionConfig& config,
                                  int injection_index = 0,
                                  const DegreeDistribution* degrees = nullptr,
                                  const FreezeSpec* freeze = nullptr,
                                  std::uint64_t query_baseline = 0);

struct AttackOutcome {
    TagGraph poisoned;
    std::vector<InjectionCandidate> committed;  // each with its incumbent breakdown
    std::vector<NodeId> injected_ids;
    std::vector<InjectionTrace> traces;
    std::uint64_t attacker_queries = 0;
    double wall_ms = 0.0;
};

// Sequentially commits ceil(budget_fraction * |V|) injections. Degree budgets
// come from the clean graph's degree distribution; base confidences are
// refreshed after every commit. The feature bank defaults to one built from
// the clean graph per config.feature_source; pass `bank` to share one (the
// uni-modal controls need this to agree on the frozen class).
AttackOutcome run_attack(const TagGraph& graph, BlackBoxModel& model, double budget_fraction,
                         const EvolutionConfig& config, const FreezeSpec* freeze = nullptr,
                         const ClassFeatureBank* bank = nullptr);

// CSV writers. Columns are fixed:
//   trace:   injection_index,generation,best_fitness,mean_fitness,queries_cumulative,wall_clock_ms
//   fitness: generation,candidate_index,delta_conf,pr,total
// include_timing=false writes 0.000 for wall clock so identical runs produce
// byte-identical files.
std::string trace_to_csv(const std::vector<InjectionTrace>& traces, bool include_timing = true);
std::string fitness_rows_to_csv(const InjectionTrace& trace);

}  // namespace graphtextack
