#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphtextack/baselines.hpp"
#include "graphtextack/evolution.hpp"
#include "graphtextack/reference_model.hpp"
#include "graphtextack/sbm.hpp"
#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

enum class AttackMethod { kNone, kRandom, kPreferential, kStructureOnly, kFeatureOnly, kGraphTextack };

AttackMethod method_from_string(const std::string& name);
std::string to_string(AttackMethod m);

struct EvalSettings {
    TrainConfig train;
    EvolutionConfig evolution;
};

// Config file layout: {"train": {TrainConfig fields}, "evolution":
// {EvolutionConfig fields, "fitness": {FitnessConfig fields}}}. All keys
// optional, unknown keys rejected. Seeds in the file are starting values;
// the evaluation protocol derives per-seed streams on top of them.
EvalSettings settings_from_json(const std::string& text);
std::string settings_to_json(const EvalSettings& settings);

struct SeedRun {
    std::uint64_t seed = 0;
    double clean_accuracy = 0.0;
    double post_accuracy = 0.0;
    int injected_count = 0;
    std::uint64_t attacker_queries = 0;
    double ms_per_injection = 0.0;
};

struct AttackReport {
    std::string dataset;
    std::string method;
    double budget = 0.0;
    std::vector<SeedRun> runs;
    double clean_mean = 0.0, clean_stdev = 0.0;
    double post_mean = 0.0, post_stdev = 0.0;
};

// Full poisoning protocol, per seed: train the victim on the clean graph,
// record clean test accuracy, let the method poison the graph by querying
// only that clean model, retrain from scratch on the poisoned graph with the
// same hyperparameters and derived train seed, record accuracy on the
// original test nodes. Aggregates are mean and sample stdev over seeds.
// `outcomes`, when given, receives one AttackOutcome per seed (traces,
// committed candidates) for downstream analysis.
AttackReport poisoning_eval(const TagGraph& graph, const std::string& dataset_tag,
                            AttackMethod method, double budget, const EvalSettings& settings,
                            const std::vector<std::uint64_t>& seeds,
                            std::vector<AttackOutcome>* outcomes = nullptr);

// CSV: one row per seed plus mean/stdev rows; fixed formatting so identical
// runs serialize byte-identically. include_timing=false zeroes the runtime
// column.
std::string report_to_csv(const std::vector<AttackReport>& reports, bool include_timing = true);

// log10(C(num_nodes, d_max)^r * num_feature_choices^r). Exact-integer path
// when the whole product fits in 64 bits, sum-of-logs otherwise. Throws if
// d_max > num_nodes or the feature space is empty with r > 0.
double search_space_log10(long long num_nodes, long long r, long long d_max,
                          long long num_feature_choices);

struct ScalingRow {
    int num_nodes = 0;
    long long num_edges = 0;
    double ms_per_injection = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double fitted_exponent = 0.0;  // least-squares slope of log(ms) vs log(|E|)
};

// Trains one victim for each SbmSpec and times evolve_one_injection over
// `injections_per_size` sequential commits. Attack time only; training and
// graph generation excluded.
ScalingReport runtime_scaling(const std::vector<SbmSpec>& specs, const EvalSettings& settings,
                              int injections_per_size = 3);

std::string scaling_to_csv(const ScalingReport& report);

// Mean attack milliseconds per injection on a fixed graph (helper for
// population-size scaling checks).
double mean_injection_ms(const TagGraph& graph, const EvalSettings& settings, double budget,
                         std::uint64_t seed);

// Five-variant ablation: full, no-crossover (p_crossover=0), no-mutation
// (p_mut=0), alpha-0 (prediction-shift term off), beta-0 (influence term
// off). Each variant runs the full poisoning protocol per budget with the
// same seeds. Variant name is stored in AttackReport::method.
std::vector<AttackReport> ablation_suite(const TagGraph& graph, const std::string& dataset_tag,
                                         const std::vector<double>& budgets,
                                         const EvalSettings& settings,
                                         const std::vector<std::uint64_t>& seeds);

struct ShiftBoundReport {
    int trials = 0;
    long long affected_pairs = 0;
    double l_hat_max = 0.0;  // max over pairs of |dconf| / (feature discrepancy + degree term)
    double l_hat_p99 = 0.0;  // 99th percentile of the same ratio
};

// Empirical check of the local-shift bound: for `num_trials` random
// injections, measures each two-hop node v's confidence change against
// ||x_inj - mean(x of v's neighbors)|| + endpoint_count/(deg(v)+1). The
// denominator is always positive. Donor features come from train-labeled
// pools; endpoints are uniform with degree budgets from the clean graph.
ShiftBoundReport shift_bound_diagnostic(const TagGraph& graph, BlackBoxModel& model, int num_trials,
                                        std::uint64_t seed, int d_max = 10);

std::string shift_bound_to_csv(const ShiftBoundReport& report);

}  // namespace graphtextack
