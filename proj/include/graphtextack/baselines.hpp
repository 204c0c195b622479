#pragma once

#include <random>

#include "graphtextack/evolution.hpp"
#include "graphtextack/injection.hpp"
#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

enum class BaselineKind { kRandom, kPreferential, kStructureOnly, kFeatureOnly };

// Injects ceil(r*|V|) nodes with uniform endpoints, degree budgets from
// `degrees`, and features from a uniformly chosen donor class. No model
// queries, no search. Endpoints may include previously injected nodes.
AttackOutcome random_injection(const TagGraph& graph, double r, const ClassFeatureBank& bank,
                               const DegreeDistribution& degrees, std::mt19937_64& rng,
                               int d_max = 10);

// Like random_injection but endpoints are drawn without replacement with
// probability proportional to (degree + 1) in the current graph; the +1 keeps
// isolated nodes reachable.
AttackOutcome preferential_injection(const TagGraph& graph, double r, const ClassFeatureBank& bank,
                                     const DegreeDistribution& degrees, std::mt19937_64& rng,
                                     int d_max = 10);

// Evolutionary search with one modality frozen, for the synergy comparison:
// kStructureOnly pins every candidate's class to the bank's most common donor
// class (endpoints evolve); kFeatureOnly pins all candidates of an injection
// step to one shared endpoint draw (class evolves). Budgets and query
// accounting match run_attack exactly.
AttackOutcome unimodal_attack(const TagGraph& graph, BlackBoxModel& model,
                              const ClassFeatureBank& bank, double r,
                              const EvolutionConfig& config, BaselineKind kind);

}  // namespace graphtextack
