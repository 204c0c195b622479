#pragma once

#include <vector>

#include "graphtextack/fitness_types.hpp"
#include "graphtextack/injection.hpp"
#include "graphtextack/reference_model.hpp"
#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

// Mean absolute change of max-class confidence over the injected node's
// two-hop neighborhood (neighborhood taken in `injected`, restricted to nodes
// that already exist in `base`). Returns 0 for an isolated neighborhood.
// Costs one black-box query on `injected`.
double local_prediction_shift(BlackBoxModel& model, const std::vector<double>& base_confidence,
                              const TagGraph& injected, NodeId injected_id);

// PageRank score of the injected node inside the injected graph. No model
// queries: purely structural.
double pagerank_influence(const TagGraph& injected, NodeId injected_id, const FitnessConfig& config);

// Everything evaluate() needs besides the candidate itself. base_confidence
// must be max_confidence(model.predict(base)) for the same base graph.
struct FitnessContext {
    BlackBoxModel& model;
    const TagGraph& base;
    const std::vector<double>& base_confidence;
    const ClassFeatureBank& bank;
    FitnessConfig config;
    std::uint64_t realize_seed = 0;  // stream seed handed to realize()
};

// Realizes the candidate, measures both terms, stores the breakdown in
// c.cached_fitness and returns it. A candidate that already carries a cached
// breakdown is returned as-is without spending queries.
FitnessBreakdown evaluate(InjectionCandidate& c, const FitnessContext& ctx);

// Totals used for selection within one population. With config.normalize_pr
// the influence term is min-max rescaled across the group (degenerate range
// contributes 0), otherwise raw totals are returned unchanged.
std::vector<double> selection_totals(const std::vector<FitnessBreakdown>& group,
                                     const FitnessConfig& config);

}  // namespace graphtextack
