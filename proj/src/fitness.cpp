#include "graphtextack/fitness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphtextack {

double local_prediction_shift(BlackBoxModel& model, const std::vector<double>& base_confidence,
                              const TagGraph& injected, NodeId injected_id) {
    if (injected_id != injected.num_nodes() - 1)
        throw std::invalid_argument("local_prediction_shift: v' must be the newest node");
    const Eigen::MatrixXd probs = model.predict(injected);
    const std::vector<double> conf = max_confidence(probs);

    double sum = 0.0;
    int count = 0;
    for (NodeId v : injected.two_hop_neighborhood(injected_id)) {
        if (static_cast<std::size_t>(v) >= base_confidence.size()) continue;  // other injected nodes
        sum += std::abs(conf[static_cast<std::size_t>(v)] - base_confidence[static_cast<std::size_t>(v)]);
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double pagerank_influence(const TagGraph& injected, NodeId injected_id, const FitnessConfig& config) {
    const auto pr = pagerank(injected, config.pr_damping, config.pr_tol, config.pr_max_iter);
    return pr.scores[static_cast<std::size_t>(injected_id)];
}

std::vector<double> selection_totals(const std::vector<FitnessBreakdown>& group,
                                     const FitnessConfig& config) {
    std::vector<double> totals(group.size());
    if (!config.normalize_pr) {
        for (std::size_t i = 0; i < group.size(); ++i) totals[i] = group[i].total;
        return totals;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& fb : group) {
        lo = std::min(lo, fb.pr);
        hi = std::max(hi, fb.pr);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const double scaled = range > 0.0 ? (group[i].pr - lo) / range : 0.0;
        totals[i] = config.alpha * group[i].delta_conf + config.beta * scaled;
    }
    return totals;
}

FitnessBreakdown evaluate(InjectionCandidate& c, const FitnessContext& ctx) {
    if (c.cached_fitness) return *c.cached_fitness;
    ctx.config.validate();
    if (ctx.base_confidence.size() != static_cast<std::size_t>(ctx.base.num_nodes()))
        throw std::invalid_argument("base confidence vector does not match base graph");

    const auto [injected, injected_id] = realize(c, ctx.base, ctx.bank, ctx.realize_seed);

    FitnessBreakdown fb;
    fb.delta_conf = local_prediction_shift(ctx.model, ctx.base_confidence, injected, injected_id);
    fb.pr = pagerank_influence(injected, injected_id, ctx.config);
    fb.total = ctx.config.alpha * fb.delta_conf + ctx.config.beta * fb.pr;
    c.cached_fitness = fb;
    return fb;
}

}  // namespace graphtextack
