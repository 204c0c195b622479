#include "graphtextack/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace graphtextack {

namespace {

// One no-search injection pass shared by the random and preferential
// baselines; `weighted` switches the endpoint rule.
AttackOutcome plain_injection(const TagGraph& graph, double r, const ClassFeatureBank& bank,
                              const DegreeDistribution& degrees, std::mt19937_64& rng, int d_max,
                              bool weighted) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n_inject = ceil_count(r, graph.num_nodes());

    AttackOutcome out{graph, {}, {}, {}, 0, 0.0};
    std::uniform_int_distribution<int> pick_class(0, bank.num_classes() - 1);
    for (int step = 0; step < n_inject; ++step) {
        const TagGraph& cur = out.poisoned;
        const int budget = std::min(degrees.sample(rng, d_max), cur.num_nodes());

        InjectionCandidate c;
        c.sample_class = pick_class(rng);
        if (weighted) {
            // Without-replacement draws proportional to degree+1 via a
            // cumulative-weight walk; chosen nodes get weight 0.
            std::vector<double> weight(static_cast<std::size_t>(cur.num_nodes()));
            double total = 0.0;
            for (NodeId v = 0; v < cur.num_nodes(); ++v) {
                weight[static_cast<std::size_t>(v)] = cur.degree(v) + 1.0;
                total += weight[static_cast<std::size_t>(v)];
            }
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            for (int k = 0; k < budget; ++k) {
                double u = uniform(rng) * total;
                NodeId chosen = cur.num_nodes() - 1;
                for (NodeId v = 0; v < cur.num_nodes(); ++v) {
                    u -= weight[static_cast<std::size_t>(v)];
                    if (u < 0.0) {
                        chosen = v;
                        break;
                    }
                }
                // Rounding may land on an already chosen (zero-weight) node;
                // step to the next one with mass.
                while (weight[static_cast<std::size_t>(chosen)] == 0.0)
                    chosen = (chosen + 1) % cur.num_nodes();
                c.endpoints.push_back(chosen);
                total -= weight[static_cast<std::size_t>(chosen)];
                weight[static_cast<std::size_t>(chosen)] = 0.0;
            }
        } else {
            std::uniform_int_distribution<NodeId> pick(0, cur.num_nodes() - 1);
            while (static_cast<int>(c.endpoints.size()) < budget) {
                const NodeId v = pick(rng);
                if (std::find(c.endpoints.begin(), c.endpoints.end(), v) == c.endpoints.end())
                    c.endpoints.push_back(v);
            }
        }

        const Eigen::VectorXd row = bank.sample_features(c.sample_class, cur, rng);
        auto [next, id] = cur.with_injected_node(row, c.sample_class, c.endpoints);
        out.poisoned = std::move(next);
        out.committed.push_back(std::move(c));
        out.injected_ids.push_back(id);
    }
    out.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

AttackOutcome random_injection(const TagGraph& graph, double r, const ClassFeatureBank& bank,
                               const DegreeDistribution& degrees, std::mt19937_64& rng, int d_max) {
    return plain_injection(graph, r, bank, degrees, rng, d_max, /*weighted=*/false);
}

AttackOutcome preferential_injection(const TagGraph& graph, double r, const ClassFeatureBank& bank,
                                     const DegreeDistribution& degrees, std::mt19937_64& rng,
                                     int d_max) {
    return plain_injection(graph, r, bank, degrees, rng, d_max, /*weighted=*/true);
}

AttackOutcome unimodal_attack(const TagGraph& graph, BlackBoxModel& model,
                              const ClassFeatureBank& bank, double r,
                              const EvolutionConfig& config, BaselineKind kind) {
    FreezeSpec freeze;
    switch (kind) {
        case BaselineKind::kStructureOnly:
            freeze.frozen_class = bank.most_common_class();
            break;
        case BaselineKind::kFeatureOnly:
            freeze.freeze_endpoints = true;
            break;
        default:
            throw std::invalid_argument("unimodal_attack expects structure_only or feature_only");
    }
    return run_attack(graph, model, r, config, &freeze, &bank);
}

}  // namespace graphtextack
