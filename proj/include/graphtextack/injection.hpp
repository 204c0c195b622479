#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "graphtextack/fitness_types.hpp"
#include "graphtextack/reference_model.hpp"
#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

// Genome of one injected node: where it attaches and which class it samples
// its features from. Features themselves are drawn at realization time so a
// genome stays cheap to copy and mutate.
struct InjectionCandidate {
    std::vector<NodeId> endpoints;  // ordered, distinct; order matters for crossover
    int sample_class = 0;
    std::optional<FitnessBreakdown> cached_fitness;

    std::string to_json() const;
    static InjectionCandidate from_json(const std::string& text);
};

bool same_genome(const InjectionCandidate& a, const InjectionCandidate& b);

// Order-sensitive hash of (endpoints, sample_class). cached_fitness excluded.
std::uint64_t candidate_hash(const InjectionCandidate& c);

enum class LabelSource {
    kTrueLabels,    // donors = labeled train nodes
    kPseudoLabels,  // donors = all nodes, classed by one model query on the clean graph
};

// Per-class pools of donor nodes whose feature rows an injected node may copy.
class ClassFeatureBank {
public:
    // Builds donor pools from g. kPseudoLabels spends one black-box query.
    // Throws if any class ends up with an empty pool.
    ClassFeatureBank(const TagGraph& g, BlackBoxModel& model, LabelSource source);

    int num_classes() const { return static_cast<int>(donors_.size()); }
    const std::vector<NodeId>& donors(int cls) const;
    LabelSource source() const { return source_; }

    // Class with the largest donor pool; ties go to the lower class id.
    int most_common_class() const;

    // Uniform donor row for the class. The returned row is copied from g.
    Eigen::VectorXd sample_features(int cls, const TagGraph& g, std::mt19937_64& rng) const;

private:
    std::vector<std::vector<NodeId>> donors_;
    LabelSource source_;
};

// Random genome: degree drawn from the empirical distribution clamped to
// [1, d_max], endpoints sampled without replacement, class uniform.
InjectionCandidate random_candidate(const TagGraph& g, const DegreeDistribution& degrees, int d_max,
                                    std::mt19937_64& rng);

// Materializes a genome against `base`: samples features for the candidate's
// class, injects the node, returns (poisoned graph, injected id). The feature
// draw is seeded by (stream_seed, candidate hash), so realizing the same
// genome under the same stream reproduces the same row.
std::pair<TagGraph, NodeId> realize(const InjectionCandidate& c, const TagGraph& base,
                                    const ClassFeatureBank& bank, std::uint64_t stream_seed);

}  // namespace graphtextack
