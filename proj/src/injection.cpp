#include "graphtextack/injection.hpp"

#include <algorithm>
#include <json.hpp>
#include <stdexcept>

#include "graphtextack/rng.hpp"

namespace graphtextack {

using nlohmann::json;
using nlohmann::ordered_json;

std::string InjectionCandidate::to_json() const {
    ordered_json doc;
    doc["endpoints"] = endpoints;
    doc["class"] = sample_class;
    return doc.dump();
}

InjectionCandidate InjectionCandidate::from_json(const std::string& text) {
    json doc = json::parse(text);
    if (!doc.contains("endpoints") || !doc.contains("class"))
        throw std::runtime_error("candidate json: missing 'endpoints' or 'class'");
    InjectionCandidate c;
    c.endpoints = doc["endpoints"].get<std::vector<NodeId>>();
    c.sample_class = doc["class"].get<int>();
    return c;
}

bool same_genome(const InjectionCandidate& a, const InjectionCandidate& b) {
    return a.sample_class == b.sample_class && a.endpoints == b.endpoints;
}

std::uint64_t candidate_hash(const InjectionCandidate& c) {
    std::uint64_t h = mix64(0xca4d1dULL);
    h = hash_combine(h, static_cast<std::uint64_t>(c.sample_class));
    h = hash_combine(h, c.endpoints.size());
    for (NodeId u : c.endpoints) h = hash_combine(h, static_cast<std::uint64_t>(u));
    return h;
}

ClassFeatureBank::ClassFeatureBank(const TagGraph& g, BlackBoxModel& model, LabelSource source)
    : donors_(static_cast<std::size_t>(g.num_classes())), source_(source) {
    if (source == LabelSource::kTrueLabels) {
        for (NodeId v : g.train_nodes()) donors_[static_cast<std::size_t>(g.label(v))].push_back(v);
    } else {
        const Eigen::MatrixXd probs = model.predict(g);  // one query for the whole bank
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            Eigen::Index cls;
            probs.row(v).maxCoeff(&cls);
            donors_[static_cast<std::size_t>(cls)].push_back(v);
        }
    }
    for (std::size_t cls = 0; cls < donors_.size(); ++cls)
        if (donors_[cls].empty())
            throw std::invalid_argument("feature bank: class " + std::to_string(cls) +
                                        " has no donor nodes");
}

const std::vector<NodeId>& ClassFeatureBank::donors(int cls) const {
    if (cls < 0 || cls >= num_classes()) throw std::invalid_argument("feature bank: bad class id");
    return donors_[static_cast<std::size_t>(cls)];
}

int ClassFeatureBank::most_common_class() const {
    int best = 0;
    for (int cls = 1; cls < num_classes(); ++cls)
        if (donors_[static_cast<std::size_t>(cls)].size() > donors_[static_cast<std::size_t>(best)].size())
            best = cls;
    return best;
}

Eigen::VectorXd ClassFeatureBank::sample_features(int cls, const TagGraph& g,
                                                  std::mt19937_64& rng) const {
    const auto& pool = donors(cls);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const NodeId donor = pool[pick(rng)];
    if (donor >= g.num_nodes())
        throw std::invalid_argument("feature bank donor is not present in the given graph");
    return g.features().row(donor).transpose();
}

InjectionCandidate random_candidate(const TagGraph& g, const DegreeDistribution& degrees, int d_max,
                                    std::mt19937_64& rng) {
    const int budget = std::min(degrees.sample(rng, d_max), g.num_nodes());
    InjectionCandidate c;
    c.endpoints.reserve(static_cast<std::size_t>(budget));
    std::uniform_int_distribution<NodeId> pick(0, g.num_nodes() - 1);
    while (static_cast<int>(c.endpoints.size()) < budget) {
        const NodeId u = pick(rng);
        if (std::find(c.endpoints.begin(), c.endpoints.end(), u) == c.endpoints.end())
            c.endpoints.push_back(u);
    }
    std::uniform_int_distribution<int> cls(0, g.num_classes() - 1);
    c.sample_class = cls(rng);
    return c;
}

std::pair<TagGraph, NodeId> realize(const InjectionCandidate& c, const TagGraph& base,
                                    const ClassFeatureBank& bank, std::uint64_t stream_seed) {
    auto rng = make_rng(derive_stream(stream_seed, {streams::kRealize, candidate_hash(c)}));
    const Eigen::VectorXd row = bank.sample_features(c.sample_class, base, rng);
    return base.with_injected_node(row, c.sample_class, c.endpoints);
}

}  // namespace graphtextack
