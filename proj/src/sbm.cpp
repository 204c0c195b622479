#include "graphtextack/sbm.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "graphtextack/rng.hpp"

namespace graphtextack {

void SbmSpec::validate() const {
    if (num_nodes < 1) throw std::invalid_argument("sbm: num_nodes must be >= 1");
    if (num_classes < 1 || num_classes > num_nodes)
        throw std::invalid_argument("sbm: num_classes must lie in [1, num_nodes]");
    if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
        throw std::invalid_argument("sbm: need 0 <= p_out <= p_in <= 1");
    if (feature_dim < 1) throw std::invalid_argument("sbm: feature_dim must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("sbm: sigma must be > 0");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw std::invalid_argument("sbm: train_fraction must lie in (0, 1]");
}

TagGraph generate_sbm(const SbmSpec& spec) {
    spec.validate();
    const int n = spec.num_nodes;
    const int k = spec.num_classes;

    // Contiguous near-equal blocks: node v belongs to class v*k/n.
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
        labels[static_cast<std::size_t>(v)] = static_cast<int>((static_cast<long long>(v) * k) / n);

    auto edge_rng = make_rng(derive_stream(spec.seed, {streams::kSbm, 1}));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const double p = labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)]
                                 ? spec.p_in
                                 : spec.p_out;
            if (uniform(edge_rng) < p) edges.emplace_back(u, v);
        }

    auto feat_rng = make_rng(derive_stream(spec.seed, {streams::kSbm, 2}));
    std::normal_distribution<double> noise(0.0, spec.sigma);
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(n, spec.feature_dim);
    for (int v = 0; v < n; ++v) {
        features(v, labels[static_cast<std::size_t>(v)] % spec.feature_dim) = spec.mu_sep;
        for (int j = 0; j < spec.feature_dim; ++j) features(v, j) += noise(feat_rng);
    }

    auto split_rng = make_rng(derive_stream(spec.seed, {streams::kSbm, 3}));
    std::vector<std::uint8_t> train(static_cast<std::size_t>(n), 0), test(static_cast<std::size_t>(n), 0);
    for (int cls = 0; cls < k; ++cls) {
        std::vector<NodeId> block;
        for (int v = 0; v < n; ++v)
            if (labels[static_cast<std::size_t>(v)] == cls) block.push_back(v);
        std::shuffle(block.begin(), block.end(), split_rng);
        const int n_train = std::min(ceil_count(spec.train_fraction, static_cast<int>(block.size())),
                                     static_cast<int>(block.size()));
        for (std::size_t i = 0; i < block.size(); ++i)
            (static_cast<int>(i) < n_train ? train : test)[static_cast<std::size_t>(block[i])] = 1;
    }

    return TagGraph(k, std::move(features), std::move(labels), std::move(edges), std::move(train),
                    std::move(test));
}

}  // namespace graphtextack
