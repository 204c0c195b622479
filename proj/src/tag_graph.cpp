#include "graphtextack/tag_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "graphtextack/rng.hpp"

namespace graphtextack {

namespace {

std::uint64_t hash_double(std::uint64_t h, double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    return hash_combine(h, bits);
}

std::uint64_t hash_row(std::uint64_t h, const Eigen::MatrixXd& m, Eigen::Index row) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) h = hash_double(h, m(row, j));
    return h;
}

}  // namespace

TagGraph::TagGraph(int num_classes,
                   Eigen::MatrixXd features,
                   std::vector<int> labels,
                   std::vector<std::pair<NodeId, NodeId>> edges,
                   std::vector<std::uint8_t> train_mask,
                   std::vector<std::uint8_t> test_mask)
    : num_classes_(num_classes),
      features_(std::move(features)),
      labels_(std::move(labels)),
      edges_(std::move(edges)),
      train_mask_(std::move(train_mask)),
      test_mask_(std::move(test_mask)) {
    const auto n = labels_.size();
    if (num_classes_ <= 0) throw std::invalid_argument("num_classes must be positive");
    if (static_cast<std::size_t>(features_.rows()) != n)
        throw std::invalid_argument("feature matrix has " + std::to_string(features_.rows()) +
                                    " rows but graph has " + std::to_string(n) + " nodes");
    if (train_mask_.size() != n || test_mask_.size() != n)
        throw std::invalid_argument("mask length does not match node count");

    for (std::size_t v = 0; v < n; ++v) {
        const int y = labels_[v];
        if (y != kUnlabeled && (y < 0 || y >= num_classes_))
            throw std::invalid_argument("node " + std::to_string(v) + " has label " +
                                        std::to_string(y) + " outside [0, " +
                                        std::to_string(num_classes_) + ")");
        if (train_mask_[v] && test_mask_[v])
            throw std::invalid_argument("node " + std::to_string(v) + " is in both train and test masks");
        if (train_mask_[v] && y == kUnlabeled)
            throw std::invalid_argument("train node " + std::to_string(v) + " has no label");
    }

    adjacency_.assign(n, {});
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        auto& [u, v] = edges_[i];
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
            throw std::invalid_argument("edge " + std::to_string(i) + " references a node outside [0, " +
                                        std::to_string(n) + ")");
        if (u == v) throw std::invalid_argument("edge " + std::to_string(i) + " is a self-loop");
        if (u > v) std::swap(u, v);
        const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
        if (!seen.insert(key).second)
            throw std::invalid_argument("edge " + std::to_string(i) + " (" + std::to_string(u) + "," +
                                        std::to_string(v) + ") is a duplicate");
        adjacency_[static_cast<std::size_t>(u)].push_back(v);
        adjacency_[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

    fingerprint_ = compute_fingerprint();
}

std::uint64_t TagGraph::compute_fingerprint() const {
    std::uint64_t h = mix64(0x7a67u);
    h = hash_combine(h, static_cast<std::uint64_t>(num_classes_));
    h = hash_combine(h, static_cast<std::uint64_t>(num_nodes()));
    h = hash_combine(h, static_cast<std::uint64_t>(feature_dim()));
    for (Eigen::Index i = 0; i < features_.rows(); ++i) h = hash_row(h, features_, i);
    for (std::size_t v = 0; v < labels_.size(); ++v) {
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(labels_[v])));
        h = hash_combine(h, (static_cast<std::uint64_t>(train_mask_[v]) << 1) | test_mask_[v]);
    }
    for (const auto& [u, v] : edges_)
        h = hash_combine(h, (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v));
    return h;
}

std::vector<NodeId> TagGraph::train_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < num_nodes(); ++v)
        if (train_mask_[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

std::vector<NodeId> TagGraph::test_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < num_nodes(); ++v)
        if (test_mask_[static_cast<std::size_t>(v)]) out.push_back(v);
    return out;
}

std::pair<TagGraph, NodeId> TagGraph::with_injected_node(const Eigen::VectorXd& feature_row,
                                                         int label,
                                                         const std::vector<NodeId>& endpoints) const {
    if (feature_row.size() != features_.cols())
        throw std::invalid_argument("injected feature row has wrong dimension");
    if (label < 0 || label >= num_classes_)
        throw std::invalid_argument("injected label outside [0, num_classes)");
    if (endpoints.empty()) throw std::invalid_argument("injected node needs at least one endpoint");
    std::unordered_set<NodeId> uniq;
    for (NodeId u : endpoints) {
        if (u < 0 || u >= num_nodes())
            throw std::invalid_argument("injection endpoint " + std::to_string(u) + " does not exist");
        if (!uniq.insert(u).second)
            throw std::invalid_argument("injection endpoint " + std::to_string(u) + " repeated");
    }

    TagGraph out(*this);  // original stays untouched
    const NodeId vp = out.num_nodes();

    out.features_.conservativeResize(vp + 1, Eigen::NoChange);
    out.features_.row(vp) = feature_row.transpose();
    out.labels_.push_back(label);
    out.train_mask_.push_back(1);
    out.test_mask_.push_back(0);
    out.adjacency_.emplace_back();
    for (NodeId u : endpoints) {
        out.edges_.emplace_back(u, vp);  // u < vp always
        out.adjacency_[static_cast<std::size_t>(u)].push_back(vp);
        out.adjacency_[static_cast<std::size_t>(vp)].push_back(u);
    }
    std::sort(out.adjacency_[static_cast<std::size_t>(vp)].begin(),
              out.adjacency_[static_cast<std::size_t>(vp)].end());

    // Incremental fingerprint: chain the delta onto the parent hash instead
    // of rehashing the whole graph per candidate evaluation.
    std::uint64_t h = hash_combine(fingerprint_, 0x696e6au);
    h = hash_row(h, out.features_, vp);
    h = hash_combine(h, static_cast<std::uint64_t>(label));
    for (NodeId u : out.adjacency_[static_cast<std::size_t>(vp)])
        h = hash_combine(h, static_cast<std::uint64_t>(u));
    out.fingerprint_ = h;

    return {std::move(out), vp};
}

std::vector<NodeId> TagGraph::two_hop_neighborhood(NodeId v) const {
    if (v < 0 || v >= num_nodes()) throw std::invalid_argument("two_hop_neighborhood: bad node id");
    std::vector<NodeId> out;
    std::unordered_set<NodeId> seen{v};
    for (NodeId u : neighbors(v)) {
        if (seen.insert(u).second) out.push_back(u);
    }
    const std::size_t first_ring = out.size();
    for (std::size_t i = 0; i < first_ring; ++i) {
        for (NodeId w : neighbors(out[i])) {
            if (seen.insert(w).second) out.push_back(w);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PageRankResult pagerank(const TagGraph& g, double damping, double tol, int max_iter) {
    if (!(damping > 0.0 && damping < 1.0))
        throw std::invalid_argument("pagerank damping must be in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("pagerank tol must be > 0");
    if (max_iter <= 0) throw std::invalid_argument("pagerank max_iter must be positive");
    const int n = g.num_nodes();
    if (n == 0) throw std::invalid_argument("pagerank on empty graph");

    PageRankResult res;
    res.damping = damping;
    res.tol = tol;
    std::vector<double> x(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int it = 1; it <= max_iter; ++it) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (g.degree(v) == 0) dangling += x[static_cast<std::size_t>(v)];

        const double base = (1.0 - damping) / n + damping * dangling / n;
        std::fill(next.begin(), next.end(), base);
        for (NodeId v = 0; v < n; ++v) {
            const double share = damping * x[static_cast<std::size_t>(v)] / std::max(1, g.degree(v));
            for (NodeId u : g.neighbors(v)) next[static_cast<std::size_t>(u)] += share;
        }

        double delta = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) delta += std::abs(next[i] - x[i]);
        x.swap(next);
        res.iterations = it;
        if (delta < tol) {
            res.converged = true;
            break;
        }
    }
    res.scores = std::move(x);
    return res;
}

int ceil_count(double fraction, int total) {
    if (!std::isfinite(fraction) || fraction < 0.0)
        throw std::invalid_argument("fraction must be finite and >= 0");
    const double x = fraction * static_cast<double>(total);
    return static_cast<int>(std::ceil(x * (1.0 - 1e-12) - 1e-12));
}

DegreeDistribution::DegreeDistribution(const TagGraph& g) {
    degrees_.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (NodeId v = 0; v < g.num_nodes(); ++v) degrees_.push_back(g.degree(v));
    if (degrees_.empty()) throw std::invalid_argument("degree distribution of empty graph");
}

int DegreeDistribution::sample(std::mt19937_64& rng, int d_max) const {
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    std::uniform_int_distribution<std::size_t> pick(0, degrees_.size() - 1);
    return std::clamp(degrees_[pick(rng)], 1, d_max);
}

}  // namespace graphtextack
