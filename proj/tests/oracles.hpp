// Independent reference implementations used to cross-check the library.
// Everything here is deliberately naive: dense arrays, plain loops, no
// shortcuts shared with the code under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "graphtextack/reference_model.hpp"
#include "graphtextack/tag_graph.hpp"

namespace oracles {

using graphtextack::NodeId;
using graphtextack::TagGraph;

// Dense power iteration with the same damping/dangling/stopping conventions
// as the production routine, written against an adjacency matrix.
inline std::vector<double> dense_pagerank(const TagGraph& g, double damping = 0.85,
                                          double tol = 1e-8, int max_iter = 200) {
    const int n = g.num_nodes();
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : g.edges()) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    std::vector<double> x(n, 1.0 / n), next(n, 0.0);
    for (int it = 0; it < max_iter; ++it) {
        double dangling = 0.0;
        for (int v = 0; v < n; ++v)
            if (adj[v].empty()) dangling += x[v];
        for (int v = 0; v < n; ++v) next[v] = (1.0 - damping) / n + damping * dangling / n;
        for (int v = 0; v < n; ++v) {
            if (adj[v].empty()) continue;
            const double share = damping * x[v] / static_cast<double>(adj[v].size());
            for (int u : adj[v]) next[u] += share;
        }
        double delta = 0.0;
        for (int v = 0; v < n; ++v) delta += std::abs(next[v] - x[v]);
        x = next;
        if (delta < tol) break;
    }
    return x;
}

// Plain BFS truncated at `depth` hops; returns sorted reachable set minus the root.
inline std::vector<NodeId> bfs_neighborhood(const TagGraph& g, NodeId root, int depth) {
    std::vector<int> dist(g.num_nodes(), -1);
    std::queue<NodeId> q;
    dist[root] = 0;
    q.push(root);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        if (dist[v] == depth) continue;
        for (NodeId u : g.neighbors(v)) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
        }
    }
    std::vector<NodeId> out;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (v != root && dist[v] > 0) out.push_back(v);
    return out;
}

// Distance from `root` to every node, -1 if unreachable. Used by the locality tests.
inline std::vector<int> bfs_distances(const TagGraph& g, NodeId root) {
    std::vector<int> dist(g.num_nodes(), -1);
    std::queue<NodeId> q;
    dist[root] = 0;
    q.push(root);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        for (NodeId u : g.neighbors(v)) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
        }
    }
    return dist;
}

// G(n, p) with standard-normal features, labels striped over classes, and a
// deterministic train/test split (v%3==0 train, v%3==1 test). The first
// num_classes nodes are always train so every class has a donor/training node.
inline TagGraph random_graph(int n, double p_edge, int num_classes, int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd feats(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) feats(i, j) = gauss(rng);
    std::vector<int> labels(n);
    std::vector<uint8_t> train(n, 0), test(n, 0);
    for (int v = 0; v < n; ++v) {
        labels[v] = v % num_classes;
        if (v % 3 == 0 || v < num_classes) {
            train[v] = 1;
        } else if (v % 3 == 1) {
            test[v] = 1;
        }
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (unif(rng) < p_edge) edges.emplace_back(u, v);
    return TagGraph(num_classes, feats, labels, edges, train, test);
}

inline TagGraph path_graph(int n, int num_classes = 2) {
    Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(n, 1);
    std::vector<int> labels(n);
    std::vector<uint8_t> train(n, 1), test(n, 0);
    for (int v = 0; v < n; ++v) labels[v] = v % num_classes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return TagGraph(num_classes, feats, labels, edges, train, test);
}

// Node 0 is the hub, 1..k are leaves.
inline TagGraph star_graph(int leaves, int num_classes = 2) {
    const int n = leaves + 1;
    Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(n, 1);
    std::vector<int> labels(n);
    std::vector<uint8_t> train(n, 1), test(n, 0);
    for (int v = 0; v < n; ++v) labels[v] = v % num_classes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
    return TagGraph(num_classes, feats, labels, edges, train, test);
}

inline TagGraph ring_graph(int n, int num_classes = 2) {
    Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(n, 1);
    std::vector<int> labels(n);
    std::vector<uint8_t> train(n, 1), test(n, 0);
    for (int v = 0; v < n; ++v) labels[v] = v % num_classes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int v = 0; v < n; ++v) edges.emplace_back(std::min(v, (v + 1) % n), std::max(v, (v + 1) % n));
    std::sort(edges.begin(), edges.end());
    return TagGraph(num_classes, feats, labels, edges, train, test);
}

// Two disjoint cliques with well-separated Gaussian features, half of each
// clique marked train. Easy enough that a trained classifier should be exact.
inline TagGraph two_clique_graph(int per_clique = 10, int dim = 4, uint64_t seed = 9) {
    const int n = 2 * per_clique;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.1);
    Eigen::MatrixXd feats(n, dim);
    std::vector<int> labels(n);
    std::vector<uint8_t> train(n, 0), test(n, 0);
    for (int v = 0; v < n; ++v) {
        const int cls = v < per_clique ? 0 : 1;
        labels[v] = cls;
        for (int j = 0; j < dim; ++j) feats(v, j) = (j == cls ? 3.0 : 0.0) + gauss(rng);
        if (v % 2 == 0)
            train[v] = 1;
        else
            test[v] = 1;
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int block = 0; block < 2; ++block) {
        const int lo = block * per_clique, hi = lo + per_clique;
        for (int u = lo; u < hi; ++u)
            for (int v = u + 1; v < hi; ++v) edges.emplace_back(u, v);
    }
    return TagGraph(2, feats, labels, edges, train, test);
}

// Black-box stub returning the uniform distribution for every node. Keeps
// prediction shift at exactly zero so structural terms can be isolated.
class UniformModel : public graphtextack::BlackBoxModel {
  public:
    explicit UniformModel(int num_classes) : k_(num_classes) {}

  protected:
    Eigen::MatrixXd predict_fresh(const TagGraph& g) const override {
        return Eigen::MatrixXd::Constant(g.num_nodes(), k_, 1.0 / k_);
    }

  private:
    int k_;
};

// Black-box stub with a fixed per-node max confidence, padded with uniform
// mass elsewhere. Lets shift tests dictate exact before/after confidences.
class ScriptedModel : public graphtextack::BlackBoxModel {
  public:
    ScriptedModel(std::vector<double> conf, int num_classes) : conf_(std::move(conf)), k_(num_classes) {}

  protected:
    Eigen::MatrixXd predict_fresh(const TagGraph& g) const override {
        Eigen::MatrixXd out(g.num_nodes(), k_);
        for (int v = 0; v < g.num_nodes(); ++v) {
            const double c = v < static_cast<int>(conf_.size()) ? conf_[v] : 1.0 / k_;
            for (int j = 0; j < k_; ++j) out(v, j) = (1.0 - c) / (k_ - 1);
            out(v, 0) = c;
        }
        return out;
    }

  private:
    std::vector<double> conf_;
    int k_;
};

}  // namespace oracles
