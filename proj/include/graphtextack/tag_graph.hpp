#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace graphtextack {

using NodeId = int;

// Undirected attributed graph with class labels and train/test masks.
// Value type: poisoning never mutates an existing graph, it produces a copy
// with one extra node (see with_injected_node).
class TagGraph {
public:
    static constexpr int kUnlabeled = -1;

    // Validates everything up front: dense ids, in-range endpoints, no
    // self-loops or duplicate edges, labels in [0, num_classes), masks
    // disjoint. Throws std::invalid_argument with an offending index.
    TagGraph(int num_classes,
             Eigen::MatrixXd features,
             std::vector<int> labels,
             std::vector<std::pair<NodeId, NodeId>> edges,
             std::vector<std::uint8_t> train_mask,
             std::vector<std::uint8_t> test_mask);

    int num_nodes() const { return static_cast<int>(labels_.size()); }
    int num_classes() const { return num_classes_; }
    int feature_dim() const { return static_cast<int>(features_.cols()); }
    std::size_t num_edges() const { return edges_.size(); }

    const Eigen::MatrixXd& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }
    int label(NodeId v) const { return labels_[static_cast<std::size_t>(v)]; }
    bool is_train(NodeId v) const { return train_mask_[static_cast<std::size_t>(v)] != 0; }
    bool is_test(NodeId v) const { return test_mask_[static_cast<std::size_t>(v)] != 0; }
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

    const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)]; }
    int degree(NodeId v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }

    std::vector<NodeId> train_nodes() const;
    std::vector<NodeId> test_nodes() const;

    // Content hash covering features, labels, masks and edges. Used as the
    // prediction-cache key; updated incrementally on injection so repeated
    // queries against the same poisoned graph hit the cache.
    std::uint64_t fingerprint() const { return fingerprint_; }

    // Returns (copy with one appended node, its id). The new node carries the
    // given feature row and label, connects to `endpoints`, and is marked as
    // a train node: poisoned samples must enter the victim's training set.
    // Endpoints must be non-empty, distinct and refer to existing nodes.
    std::pair<TagGraph, NodeId> with_injected_node(const Eigen::VectorXd& feature_row,
                                                   int label,
                                                   const std::vector<NodeId>& endpoints) const;

    // All nodes within undirected distance <= 2 of v, excluding v itself.
    // Sorted ascending.
    std::vector<NodeId> two_hop_neighborhood(NodeId v) const;

private:
    int num_classes_;
    Eigen::MatrixXd features_;
    std::vector<int> labels_;
    std::vector<std::pair<NodeId, NodeId>> edges_;  // normalized u < v
    std::vector<std::uint8_t> train_mask_;
    std::vector<std::uint8_t> test_mask_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::uint64_t fingerprint_ = 0;

    std::uint64_t compute_fingerprint() const;
};

struct PageRankResult {
    std::vector<double> scores;  // non-negative, sums to 1 within tolerance
    double damping = 0.85;
    double tol = 1e-8;
    int iterations = 0;  // iterations actually performed
    bool converged = false;
};

// Power iteration with uniform redistribution of dangling mass; undirected
// edges act as a directed pair. Stops when the L1 change drops below tol.
PageRankResult pagerank(const TagGraph& g, double damping = 0.85, double tol = 1e-8,
                        int max_iter = 200);

// ceil(fraction * total) robust against the binary representation of decimal
// fractions (0.05 * 300 must give 15, not 16). Used for injection budgets and
// train-split sizes.
int ceil_count(double fraction, int total);

// Empirical degree distribution of a graph; sampling draws a uniformly random
// node's degree and clamps it into [1, d_max].
class DegreeDistribution {
public:
    explicit DegreeDistribution(const TagGraph& g);
    int sample(std::mt19937_64& rng, int d_max) const;
    const std::vector<int>& degrees() const { return degrees_; }

private:
    std::vector<int> degrees_;  // one entry per node
};

}  // namespace graphtextack
