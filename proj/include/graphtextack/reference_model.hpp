#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

enum class Aggregation { kSymmetric, kMean };

std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

// A + I with degree normalization. kSymmetric: D^-1/2 (A+I) D^-1/2.
// kMean: D^-1 (A+I), i.e. each row averages the node and its neighbors.
Eigen::SparseMatrix<double> normalized_adjacency(const TagGraph& g, Aggregation mode);

struct TrainConfig {
    int hidden_dim = 16;
    double learning_rate = 0.05;
    int epochs = 200;
    std::uint64_t seed = 0;
    Aggregation aggregation = Aggregation::kSymmetric;

    void validate() const;
};

// Query surface the attack is allowed to touch. Every distinct graph
// prediction costs one query; repeated queries on an identical graph are
// served from a small cache and do not increment the counter.
class BlackBoxModel {
public:
    virtual ~BlackBoxModel() = default;

    // Row-stochastic class probabilities, one row per node of g.
    Eigen::MatrixXd predict(const TagGraph& g);

    std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }

protected:
    virtual Eigen::MatrixXd predict_fresh(const TagGraph& g) const = 0;

private:
    static constexpr std::size_t kCacheCapacity = 128;

    std::atomic<std::uint64_t> queries_{0};
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, Eigen::MatrixXd> cache_;
    std::deque<std::uint64_t> cache_order_;  // FIFO eviction
};

// Two-layer graph convolution: softmax(A_hat * relu(A_hat * X * W1 + b1) * W2 + b2),
// trained full batch with gradient descent on cross-entropy over train nodes.
class ReferenceModel final : public BlackBoxModel {
public:
    ReferenceModel(TrainConfig config, int input_dim, int num_classes,
                   Eigen::MatrixXd w1, Eigen::VectorXd b1,
                   Eigen::MatrixXd w2, Eigen::VectorXd b2);

    const TrainConfig& config() const { return config_; }
    int input_dim() const { return static_cast<int>(w1_.rows()); }
    int num_classes() const { return static_cast<int>(w2_.cols()); }

    std::string to_checkpoint_json() const;
    static ReferenceModel from_checkpoint_json(const std::string& text);
    void save_checkpoint(const std::filesystem::path& path) const;
    static ReferenceModel load_checkpoint(const std::filesystem::path& path);

protected:
    Eigen::MatrixXd predict_fresh(const TagGraph& g) const override;

private:
    TrainConfig config_;
    Eigen::MatrixXd w1_, w2_;
    Eigen::VectorXd b1_, b2_;
};

// Full-batch training from a deterministic seed. Throws if the graph has no
// train nodes.
ReferenceModel train_reference_model(const TagGraph& g, const TrainConfig& config);

// One training step's view: mean cross-entropy over the train mask and its
// analytic gradients at the given weights. train_reference_model applies
// exactly these gradients; exposed so a finite-difference check can certify
// the backward pass.
struct TrainStep {
    double loss = 0.0;
    Eigen::MatrixXd grad_w1, grad_w2;
    Eigen::VectorXd grad_b1, grad_b2;
};

TrainStep training_step(const TagGraph& g, Aggregation aggregation, const Eigen::MatrixXd& w1,
                        const Eigen::VectorXd& b1, const Eigen::MatrixXd& w2,
                        const Eigen::VectorXd& b2);

double training_loss(const TagGraph& g, Aggregation aggregation, const Eigen::MatrixXd& w1,
                     const Eigen::VectorXd& b1, const Eigen::MatrixXd& w2,
                     const Eigen::VectorXd& b2);

// Mean cross-entropy of the model's predictions over the given nodes
// (used by the finite-difference gradient check).
double cross_entropy(const Eigen::MatrixXd& probs, const TagGraph& g, const std::vector<NodeId>& nodes);

// Fraction of `nodes` whose argmax prediction matches the label. Throws on an
// empty node list or an unlabeled node.
double accuracy(BlackBoxModel& model, const TagGraph& g, const std::vector<NodeId>& nodes);

// Per-node max class probability ("confidence") for an already computed
// prediction matrix.
std::vector<double> max_confidence(const Eigen::MatrixXd& probs);

}  // namespace graphtextack
