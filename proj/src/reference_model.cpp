#include "graphtextack/reference_model.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "graphtextack/rng.hpp"

namespace graphtextack {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Aggregation a) {
    return a == Aggregation::kSymmetric ? "symmetric" : "mean";
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "symmetric") return Aggregation::kSymmetric;
    if (s == "mean") return Aggregation::kMean;
    throw std::invalid_argument("unknown aggregation '" + s + "' (expected symmetric|mean)");
}

void TrainConfig::validate() const {
    if (hidden_dim <= 0) throw std::invalid_argument("hidden_dim must be positive");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
    if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
}

Eigen::SparseMatrix<double> normalized_adjacency(const TagGraph& g, Aggregation mode) {
    const int n = g.num_nodes();
    std::vector<double> inv(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        const double d = g.degree(v) + 1.0;  // self-loop added below
        inv[static_cast<std::size_t>(v)] = mode == Aggregation::kSymmetric ? 1.0 / std::sqrt(d) : 1.0 / d;
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * g.num_edges() + static_cast<std::size_t>(n));
    auto weight = [&](NodeId row, NodeId col) {
        return mode == Aggregation::kSymmetric
                   ? inv[static_cast<std::size_t>(row)] * inv[static_cast<std::size_t>(col)]
                   : inv[static_cast<std::size_t>(row)];
    };
    for (NodeId v = 0; v < n; ++v) trips.emplace_back(v, v, weight(v, v));
    for (const auto& [u, v] : g.edges()) {
        trips.emplace_back(u, v, weight(u, v));
        trips.emplace_back(v, u, weight(v, u));
    }

    Eigen::SparseMatrix<double> ahat(n, n);
    ahat.setFromTriplets(trips.begin(), trips.end());
    return ahat;
}

namespace {

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - m).exp();
        z.row(i) /= z.row(i).sum();
    }
    return z;
}

Eigen::MatrixXd forward(const Eigen::SparseMatrix<double>& ahat, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1,
                        const Eigen::MatrixXd& w2, const Eigen::VectorXd& b2) {
    Eigen::MatrixXd z1 = (ahat * x) * w1;
    z1.rowwise() += b1.transpose();
    const Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = (ahat * h1) * w2;
    z2.rowwise() += b2.transpose();
    return softmax_rows(std::move(z2));
}

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* name) {
    if (!rows.is_array() || rows.empty()) throw std::runtime_error(std::string("checkpoint: bad ") + name);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(m.cols()))
            throw std::runtime_error(std::string("checkpoint: ragged ") + name);
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
    return m;
}

}  // namespace

Eigen::MatrixXd BlackBoxModel::predict(const TagGraph& g) {
    const std::uint64_t key = g.fingerprint();
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    Eigen::MatrixXd probs = predict_fresh(g);
    queries_.fetch_add(1, std::memory_order_relaxed);
    cache_.emplace(key, probs);
    cache_order_.push_back(key);
    if (cache_order_.size() > kCacheCapacity) {
        cache_.erase(cache_order_.front());
        cache_order_.pop_front();
    }
    return probs;
}

ReferenceModel::ReferenceModel(TrainConfig config, int input_dim, int num_classes,
                               Eigen::MatrixXd w1, Eigen::VectorXd b1,
                               Eigen::MatrixXd w2, Eigen::VectorXd b2)
    : config_(config), w1_(std::move(w1)), w2_(std::move(w2)), b1_(std::move(b1)), b2_(std::move(b2)) {
    config_.validate();
    if (w1_.rows() != input_dim || w1_.cols() != config_.hidden_dim ||
        w2_.rows() != config_.hidden_dim || w2_.cols() != num_classes ||
        b1_.size() != config_.hidden_dim || b2_.size() != num_classes)
        throw std::invalid_argument("model weight shapes inconsistent with dimensions");
}

Eigen::MatrixXd ReferenceModel::predict_fresh(const TagGraph& g) const {
    if (g.feature_dim() != input_dim())
        throw std::invalid_argument("graph feature dim " + std::to_string(g.feature_dim()) +
                                    " does not match model input dim " + std::to_string(input_dim()));
    const auto ahat = normalized_adjacency(g, config_.aggregation);
    return forward(ahat, g.features(), w1_, b1_, w2_, b2_);
}

TrainStep training_step(const TagGraph& g, Aggregation aggregation, const Eigen::MatrixXd& w1,
                        const Eigen::VectorXd& b1, const Eigen::MatrixXd& w2,
                        const Eigen::VectorXd& b2) {
    const auto train = g.train_nodes();
    if (train.empty()) throw std::invalid_argument("training requires at least one train node");
    const double m = static_cast<double>(train.size());

    const auto ahat = normalized_adjacency(g, aggregation);
    const Eigen::MatrixXd ax = ahat * g.features();
    Eigen::MatrixXd z1 = ax * w1;
    z1.rowwise() += b1.transpose();
    const Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
    const Eigen::MatrixXd ah1 = ahat * h1;
    Eigen::MatrixXd z2 = ah1 * w2;
    z2.rowwise() += b2.transpose();
    const Eigen::MatrixXd probs = softmax_rows(std::move(z2));

    TrainStep step;
    step.loss = cross_entropy(probs, g, train);

    // dL/dz2 of mean cross-entropy over the train mask; zero elsewhere.
    Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(g.num_nodes(), w2.cols());
    for (NodeId v : train) {
        g2.row(v) = probs.row(v) / m;
        g2(v, g.label(v)) -= 1.0 / m;
    }

    step.grad_w2 = ah1.transpose() * g2;
    step.grad_b2 = g2.colwise().sum();
    Eigen::MatrixXd g1 = ahat.transpose() * (g2 * w2.transpose());
    g1 = (z1.array() > 0.0).select(g1, 0.0);  // relu mask
    step.grad_w1 = ax.transpose() * g1;
    step.grad_b1 = g1.colwise().sum();
    return step;
}

double training_loss(const TagGraph& g, Aggregation aggregation, const Eigen::MatrixXd& w1,
                     const Eigen::VectorXd& b1, const Eigen::MatrixXd& w2,
                     const Eigen::VectorXd& b2) {
    const auto ahat = normalized_adjacency(g, aggregation);
    return cross_entropy(forward(ahat, g.features(), w1, b1, w2, b2), g, g.train_nodes());
}

ReferenceModel train_reference_model(const TagGraph& g, const TrainConfig& config) {
    config.validate();
    const auto train = g.train_nodes();
    if (train.empty()) throw std::invalid_argument("training requires at least one train node");
    std::vector<char> covered(static_cast<std::size_t>(g.num_classes()), 0);
    for (NodeId v : train) covered[static_cast<std::size_t>(g.label(v))] = 1;
    for (int cls = 0; cls < g.num_classes(); ++cls)
        if (!covered[static_cast<std::size_t>(cls)])
            throw std::invalid_argument("class " + std::to_string(cls) +
                                        " has no training node");

    const int d = g.feature_dim();
    const int c = g.num_classes();

    auto rng = make_rng(derive_stream(config.seed, {streams::kInit}));
    Eigen::MatrixXd w1 = glorot(d, config.hidden_dim, rng);
    Eigen::MatrixXd w2 = glorot(config.hidden_dim, c, rng);
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(config.hidden_dim);
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(c);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const TrainStep step = training_step(g, config.aggregation, w1, b1, w2, b2);
        w1 -= config.learning_rate * step.grad_w1;
        b1 -= config.learning_rate * step.grad_b1;
        w2 -= config.learning_rate * step.grad_w2;
        b2 -= config.learning_rate * step.grad_b2;
    }

    return ReferenceModel(config, d, c, std::move(w1), std::move(b1), std::move(w2), std::move(b2));
}

std::string ReferenceModel::to_checkpoint_json() const {
    ordered_json doc;
    doc["hidden_dim"] = config_.hidden_dim;
    doc["learning_rate"] = config_.learning_rate;
    doc["epochs"] = config_.epochs;
    doc["seed"] = config_.seed;
    doc["aggregation"] = to_string(config_.aggregation);
    doc["input_dim"] = input_dim();
    doc["num_classes"] = num_classes();
    doc["w1"] = matrix_to_json(w1_);
    doc["b1"] = matrix_to_json(b1_);
    doc["w2"] = matrix_to_json(w2_);
    doc["b2"] = matrix_to_json(b2_);
    return doc.dump(2);
}

ReferenceModel ReferenceModel::from_checkpoint_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("checkpoint: parse error: ") + e.what());
    }
    for (const char* key :
         {"hidden_dim", "learning_rate", "epochs", "seed", "aggregation", "input_dim", "num_classes",
          "w1", "b1", "w2", "b2"})
        if (!doc.contains(key)) throw std::runtime_error(std::string("checkpoint: missing key '") + key + "'");

    TrainConfig cfg;
    cfg.hidden_dim = doc["hidden_dim"].get<int>();
    cfg.learning_rate = doc["learning_rate"].get<double>();
    cfg.epochs = doc["epochs"].get<int>();
    cfg.seed = doc["seed"].get<std::uint64_t>();
    cfg.aggregation = aggregation_from_string(doc["aggregation"].get<std::string>());

    return ReferenceModel(cfg, doc["input_dim"].get<int>(), doc["num_classes"].get<int>(),
                          matrix_from_json(doc["w1"], "w1"), matrix_from_json(doc["b1"], "b1"),
                          matrix_from_json(doc["w2"], "w2"), matrix_from_json(doc["b2"], "b2"));
}

void ReferenceModel::save_checkpoint(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << to_checkpoint_json() << '\n';
}

ReferenceModel ReferenceModel::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_checkpoint_json(text);
}

double cross_entropy(const Eigen::MatrixXd& probs, const TagGraph& g, const std::vector<NodeId>& nodes) {
    if (nodes.empty()) throw std::invalid_argument("cross_entropy over empty node list");
    double loss = 0.0;
    for (NodeId v : nodes) {
        if (g.label(v) == TagGraph::kUnlabeled)
            throw std::invalid_argument("cross_entropy: node " + std::to_string(v) + " is unlabeled");
        loss -= std::log(std::max(probs(v, g.label(v)), 1e-300));
    }
    return loss / static_cast<double>(nodes.size());
}

double accuracy(BlackBoxModel& model, const TagGraph& g, const std::vector<NodeId>& nodes) {
    if (nodes.empty()) throw std::invalid_argument("accuracy over empty node list");
    const Eigen::MatrixXd probs = model.predict(g);
    int hits = 0;
    for (NodeId v : nodes) {
        if (g.label(v) == TagGraph::kUnlabeled)
            throw std::invalid_argument("accuracy: node " + std::to_string(v) + " is unlabeled");
        Eigen::Index pred;
        probs.row(v).maxCoeff(&pred);  // tie -> lowest class index
        hits += static_cast<int>(pred) == g.label(v);
    }
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

std::vector<double> max_confidence(const Eigen::MatrixXd& probs) {
    std::vector<double> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) out[static_cast<std::size_t>(i)] = probs.row(i).maxCoeff();
    return out;
}

}  // namespace graphtextack
