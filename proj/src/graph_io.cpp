#include "graphtextack/graph_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace graphtextack {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("graph json: " + what); }

}  // namespace

TagGraph graph_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("parse error: ") + e.what());
    }
    if (!doc.is_object()) fail("top level is not an object");
    for (const char* key : {"num_classes", "nodes", "edges"})
        if (!doc.contains(key)) fail(std::string("missing key '") + key + "'");
    if (!doc["num_classes"].is_number_integer()) fail("'num_classes' is not an integer");
    if (!doc["nodes"].is_array() || doc["nodes"].empty()) fail("'nodes' is not a non-empty array");
    if (!doc["edges"].is_array()) fail("'edges' is not an array");

    const int num_classes = doc["num_classes"].get<int>();
    const std::size_t n = doc["nodes"].size();

    Eigen::MatrixXd features;
    std::vector<int> labels(n, TagGraph::kUnlabeled);
    std::vector<std::uint8_t> train(n, 0), test(n, 0);
    Eigen::Index dim = -1;

    for (std::size_t i = 0; i < n; ++i) {
        const json& nd = doc["nodes"][i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (!nd.is_object()) fail(where + " is not an object");
        for (const char* key : {"id", "label", "features", "train", "test"})
            if (!nd.contains(key)) fail(where + " missing key '" + key + "'");
        if (!nd["id"].is_number_integer()) fail(where + ".id is not an integer");
        const long long id = nd["id"].get<long long>();
        if (id != static_cast<long long>(i))
            fail(where + ".id=" + std::to_string(id) + " out of order (ids must be dense 0.." +
                 std::to_string(n - 1) + " in order)");

        if (!nd["features"].is_array()) fail(where + ".features is not an array");
        const auto& feats = nd["features"];
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(feats.size());
            if (dim == 0) fail(where + ".features is empty");
            features.resize(static_cast<Eigen::Index>(n), dim);
        } else if (static_cast<Eigen::Index>(feats.size()) != dim) {
            fail(where + ".features has length " + std::to_string(feats.size()) + ", expected " +
                 std::to_string(dim));
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            const json& x = feats[static_cast<std::size_t>(j)];
            if (!x.is_number()) fail(where + ".features[" + std::to_string(j) + "] is not a number");
            features(static_cast<Eigen::Index>(id), j) = x.get<double>();
        }

        if (nd["label"].is_null()) {
            labels[static_cast<std::size_t>(id)] = TagGraph::kUnlabeled;
        } else if (nd["label"].is_number_integer()) {
            labels[static_cast<std::size_t>(id)] = nd["label"].get<int>();
        } else {
            fail(where + ".label is neither an integer nor null");
        }
        if (!nd["train"].is_boolean() || !nd["test"].is_boolean())
            fail(where + ".train/.test must be booleans");
        train[static_cast<std::size_t>(id)] = nd["train"].get<bool>() ? 1 : 0;
        test[static_cast<std::size_t>(id)] = nd["test"].get<bool>() ? 1 : 0;
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(doc["edges"].size());
    for (std::size_t i = 0; i < doc["edges"].size(); ++i) {
        const json& e = doc["edges"][i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            fail(where + " is not a pair of integers");
        const long long u = e[0].get<long long>(), v = e[1].get<long long>();
        if (u >= v) fail(where + " violates u < v ordering");
        if (u < 0 || static_cast<std::size_t>(v) >= n) fail(where + " references a missing node");
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }

    try {
        return TagGraph(num_classes, std::move(features), std::move(labels), std::move(edges),
                        std::move(train), std::move(test));
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

std::string graph_to_json(const TagGraph& g) {
    ordered_json doc;
    doc["num_classes"] = g.num_classes();
    doc["nodes"] = ordered_json::array();
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        ordered_json nd;
        nd["id"] = v;
        if (g.label(v) == TagGraph::kUnlabeled)
            nd["label"] = nullptr;
        else
            nd["label"] = g.label(v);
        std::vector<double> row(g.features().row(v).begin(), g.features().row(v).end());
        nd["features"] = row;
        nd["train"] = g.is_train(v);
        nd["test"] = g.is_test(v);
        doc["nodes"].push_back(std::move(nd));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& [u, v] : g.edges()) doc["edges"].push_back(ordered_json::array({u, v}));
    return doc.dump(2);
}

TagGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return graph_from_json(text);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void save_graph(const TagGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write graph file: " + path.string());
    out << graph_to_json(g) << '\n';
}

}  // namespace graphtextack
