#pragma once

#include <filesystem>
#include <string>

#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

// On-disk graph format: a single JSON object
//   {
//     "num_classes": k,
//     "nodes": [{"id", "label" (int or null), "features", "train", "test"}, ...],
//     "edges": [[u, v], ...]   with u < v, no duplicates
//   }
// Node ids must be dense 0..n-1 in array order. Malformed input raises
// std::runtime_error naming the offending element.

TagGraph graph_from_json(const std::string& text);
std::string graph_to_json(const TagGraph& g);

TagGraph load_graph(const std::filesystem::path& path);
void save_graph(const TagGraph& g, const std::filesystem::path& path);

}  // namespace graphtextack
