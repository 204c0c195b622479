#pragma once

#include <cstdint>

#include "graphtextack/tag_graph.hpp"

namespace graphtextack {

// Stochastic block model with Gaussian class-centered features. Desk-scale
// stand-in for benchmark graphs: separable enough that the reference model
// clears 85% test accuracy at the defaults.
struct SbmSpec {
    int num_nodes = 300;
    int num_classes = 3;
    double p_in = 0.08;
    double p_out = 0.005;
    int feature_dim = 16;
    double mu_sep = 1.0;  // distance of each class mean from the origin
    double sigma = 0.6;   // per-coordinate feature noise
    double train_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

// Nodes are split into contiguous near-equal blocks (= classes). Edges are
// independent Bernoulli draws with probability p_in within a block and p_out
// across. Features are the class mean (mu_sep on axis class % feature_dim)
// plus N(0, sigma^2) noise. Per class, a seeded shuffle marks
// ceil(train_fraction * block size) nodes as train; the rest are test.
TagGraph generate_sbm(const SbmSpec& spec);

}  // namespace graphtextack
