#pragma once

#include <stdexcept>

namespace graphtextack {

struct FitnessConfig {
    double alpha = 1.0;  // weight of the local prediction shift term
    double beta = 1.0;   // weight of the structural influence term
    double pr_damping = 0.85;
    double pr_tol = 1e-8;
    int pr_max_iter = 200;
    // When set, selection inside the evolutionary loop rescales the influence
    // term to [0,1] across the current population. Raw breakdowns are
    // unaffected.
    bool normalize_pr = true;

    void validate() const {
        if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("fitness weights must be >= 0");
        if (alpha + beta <= 0.0) throw std::invalid_argument("at least one fitness weight must be positive");
        if (pr_damping < 0.0 || pr_damping >= 1.0) throw std::invalid_argument("pr_damping must be in [0,1)");
        if (pr_tol <= 0.0 || pr_max_iter <= 0) throw std::invalid_argument("bad pagerank settings");
    }
};

struct FitnessBreakdown {
    double delta_conf = 0.0;
    double pr = 0.0;
    double total = 0.0;  // alpha * delta_conf + beta * pr
};

}  // namespace graphtextack
