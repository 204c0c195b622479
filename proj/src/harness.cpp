#include "graphtextack/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

#include "graphtextack/rng.hpp"

namespace graphtextack {

using nlohmann::json;
using nlohmann::ordered_json;

AttackMethod method_from_string(const std::string& name) {
    if (name == "none") return AttackMethod::kNone;
    if (name == "random") return AttackMethod::kRandom;
    if (name == "preferential") return AttackMethod::kPreferential;
    if (name == "structure-only") return AttackMethod::kStructureOnly;
    if (name == "feature-only") return AttackMethod::kFeatureOnly;
    if (name == "graphtextack") return AttackMethod::kGraphTextack;
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (expected none|random|preferential|structure-only|feature-only|graphtextack)");
}

std::string to_string(AttackMethod m) {
    switch (m) {
        case AttackMethod::kNone: return "none";
        case AttackMethod::kRandom: return "random";
        case AttackMethod::kPreferential: return "preferential";
        case AttackMethod::kStructureOnly: return "structure-only";
        case AttackMethod::kFeatureOnly: return "feature-only";
        case AttackMethod::kGraphTextack: return "graphtextack";
    }
    throw std::logic_error("unreachable");
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw std::runtime_error(std::string("config: unknown key '") + key + "' in " + where);
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::pair<double, double> mean_stdev(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

EvalSettings settings_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: parse error: ") + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("config: top level is not an object");
    reject_unknown_keys(doc, {"train", "evolution"}, "top level");

    EvalSettings s;
    if (doc.contains("train")) {
        const json& t = doc["train"];
        reject_unknown_keys(t, {"hidden_dim", "learning_rate", "epochs", "seed", "aggregation"},
                            "train");
        if (t.contains("hidden_dim")) s.train.hidden_dim = t["hidden_dim"].get<int>();
        if (t.contains("learning_rate")) s.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("epochs")) s.train.epochs = t["epochs"].get<int>();
        if (t.contains("seed")) s.train.seed = t["seed"].get<std::uint64_t>();
        if (t.contains("aggregation"))
            s.train.aggregation = aggregation_from_string(t["aggregation"].get<std::string>());
    }
    if (doc.contains("evolution")) {
        const json& e = doc["evolution"];
        reject_unknown_keys(e,
                            {"population_size", "generations", "elite_count", "p_crossover", "p_mut",
                             "d_max", "feature_source", "seed", "fitness"},
                            "evolution");
        auto& ev = s.evolution;
        if (e.contains("population_size")) ev.population_size = e["population_size"].get<int>();
        if (e.contains("generations")) ev.generations = e["generations"].get<int>();
        if (e.contains("elite_count")) ev.elite_count = e["elite_count"].get<int>();
        if (e.contains("p_crossover")) ev.p_crossover = e["p_crossover"].get<double>();
        if (e.contains("p_mut")) ev.p_mut = e["p_mut"].get<double>();
        if (e.contains("d_max")) ev.d_max = e["d_max"].get<int>();
        if (e.contains("seed")) ev.seed = e["seed"].get<std::uint64_t>();
        if (e.contains("feature_source")) {
            const std::string src = e["feature_source"].get<std::string>();
            if (src == "true-labels")
                ev.feature_source = LabelSource::kTrueLabels;
            else if (src == "pseudo-labels")
                ev.feature_source = LabelSource::kPseudoLabels;
            else
                throw std::runtime_error("config: feature_source must be true-labels|pseudo-labels");
        }
        if (e.contains("fitness")) {
            const json& f = e["fitness"];
            reject_unknown_keys(
                f, {"alpha", "beta", "pr_damping", "pr_tol", "pr_max_iter", "normalize_pr"},
                "fitness");
            auto& fit = ev.fitness;
            if (f.contains("alpha")) fit.alpha = f["alpha"].get<double>();
            if (f.contains("beta")) fit.beta = f["beta"].get<double>();
            if (f.contains("pr_damping")) fit.pr_damping = f["pr_damping"].get<double>();
            if (f.contains("pr_tol")) fit.pr_tol = f["pr_tol"].get<double>();
            if (f.contains("pr_max_iter")) fit.pr_max_iter = f["pr_max_iter"].get<int>();
            if (f.contains("normalize_pr")) fit.normalize_pr = f["normalize_pr"].get<bool>();
        }
    }
    s.train.validate();
    s.evolution.validate();
    return s;
}

std::string settings_to_json(const EvalSettings& s) {
    ordered_json doc;
    doc["train"] = {{"hidden_dim", s.train.hidden_dim},
                    {"learning_rate", s.train.learning_rate},
                    {"epochs", s.train.epochs},
                    {"seed", s.train.seed},
                    {"aggregation", to_string(s.train.aggregation)}};
    doc["evolution"] = {
        {"population_size", s.evolution.population_size},
        {"generations", s.evolution.generations},
        {"elite_count", s.evolution.elite_count},
        {"p_crossover", s.evolution.p_crossover},
        {"p_mut", s.evolution.p_mut},
        {"d_max", s.evolution.d_max},
        {"feature_source",
         s.evolution.feature_source == LabelSource::kTrueLabels ? "true-labels" : "pseudo-labels"},
        {"seed", s.evolution.seed},
        {"fitness",
         {{"alpha", s.evolution.fitness.alpha},
          {"beta", s.evolution.fitness.beta},
          {"pr_damping", s.evolution.fitness.pr_damping},
          {"pr_tol", s.evolution.fitness.pr_tol},
          {"pr_max_iter", s.evolution.fitness.pr_max_iter},
          {"normalize_pr", s.evolution.fitness.normalize_pr}}}};
    return doc.dump(2);
}

AttackReport poisoning_eval(const TagGraph& graph, const std::string& dataset_tag,
                            AttackMethod method, double budget, const EvalSettings& settings,
                            const std::vector<std::uint64_t>& seeds,
                            std::vector<AttackOutcome>* outcomes) {
    if (seeds.empty()) throw std::invalid_argument("poisoning_eval needs at least one seed");
    settings.train.validate();
    settings.evolution.validate();

    AttackReport report;
    report.dataset = dataset_tag;
    report.method = to_string(method);
    report.budget = budget;

    const std::vector<NodeId> test_nodes = graph.test_nodes();  // original test mask only

    for (std::uint64_t seed : seeds) {
        TrainConfig tc = settings.train;
        tc.seed = derive_stream(seed, {streams::kTrain});
        ReferenceModel victim = train_reference_model(graph, tc);

        SeedRun run;
        run.seed = seed;
        run.clean_accuracy = accuracy(victim, graph, test_nodes);

        EvolutionConfig ec = settings.evolution;
        ec.seed = derive_stream(seed, {streams::kAttack});

        const std::uint64_t q0 = victim.query_count();
        const auto t0 = std::chrono::steady_clock::now();
        AttackOutcome outcome{graph, {}, {}, {}, 0, 0.0};
        switch (method) {
            case AttackMethod::kNone:
                break;
            case AttackMethod::kRandom:
            case AttackMethod::kPreferential: {
                const ClassFeatureBank bank(graph, victim, ec.feature_source);
                const DegreeDistribution degrees(graph);
                auto rng = make_rng(derive_stream(seed, {streams::kBaseline}));
                outcome = method == AttackMethod::kRandom
                              ? random_injection(graph, budget, bank, degrees, rng, ec.d_max)
                              : preferential_injection(graph, budget, bank, degrees, rng, ec.d_max);
                break;
            }
            case AttackMethod::kStructureOnly:
            case AttackMethod::kFeatureOnly: {
                const ClassFeatureBank bank(graph, victim, ec.feature_source);
                outcome = unimodal_attack(graph, victim, bank, budget, ec,
                                          method == AttackMethod::kStructureOnly
                                              ? BaselineKind::kStructureOnly
                                              : BaselineKind::kFeatureOnly);
                break;
            }
            case AttackMethod::kGraphTextack:
                outcome = run_attack(graph, victim, budget, ec);
                break;
        }
        const double attack_ms = elapsed_ms(t0);
        run.attacker_queries = victim.query_count() - q0;
        run.injected_count = outcome.poisoned.num_nodes() - graph.num_nodes();
        run.ms_per_injection = run.injected_count > 0 ? attack_ms / run.injected_count : 0.0;

        // Fresh victim on the poisoned graph, same hyperparameters and seed
        // schedule; injected nodes participate as labeled train nodes.
        ReferenceModel retrained = train_reference_model(outcome.poisoned, tc);
        run.post_accuracy = accuracy(retrained, outcome.poisoned, test_nodes);

        report.runs.push_back(run);
        if (outcomes) outcomes->push_back(std::move(outcome));
    }

    std::vector<double> clean, post;
    for (const auto& r : report.runs) {
        clean.push_back(r.clean_accuracy);
        post.push_back(r.post_accuracy);
    }
    std::tie(report.clean_mean, report.clean_stdev) = mean_stdev(clean);
    std::tie(report.post_mean, report.post_stdev) = mean_stdev(post);
    return report;
}

std::string report_to_csv(const std::vector<AttackReport>& reports, bool include_timing) {
    std::string out =
        "dataset,method,budget,seed,clean_accuracy,post_accuracy,injected_nodes,attacker_queries,"
        "ms_per_injection\n";
    char buf[320];
    for (const auto& rep : reports) {
        double ms_sum = 0.0;
        unsigned long long query_sum = 0;
        long long injected_sum = 0;
        for (const auto& run : rep.runs) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%llu,%.6f,%.6f,%d,%llu,%.3f\n",
                          rep.dataset.c_str(), rep.method.c_str(), rep.budget,
                          static_cast<unsigned long long>(run.seed), run.clean_accuracy,
                          run.post_accuracy, run.injected_count,
                          static_cast<unsigned long long>(run.attacker_queries),
                          include_timing ? run.ms_per_injection : 0.0);
            out += buf;
            ms_sum += run.ms_per_injection;
            query_sum += run.attacker_queries;
            injected_sum += run.injected_count;
        }
        const double n = static_cast<double>(rep.runs.size());
        std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,mean,%.6f,%.6f,%.2f,%.1f,%.3f\n",
                      rep.dataset.c_str(), rep.method.c_str(), rep.budget, rep.clean_mean,
                      rep.post_mean, static_cast<double>(injected_sum) / n,
                      static_cast<double>(query_sum) / n, include_timing ? ms_sum / n : 0.0);
        out += buf;
        std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,stdev,%.6f,%.6f,,,\n", rep.dataset.c_str(),
                      rep.method.c_str(), rep.budget, rep.clean_stdev, rep.post_stdev);
        out += buf;
    }
    return out;
}

double search_space_log10(long long num_nodes, long long r, long long d_max,
                          long long num_feature_choices) {
    if (num_nodes < 0 || r < 0 || d_max < 0 || num_feature_choices < 0)
        throw std::invalid_argument("search space arguments must be >= 0");
    if (d_max > num_nodes)
        throw std::invalid_argument("d_max exceeds num_nodes; no endpoint set exists");
    if (r == 0) return 0.0;  // empty product
    if (num_feature_choices < 1)
        throw std::invalid_argument("empty feature space with a positive injection budget");

    // Exact path when C(num_nodes, d_max)^r * choices^r fits in 64 bits, so
    // small instances hit the same log10 call an integer oracle would.
    const auto checked_mul = [](unsigned long long a, unsigned long long b,
                                unsigned long long& out) {
        const unsigned __int128 wide = static_cast<unsigned __int128>(a) * b;
        if (wide > std::numeric_limits<unsigned long long>::max()) return false;
        out = static_cast<unsigned long long>(wide);
        return true;
    };
    unsigned long long binom = 1;
    bool exact = true;
    for (long long i = 1; exact && i <= d_max; ++i) {
        // multiplicative formula keeps intermediate values integral
        unsigned __int128 wide = static_cast<unsigned __int128>(binom) *
                                 static_cast<unsigned long long>(num_nodes - d_max + i);
        wide /= static_cast<unsigned long long>(i);
        if (wide > std::numeric_limits<unsigned long long>::max())
            exact = false;
        else
            binom = static_cast<unsigned long long>(wide);
    }
    if (exact) {
        unsigned long long total = 1;
        for (long long t = 0; exact && t < r; ++t)
            exact = checked_mul(total, binom, total) &&
                    checked_mul(total, static_cast<unsigned long long>(num_feature_choices), total);
        if (exact) return std::log10(static_cast<double>(total));
    }

    // Sum-of-logs: error stays near machine epsilon for any realistic d_max,
    // far below what lgamma would give at these magnitudes.
    double log_binom = 0.0;
    for (long long i = 1; i <= d_max; ++i)
        log_binom += std::log10(static_cast<double>(num_nodes - d_max + i)) -
                     std::log10(static_cast<double>(i));
    return static_cast<double>(r) *
           (log_binom + std::log10(static_cast<double>(num_feature_choices)));
}

ScalingReport runtime_scaling(const std::vector<SbmSpec>& specs, const EvalSettings& settings,
                              int injections_per_size) {
    if (specs.size() < 3) throw std::invalid_argument("runtime_scaling needs >= 3 sizes");
    if (injections_per_size < 1) throw std::invalid_argument("need >= 1 injection per size");

    ScalingReport report;
    for (const auto& spec : specs) {
        const TagGraph graph = generate_sbm(spec);
        TrainConfig tc = settings.train;
        tc.seed = derive_stream(spec.seed, {streams::kTrain});
        ReferenceModel victim = train_reference_model(graph, tc);

        EvolutionConfig ec = settings.evolution;
        ec.seed = derive_stream(spec.seed, {streams::kAttack});
        const ClassFeatureBank bank(graph, victim, ec.feature_source);
        const DegreeDistribution degrees(graph);

        const auto t0 = std::chrono::steady_clock::now();
        TagGraph current = graph;
        for (int step = 0; step < injections_per_size; ++step) {
            auto res = evolve_one_injection(current, victim, bank, ec, step, &degrees);
            current = std::move(res.realized);
        }
        report.rows.push_back({graph.num_nodes(), static_cast<long long>(graph.num_edges()),
                               elapsed_ms(t0) / injections_per_size});
    }

    // log-log least squares for the growth exponent of time in |E|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(report.rows.size());
    for (const auto& row : report.rows) {
        const double x = std::log(static_cast<double>(row.num_edges));
        const double y = std::log(std::max(row.ms_per_injection, 1e-9));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    report.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return report;
}

std::string scaling_to_csv(const ScalingReport& report) {
    std::string out = "num_nodes,num_edges,ms_per_injection\n";
    char buf[128];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.3f\n", row.num_nodes, row.num_edges,
                      row.ms_per_injection);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "fitted_exponent,,%.4f\n", report.fitted_exponent);
    out += buf;
    return out;
}

double mean_injection_ms(const TagGraph& graph, const EvalSettings& settings, double budget,
                         std::uint64_t seed) {
    TrainConfig tc = settings.train;
    tc.seed = derive_stream(seed, {streams::kTrain});
    ReferenceModel victim = train_reference_model(graph, tc);

    EvolutionConfig ec = settings.evolution;
    ec.seed = derive_stream(seed, {streams::kAttack});
    const auto t0 = std::chrono::steady_clock::now();
    const AttackOutcome outcome = run_attack(graph, victim, budget, ec);
    const int injected = outcome.poisoned.num_nodes() - graph.num_nodes();
    return injected > 0 ? elapsed_ms(t0) / injected : 0.0;
}

std::vector<AttackReport> ablation_suite(const TagGraph& graph, const std::string& dataset_tag,
                                         const std::vector<double>& budgets,
                                         const EvalSettings& settings,
                                         const std::vector<std::uint64_t>& seeds) {
    struct Variant {
        const char* name;
        EvalSettings settings;
    };
    std::vector<Variant> variants;
    variants.push_back({"full", settings});
    variants.push_back({"no-crossover", settings});
    variants.back().settings.evolution.p_crossover = 0.0;
    variants.push_back({"no-mutation", settings});
    variants.back().settings.evolution.p_mut = 0.0;
    variants.push_back({"alpha-0", settings});
    variants.back().settings.evolution.fitness.alpha = 0.0;
    variants.push_back({"beta-0", settings});
    variants.back().settings.evolution.fitness.beta = 0.0;

    std::vector<AttackReport> reports;
    for (double budget : budgets) {
        for (const auto& variant : variants) {
            AttackReport rep = poisoning_eval(graph, dataset_tag, AttackMethod::kGraphTextack,
                                              budget, variant.settings, seeds);
            rep.method = variant.name;
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

ShiftBoundReport shift_bound_diagnostic(const TagGraph& graph, BlackBoxModel& model,
                                        int num_trials, std::uint64_t seed, int d_max) {
    if (num_trials < 1) throw std::invalid_argument("shift_bound_diagnostic needs >= 1 trial");

    const std::vector<double> base_conf = max_confidence(model.predict(graph));
    const ClassFeatureBank bank(graph, model, LabelSource::kTrueLabels);
    const DegreeDistribution degrees(graph);
    auto rng = make_rng(derive_stream(seed, {streams::kDiagnostic}));

    ShiftBoundReport report;
    report.trials = num_trials;
    std::vector<double> ratios;
    for (int trial = 0; trial < num_trials; ++trial) {
        const InjectionCandidate c = random_candidate(graph, degrees, d_max, rng);
        const Eigen::VectorXd row = bank.sample_features(c.sample_class, graph, rng);
        const auto [injected, injected_id] = graph.with_injected_node(row, c.sample_class, c.endpoints);
        const std::vector<double> conf = max_confidence(model.predict(injected));

        for (NodeId v : injected.two_hop_neighborhood(injected_id)) {
            if (v >= graph.num_nodes()) continue;
            const double shift = std::abs(conf[static_cast<std::size_t>(v)] -
                                          base_conf[static_cast<std::size_t>(v)]);
            // mean feature vector of v's neighbors in the clean graph
            Eigen::VectorXd nbr_mean = Eigen::VectorXd::Zero(graph.feature_dim());
            for (NodeId u : graph.neighbors(v)) nbr_mean += graph.features().row(u).transpose();
            if (graph.degree(v) > 0) nbr_mean /= static_cast<double>(graph.degree(v));
            const double discrepancy = (row - nbr_mean).norm();
            const double degree_term =
                static_cast<double>(c.endpoints.size()) / (graph.degree(v) + 1.0);
            ratios.push_back(shift / (discrepancy + degree_term));
        }
    }
    report.affected_pairs = static_cast<long long>(ratios.size());
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        report.l_hat_max = ratios.back();
        const std::size_t at = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(ratios.size()) - 1.0,
                             std::floor(0.99 * static_cast<double>(ratios.size()))));
        report.l_hat_p99 = ratios[at];
    }
    return report;
}

std::string shift_bound_to_csv(const ShiftBoundReport& report) {
    char buf[192];
    std::string out = "trials,affected_pairs,l_hat_max,l_hat_p99\n";
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.9f,%.9f\n", report.trials, report.affected_pairs,
                  report.l_hat_max, report.l_hat_p99);
    out += buf;
    return out;
}

}  // namespace graphtextack
