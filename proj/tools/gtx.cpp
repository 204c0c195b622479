// Command line front end: dataset generation, attacks, the evaluation
// protocol, ablations, scaling measurements and the analytic calculators.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graphtextack/graph_io.hpp"
#include "graphtextack/harness.hpp"
#include "graphtextack/rng.hpp"

namespace gtx = graphtextack;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

gtx::EvalSettings load_settings(const std::string& config_path) {
    if (config_path.empty()) return {};
    return gtx::settings_from_json(slurp(config_path));
}

std::vector<std::uint64_t> make_seeds(int count, std::uint64_t base) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
}

std::string dataset_tag(const std::string& graph_path) {
    return std::filesystem::path(graph_path).stem().string();
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::runtime_error("empty list: " + csv);
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    for (double x : parse_doubles(csv)) out.push_back(static_cast<int>(x));
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"GraphTextack: black-box node-injection poisoning attacks on graph classifiers"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Emit a synthetic SBM graph as JSON");
    gtx::SbmSpec spec;
    std::string gen_out;
    gen->add_option("--nodes", spec.num_nodes, "Node count");
    gen->add_option("--classes", spec.num_classes, "Class count");
    gen->add_option("--p-in", spec.p_in, "Intra-class edge probability");
    gen->add_option("--p-out", spec.p_out, "Inter-class edge probability");
    gen->add_option("--dim", spec.feature_dim, "Feature dimension");
    gen->add_option("--mu-sep", spec.mu_sep, "Class mean separation");
    gen->add_option("--sigma", spec.sigma, "Feature noise stddev");
    gen->add_option("--train-fraction", spec.train_fraction, "Train fraction per class");
    gen->add_option("--seed", spec.seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output graph JSON path")->required();

    // attack
    auto* atk = app.add_subcommand("attack", "Poison one graph with a chosen method");
    std::string atk_graph, atk_method = "graphtextack", atk_config, atk_out, atk_trace,
                atk_candidates, atk_checkpoint;
    double atk_budget = 0.05;
    std::uint64_t atk_seed = 1;
    bool atk_no_timing = false;
    atk->add_option("--graph", atk_graph, "Input graph JSON")->required();
    atk->add_option("--method", atk_method,
                    "none|random|preferential|structure-only|feature-only|graphtextack");
    atk->add_option("--budget", atk_budget, "Injected fraction r of |V|");
    atk->add_option("--seed", atk_seed, "Run seed");
    atk->add_option("--config", atk_config, "Settings JSON (train/evolution)");
    atk->add_option("--out", atk_out, "Poisoned graph JSON path")->required();
    atk->add_option("--trace", atk_trace, "Attack trace CSV path");
    atk->add_option("--candidates", atk_candidates, "Committed candidates JSON path");
    atk->add_option("--checkpoint", atk_checkpoint, "Victim model checkpoint JSON path");
    atk->add_flag("--no-timing", atk_no_timing, "Zero wall-clock columns for reproducible output");

    // eval
    auto* ev = app.add_subcommand("eval", "Full poisoning evaluation (train, attack, retrain)");
    std::string ev_graph, ev_method = "graphtextack", ev_config, ev_out, ev_trace;
    double ev_budget = 0.05;
    int ev_seeds = 5;
    std::uint64_t ev_seed_base = 1;
    bool ev_no_timing = false;
    ev->add_option("--graph", ev_graph, "Input graph JSON")->required();
    ev->add_option("--method", ev_method,
                   "none|random|preferential|structure-only|feature-only|graphtextack");
    ev->add_option("--budget", ev_budget, "Injected fraction r of |V|");
    ev->add_option("--seeds", ev_seeds, "Number of evaluation seeds");
    ev->add_option("--seed-base", ev_seed_base, "First seed value");
    ev->add_option("--config", ev_config, "Settings JSON");
    ev->add_option("--out", ev_out, "Report CSV path")->required();
    ev->add_option("--trace", ev_trace, "Concatenated trace CSV path (graphtextack runs)");
    ev->add_flag("--no-timing", ev_no_timing, "Zero wall-clock columns for reproducible output");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Five-variant ablation under the evaluation protocol");
    std::string ab_graph, ab_config, ab_out, ab_budgets = "0.05";
    int ab_seeds = 5;
    std::uint64_t ab_seed_base = 1;
    bool ab_no_timing = false;
    ab->add_option("--graph", ab_graph, "Input graph JSON")->required();
    ab->add_option("--budgets", ab_budgets, "Comma-separated budget fractions");
    ab->add_option("--seeds", ab_seeds, "Number of evaluation seeds");
    ab->add_option("--seed-base", ab_seed_base, "First seed value");
    ab->add_option("--config", ab_config, "Settings JSON");
    ab->add_option("--out", ab_out, "Report CSV path")->required();
    ab->add_flag("--no-timing", ab_no_timing, "Zero wall-clock columns");

    // scaling
    auto* sc = app.add_subcommand("scaling", "Per-injection runtime across graph sizes");
    std::string sc_config, sc_out, sc_sizes = "212,300,424";
    int sc_injections = 3;
    std::uint64_t sc_seed = 1;
    sc->add_option("--sizes", sc_sizes, "Comma-separated SBM node counts (doubling |E|)");
    sc->add_option("--injections", sc_injections, "Injections timed per size");
    sc->add_option("--seed", sc_seed, "Dataset/run seed");
    sc->add_option("--config", sc_config, "Settings JSON");
    sc->add_option("--out", sc_out, "Scaling CSV path")->required();

    // space
    auto* sp = app.add_subcommand("space", "Search-space size calculator (log10)");
    long long sp_nodes = 0, sp_r = 0, sp_dmax = 0, sp_choices = 0;
    sp->add_option("--nodes", sp_nodes, "Number of attachable nodes")->required();
    sp->add_option("--injections", sp_r, "Number of injected nodes r")->required();
    sp->add_option("--d-max", sp_dmax, "Edge budget per injection")->required();
    sp->add_option("--choices", sp_choices, "Feature choices per injection")->required();

    // diagnose-bound
    auto* db = app.add_subcommand("diagnose-bound", "Empirical local-shift bound constant");
    std::string db_graph, db_config, db_out;
    int db_trials = 500;
    std::uint64_t db_seed = 1;
    int db_dmax = 10;
    db->add_option("--graph", db_graph, "Input graph JSON")->required();
    db->add_option("--trials", db_trials, "Random injections to measure");
    db->add_option("--seed", db_seed, "Run seed");
    db->add_option("--d-max", db_dmax, "Edge budget cap");
    db->add_option("--config", db_config, "Settings JSON (train section)");
    db->add_option("--out", db_out, "Report CSV path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        gtx::save_graph(gtx::generate_sbm(spec), gen_out);
        std::cout << "wrote " << gen_out << "\n";
        return 0;
    }

    if (atk->parsed()) {
        const gtx::TagGraph graph = gtx::load_graph(atk_graph);
        gtx::EvalSettings settings = load_settings(atk_config);
        const gtx::AttackMethod method = gtx::method_from_string(atk_method);

        gtx::TrainConfig tc = settings.train;
        tc.seed = gtx::derive_stream(atk_seed, {gtx::streams::kTrain});
        gtx::ReferenceModel victim = gtx::train_reference_model(graph, tc);
        if (!atk_checkpoint.empty()) victim.save_checkpoint(atk_checkpoint);

        gtx::EvolutionConfig ec = settings.evolution;
        ec.seed = gtx::derive_stream(atk_seed, {gtx::streams::kAttack});

        gtx::AttackOutcome outcome{graph, {}, {}, {}, 0, 0.0};
        switch (method) {
            case gtx::AttackMethod::kNone:
                break;
            case gtx::AttackMethod::kRandom:
            case gtx::AttackMethod::kPreferential: {
                const gtx::ClassFeatureBank bank(graph, victim, ec.feature_source);
                const gtx::DegreeDistribution degrees(graph);
                auto rng = gtx::make_rng(gtx::derive_stream(atk_seed, {gtx::streams::kBaseline}));
                outcome = method == gtx::AttackMethod::kRandom
                              ? gtx::random_injection(graph, atk_budget, bank, degrees, rng, ec.d_max)
                              : gtx::preferential_injection(graph, atk_budget, bank, degrees, rng,
                                                            ec.d_max);
                break;
            }
            case gtx::AttackMethod::kStructureOnly:
            case gtx::AttackMethod::kFeatureOnly: {
                const gtx::ClassFeatureBank bank(graph, victim, ec.feature_source);
                outcome = gtx::unimodal_attack(graph, victim, bank, atk_budget, ec,
                                               method == gtx::AttackMethod::kStructureOnly
                                                   ? gtx::BaselineKind::kStructureOnly
                                                   : gtx::BaselineKind::kFeatureOnly);
                break;
            }
            case gtx::AttackMethod::kGraphTextack:
                outcome = gtx::run_attack(graph, victim, atk_budget, ec);
                break;
        }

        gtx::save_graph(outcome.poisoned, atk_out);
        if (!atk_trace.empty()) spit(atk_trace, gtx::trace_to_csv(outcome.traces, !atk_no_timing));
        if (!atk_candidates.empty()) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& c : outcome.committed)
                arr.push_back(nlohmann::ordered_json::parse(c.to_json()));
            spit(atk_candidates, arr.dump(2) + "\n");
        }
        std::cout << "injected " << outcome.committed.size() << " nodes using "
                  << outcome.attacker_queries << " queries; wrote " << atk_out << "\n";
        return 0;
    }

    if (ev->parsed()) {
        const gtx::TagGraph graph = gtx::load_graph(ev_graph);
        const gtx::EvalSettings settings = load_settings(ev_config);
        std::vector<gtx::AttackOutcome> outcomes;
        const gtx::AttackReport report =
            gtx::poisoning_eval(graph, dataset_tag(ev_graph), gtx::method_from_string(ev_method),
                                ev_budget, settings, make_seeds(ev_seeds, ev_seed_base),
                                ev_trace.empty() ? nullptr : &outcomes);
        spit(ev_out, gtx::report_to_csv({report}, !ev_no_timing));
        if (!ev_trace.empty()) {
            std::vector<gtx::InjectionTrace> all;
            for (const auto& outcome : outcomes)
                all.insert(all.end(), outcome.traces.begin(), outcome.traces.end());
            spit(ev_trace, gtx::trace_to_csv(all, !ev_no_timing));
        }
        std::cout << "clean " << report.clean_mean << " -> post " << report.post_mean << " ("
                  << report.method << ", r=" << report.budget << "); wrote " << ev_out << "\n";
        return 0;
    }

    if (ab->parsed()) {
        const gtx::TagGraph graph = gtx::load_graph(ab_graph);
        const gtx::EvalSettings settings = load_settings(ab_config);
        const auto reports = gtx::ablation_suite(graph, dataset_tag(ab_graph),
                                                 parse_doubles(ab_budgets), settings,
                                                 make_seeds(ab_seeds, ab_seed_base));
        spit(ab_out, gtx::report_to_csv(reports, !ab_no_timing));
        std::cout << "wrote " << ab_out << "\n";
        return 0;
    }

    if (sc->parsed()) {
        const gtx::EvalSettings settings = load_settings(sc_config);
        std::vector<gtx::SbmSpec> specs;
        for (int n : parse_ints(sc_sizes)) {
            gtx::SbmSpec s;
            s.num_nodes = n;
            s.seed = sc_seed;
            specs.push_back(s);
        }
        const gtx::ScalingReport report = gtx::runtime_scaling(specs, settings, sc_injections);
        spit(sc_out, gtx::scaling_to_csv(report));
        std::cout << "fitted exponent " << report.fitted_exponent << "; wrote " << sc_out << "\n";
        return 0;
    }

    if (sp->parsed()) {
        std::cout << gtx::search_space_log10(sp_nodes, sp_r, sp_dmax, sp_choices) << "\n";
        return 0;
    }

    if (db->parsed()) {
        const gtx::TagGraph graph = gtx::load_graph(db_graph);
        const gtx::EvalSettings settings = load_settings(db_config);
        gtx::TrainConfig tc = settings.train;
        tc.seed = gtx::derive_stream(db_seed, {gtx::streams::kTrain});
        gtx::ReferenceModel victim = gtx::train_reference_model(graph, tc);
        const auto report = gtx::shift_bound_diagnostic(graph, victim, db_trials, db_seed, db_dmax);
        const std::string csv = gtx::shift_bound_to_csv(report);
        if (db_out.empty())
            std::cout << csv;
        else
            spit(db_out, csv);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
