#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "graphtextack/evolution.hpp"
#include "graphtextack/rng.hpp"
#include "oracles.hpp"

using namespace graphtextack;

namespace {

InjectionCandidate cand(std::vector<NodeId> endpoints, int cls, double total = 0.0,
                        double delta_conf = 0.0) {
    InjectionCandidate c;
    c.endpoints = std::move(endpoints);
    c.sample_class = cls;
    c.cached_fitness = FitnessBreakdown{delta_conf, 0.0, total};
    return c;
}

// Small evolution setup that avoids training: uniform predictions make the
// shift term zero, leaving pure structural selection.
struct EvoFixture {
    TagGraph graph;
    oracles::UniformModel model;
    ClassFeatureBank bank;

    explicit EvoFixture(int n = 25, uint64_t seed = 3)
        : graph(oracles::random_graph(n, 0.15, 2, 3, seed)),
          model(2),
          bank(graph, model, LabelSource::kTrueLabels) {}

    EvolutionConfig config(int pop = 8, int gens = 4, std::uint64_t seed = 1) const {
        EvolutionConfig ec;
        ec.population_size = pop;
        ec.generations = gens;
        ec.d_max = 4;
        ec.feature_source = LabelSource::kTrueLabels;
        ec.seed = seed;
        return ec;
    }
};

}  // namespace

TEST_CASE("elite count resolution and config validation") {
    EvolutionConfig ec;
    CHECK(ec.resolved_elite_count() == 6);  // 30 / 5

    ec.population_size = 7;
    CHECK(ec.resolved_elite_count() == 2);  // floor(7/5)=1, floored at 2
    ec.population_size = 1;
    CHECK(ec.resolved_elite_count() == 1);  // clamped to the population
    ec.population_size = 30;
    ec.elite_count = 4;
    CHECK(ec.resolved_elite_count() == 4);

    ec = EvolutionConfig{};
    ec.population_size = 0;
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec = EvolutionConfig{};
    ec.p_mut = 1.5;
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec = EvolutionConfig{};
    ec.generations = -1;
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec = EvolutionConfig{};
    ec.d_max = 0;
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec = EvolutionConfig{};
    ec.elite_count = 1;  // crossover has nothing to pair
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec.p_crossover = 0.0;
    CHECK_NOTHROW(ec.validate());
}

TEST_CASE("ranking sorts by total, then shift, then index") {
    Population pop;
    pop.members = {cand({0}, 0, 0.3), cand({1}, 0, 0.9), cand({2}, 0, 0.1)};
    CHECK(ranked_indices(pop) == std::vector<std::size_t>{1, 0, 2});

    SUBCASE("elite selection keeps rank order") {
        auto elites = select_elites(pop, 2);
        REQUIRE(elites.size() == 2);
        CHECK(elites[0].endpoints == std::vector<NodeId>{1});
        CHECK(elites[1].endpoints == std::vector<NodeId>{0});
    }
    SUBCASE("total ties fall back to the shift term") {
        pop.members = {cand({0}, 0, 0.5, 0.1), cand({1}, 0, 0.5, 0.4), cand({2}, 0, 0.5, 0.2)};
        CHECK(ranked_indices(pop) == std::vector<std::size_t>{1, 2, 0});
    }
    SUBCASE("full ties keep the earlier candidate") {
        pop.members = {cand({0}, 0, 0.5), cand({1}, 0, 0.5)};
        CHECK(ranked_indices(pop) == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("an override replaces the ranking totals") {
        std::vector<double> override_totals{5.0, 1.0, 2.0};
        CHECK(ranked_indices(pop, &override_totals) == std::vector<std::size_t>{0, 2, 1});
    }
    SUBCASE("unevaluated members cannot be ranked") {
        pop.members[1].cached_fitness.reset();
        CHECK_THROWS_AS(ranked_indices(pop), std::invalid_argument);
    }
    SUBCASE("asking for more elites than members fails") {
        CHECK_THROWS_AS(select_elites(pop, 4), std::invalid_argument);
    }
}

TEST_CASE("crossover splices a prefix of one parent onto the other's suffix") {
    InjectionCandidate a = cand({10, 11, 12, 13}, 1);
    InjectionCandidate b = cand({20, 21, 22, 23}, 2);

    CHECK(crossover_at(a, b, 0, false).endpoints == b.endpoints);
    CHECK(crossover_at(a, b, 2, true).endpoints == std::vector<NodeId>{10, 11, 22, 23});
    CHECK(crossover_at(a, b, 4, true).endpoints == a.endpoints);
    CHECK(crossover_at(a, b, 2, true).sample_class == 1);
    CHECK(crossover_at(a, b, 2, false).sample_class == 2);
    CHECK_FALSE(crossover_at(a, b, 2, true).cached_fitness.has_value());

    SUBCASE("every split point obeys the law") {
        for (std::size_t j = 0; j <= 4; ++j) {
            auto child = crossover_at(a, b, j, true);
            std::vector<NodeId> expect(a.endpoints.begin(), a.endpoints.begin() + j);
            expect.insert(expect.end(), b.endpoints.begin() + j, b.endpoints.end());
            CHECK(child.endpoints == expect);  // disjoint parents: no dedup effects
        }
    }
    SUBCASE("duplicates keep their first occurrence") {
        InjectionCandidate p = cand({1, 2, 3, 4}, 0);
        InjectionCandidate q = cand({3, 4, 5, 6}, 0);
        CHECK(crossover_at(p, q, 2, true).endpoints == std::vector<NodeId>{1, 2, 5, 6});
        CHECK(crossover_at(p, q, 3, true).endpoints == std::vector<NodeId>{1, 2, 3, 6});
        InjectionCandidate r = cand({1, 2}, 0);
        InjectionCandidate s = cand({2, 1}, 0);
        CHECK(crossover_at(r, s, 1, true).endpoints == std::vector<NodeId>{1});
    }
    SUBCASE("identical parents reproduce themselves") {
        for (std::size_t j = 0; j <= 4; ++j)
            CHECK(crossover_at(a, a, j, true).endpoints == a.endpoints);
    }
    SUBCASE("split points beyond a parent are rejected") {
        InjectionCandidate shorty = cand({7}, 0);
        CHECK_THROWS_AS(crossover_at(a, shorty, 2, true), std::invalid_argument);
    }
    SUBCASE("randomized crossover stays within both parents' genes") {
        auto rng = make_rng(11);
        for (int t = 0; t < 300; ++t) {
            auto child = crossover(a, b, rng);
            CHECK(!child.endpoints.empty());
            for (NodeId u : child.endpoints) CHECK(((u >= 10 && u <= 13) || (u >= 20 && u <= 23)));
            std::set<NodeId> uniq(child.endpoints.begin(), child.endpoints.end());
            CHECK(uniq.size() == child.endpoints.size());
            CHECK((child.sample_class == 1 || child.sample_class == 2));
        }
    }
}

TEST_CASE("mutation fires with probability p_mut and always changes the genome") {
    TagGraph g = oracles::random_graph(10, 0.2, 3, 2, 19);
    InjectionCandidate base = cand({0, 3, 7}, 1, 0.5);
    auto rng = make_rng(70);

    SUBCASE("p = 0 is the identity") {
        for (int t = 0; t < 100; ++t) {
            auto out = mutate(base, g, 0.0, rng);
            CHECK(same_genome(out, base));
            CHECK(out.cached_fitness.has_value());  // untouched genome keeps its fitness
        }
    }
    SUBCASE("p = 1 always changes endpoints or class") {
        int endpoint_changes = 0, class_changes = 0;
        for (int t = 0; t < 2000; ++t) {
            auto out = mutate(base, g, 1.0, rng);
            CHECK_FALSE(same_genome(out, base));
            CHECK_FALSE(out.cached_fitness.has_value());
            const bool endpoints_differ = out.endpoints != base.endpoints;
            const bool class_differs = out.sample_class != base.sample_class;
            CHECK(endpoints_differ != class_differs);  // exactly one move applied
            endpoint_changes += endpoints_differ;
            class_changes += class_differs;
            if (endpoints_differ) {
                // one slot replaced by a node outside the original set
                int moved = 0;
                for (std::size_t i = 0; i < base.endpoints.size(); ++i)
                    if (out.endpoints[i] != base.endpoints[i]) {
                        ++moved;
                        CHECK(std::find(base.endpoints.begin(), base.endpoints.end(),
                                        out.endpoints[i]) == base.endpoints.end());
                    }
                CHECK(moved == 1);
            } else {
                CHECK(out.sample_class >= 0);
                CHECK(out.sample_class < g.num_classes());
            }
        }
        // fair coin between the two moves
        CHECK(std::abs(endpoint_changes / 2000.0 - 0.5) < 0.05);
        CHECK(class_changes == 2000 - endpoint_changes);
    }
    SUBCASE("p = 0.25 fires about a quarter of the time") {
        const int trials = 10000;
        int changed = 0;
        for (int t = 0; t < trials; ++t)
            changed += !same_genome(mutate(base, g, 0.25, rng), base);
        CHECK(std::abs(changed / double(trials) - 0.25) < 0.02);
    }
    SUBCASE("rewire falls through to reclass when endpoints cover the graph") {
        TagGraph small = oracles::path_graph(3, 3);
        InjectionCandidate full = cand({0, 1, 2}, 0);
        for (int t = 0; t < 200; ++t) {
            auto out = mutate(full, small, 1.0, rng);
            CHECK(out.endpoints == full.endpoints);
            CHECK(out.sample_class != 0);
        }
    }
    SUBCASE("reclass falls through to rewire with a single class") {
        TagGraph mono = oracles::path_graph(5, 1);
        InjectionCandidate c = cand({0, 2}, 0);
        for (int t = 0; t < 200; ++t) {
            auto out = mutate(c, mono, 1.0, rng);
            CHECK(out.sample_class == 0);
            CHECK(out.endpoints != c.endpoints);
        }
    }
    SUBCASE("no legal move leaves the candidate alone") {
        TagGraph stuck = oracles::path_graph(2, 1);
        InjectionCandidate c = cand({0, 1}, 0);
        for (int t = 0; t < 50; ++t) CHECK(same_genome(mutate(c, stuck, 1.0, rng), c));
    }
    SUBCASE("freeze gates disable their move") {
        for (int t = 0; t < 500; ++t) {
            auto no_rewire = mutate(base, g, 1.0, rng, false, true);
            CHECK(no_rewire.endpoints == base.endpoints);
            auto no_reclass = mutate(base, g, 1.0, rng, true, false);
            CHECK(no_reclass.sample_class == base.sample_class);
        }
    }
}

TEST_CASE("one injection step returns the best candidate it ever saw") {
    EvoFixture fx;
    EvolutionConfig ec = fx.config(6, 5);

    EvolveResult res = evolve_one_injection(fx.graph, fx.model, fx.bank, ec);

    REQUIRE(res.best.cached_fitness.has_value());
    CHECK(res.injected_id == fx.graph.num_nodes());
    CHECK(res.realized.num_nodes() == fx.graph.num_nodes() + 1);
    CHECK(res.realized.num_edges() == fx.graph.num_edges() + res.best.endpoints.size());
    CHECK(res.realized.label(res.injected_id) == res.best.sample_class);

    REQUIRE(res.trace.generations.size() == 5);
    REQUIRE(res.trace.fitness_rows.size() == 5 * 6);

    // the incumbent dominates every recorded evaluation
    double best_seen = -1.0;
    for (const auto& row : res.trace.fitness_rows) best_seen = std::max(best_seen, row.total);
    CHECK(res.best.cached_fitness->total == best_seen);
    CHECK(res.best_generation >= 0);
    CHECK(res.best_generation < 5);

    // per-generation best is consistent with the rows
    for (const auto& gs : res.trace.generations) {
        double gen_best = -1.0;
        for (const auto& row : res.trace.fitness_rows)
            if (row.generation == gs.generation) gen_best = std::max(gen_best, row.total);
        CHECK(gs.best_total == doctest::Approx(gen_best).epsilon(1e-12));
        CHECK(gs.mean_total <= gs.best_total + 1e-12);
    }

    SUBCASE("queries are cumulative and bounded by evaluations") {
        std::uint64_t prev = 0;
        for (const auto& gs : res.trace.generations) {
            CHECK(gs.queries_cumulative >= prev);
            prev = gs.queries_cumulative;
        }
        CHECK(prev <= 1 + 5 * 6);  // base confidence plus one query per evaluation
    }
}

TEST_CASE("the search reproduces itself bit for bit") {
    EvoFixture fx;
    EvolutionConfig ec = fx.config(5, 4, 77);

    oracles::UniformModel m1(2), m2(2);
    EvolveResult r1 = evolve_one_injection(fx.graph, m1, fx.bank, ec);
    EvolveResult r2 = evolve_one_injection(fx.graph, m2, fx.bank, ec);

    CHECK(same_genome(r1.best, r2.best));
    CHECK(r1.realized.fingerprint() == r2.realized.fingerprint());
    CHECK((r1.realized.features() - r2.realized.features()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(trace_to_csv({r1.trace}, false) == trace_to_csv({r2.trace}, false));

    EvolutionConfig other = ec;
    other.seed = 78;
    EvolveResult r3 = evolve_one_injection(fx.graph, m1, fx.bank, other);
    CHECK_FALSE(trace_to_csv({r1.trace}, false) == trace_to_csv({r3.trace}, false));
}

TEST_CASE("a single-candidate single-generation search commits its only draw") {
    EvoFixture fx;
    EvolutionConfig ec = fx.config(1, 1, 5);
    EvolveResult res = evolve_one_injection(fx.graph, fx.model, fx.bank, ec);
    REQUIRE(res.trace.fitness_rows.size() == 1);
    CHECK(res.best_generation == 0);
    CHECK(res.best.cached_fitness->total == res.trace.fitness_rows[0].total);
}

TEST_CASE("zero generations commits the first random genome without queries") {
    EvoFixture fx;
    EvolutionConfig ec = fx.config(4, 0, 9);
    EvolveResult res = evolve_one_injection(fx.graph, fx.model, fx.bank, ec);
    CHECK(fx.model.query_count() == 0);
    CHECK_FALSE(res.best.cached_fitness.has_value());
    CHECK(res.trace.generations.empty());
    CHECK(res.realized.num_nodes() == fx.graph.num_nodes() + 1);
}

TEST_CASE("freezing pins the respective modality") {
    EvoFixture fx;
    EvolutionConfig ec = fx.config(6, 4, 21);

    SUBCASE("frozen class") {
        FreezeSpec freeze;
        freeze.frozen_class = 1;
        for (int idx = 0; idx < 3; ++idx) {
            EvolveResult res =
                evolve_one_injection(fx.graph, fx.model, fx.bank, ec, idx, nullptr, &freeze);
            CHECK(res.best.sample_class == 1);
        }
    }
    SUBCASE("frozen endpoints match the step's init draw") {
        FreezeSpec freeze;
        freeze.freeze_endpoints = true;
        const int idx = 2;
        EvolveResult res =
            evolve_one_injection(fx.graph, fx.model, fx.bank, ec, idx, nullptr, &freeze);

        // reproduce the draw the step must have used
        const std::uint64_t step_seed =
            derive_stream(ec.seed, {streams::kAttack, static_cast<std::uint64_t>(idx)});
        auto init_rng = make_rng(derive_stream(step_seed, {streams::kInit}));
        DegreeDistribution degrees(fx.graph);
        const auto expected = random_candidate(fx.graph, degrees, ec.d_max, init_rng).endpoints;
        CHECK(res.best.endpoints == expected);
    }
}

TEST_CASE("attacks inject exactly the budgeted node count") {
    EvoFixture fx(100, 8);
    EvolutionConfig ec = fx.config(3, 1, 31);

    SUBCASE("zero budget returns the graph unchanged") {
        AttackOutcome out = run_attack(fx.graph, fx.model, 0.0, ec, nullptr, &fx.bank);
        CHECK(out.poisoned.fingerprint() == fx.graph.fingerprint());
        CHECK(out.committed.empty());
        CHECK(out.attacker_queries == 0);
    }
    SUBCASE("fractional budgets round up") {
        for (double r : {0.01, 0.02, 0.03, 0.05}) {
            AttackOutcome out = run_attack(fx.graph, fx.model, r, ec, nullptr, &fx.bank);
            CHECK(static_cast<int>(out.committed.size()) == ceil_count(r, 100));
            CHECK(out.poisoned.num_nodes() == 100 + static_cast<int>(out.committed.size()));
        }
    }
    SUBCASE("negative or non-finite budgets are rejected") {
        CHECK_THROWS_AS(run_attack(fx.graph, fx.model, -0.1, ec), std::invalid_argument);
        CHECK_THROWS_AS(run_attack(fx.graph, fx.model, std::nan(""), ec), std::invalid_argument);
    }
}

TEST_CASE("attacks never touch pre-existing nodes") {
    EvoFixture fx(60, 12);
    EvolutionConfig ec = fx.config(4, 2, 41);
    const Eigen::MatrixXd feats = fx.graph.features();
    const auto edges = fx.graph.edges();
    const auto labels = fx.graph.labels();

    AttackOutcome out = run_attack(fx.graph, fx.model, 0.05, ec, nullptr, &fx.bank);
    const int n = fx.graph.num_nodes();
    REQUIRE(out.committed.size() == 3);

    CHECK((out.poisoned.features().topRows(n) - feats).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::equal(labels.begin(), labels.end(), out.poisoned.labels().begin()));
    CHECK(std::equal(edges.begin(), edges.end(), out.poisoned.edges().begin()));
    for (NodeId v = 0; v < n; ++v) {
        CHECK(out.poisoned.is_train(v) == fx.graph.is_train(v));
        CHECK(out.poisoned.is_test(v) == fx.graph.is_test(v));
    }

    // every injected node is a train node wired to its committed endpoints
    std::size_t new_edges = 0;
    for (std::size_t i = 0; i < out.committed.size(); ++i) {
        const NodeId id = out.injected_ids[i];
        CHECK(id == n + static_cast<int>(i));
        CHECK(out.poisoned.is_train(id));
        CHECK(out.poisoned.label(id) == out.committed[i].sample_class);
        new_edges += out.committed[i].endpoints.size();
    }
    CHECK(out.poisoned.num_edges() == edges.size() + new_edges);
}

TEST_CASE("attack runs are reproducible and seed sensitive") {
    EvoFixture fx(40, 15);
    EvolutionConfig ec = fx.config(4, 3, 55);

    oracles::UniformModel m1(2), m2(2), m3(2);
    AttackOutcome a = run_attack(fx.graph, m1, 0.05, ec, nullptr, &fx.bank);
    AttackOutcome b = run_attack(fx.graph, m2, 0.05, ec, nullptr, &fx.bank);
    REQUIRE(a.committed.size() == b.committed.size());
    for (std::size_t i = 0; i < a.committed.size(); ++i)
        CHECK(same_genome(a.committed[i], b.committed[i]));
    CHECK(a.poisoned.fingerprint() == b.poisoned.fingerprint());
    CHECK(a.attacker_queries == b.attacker_queries);
    CHECK(trace_to_csv(a.traces, false) == trace_to_csv(b.traces, false));

    EvolutionConfig other = ec;
    other.seed = 56;
    AttackOutcome c = run_attack(fx.graph, m3, 0.05, other, nullptr, &fx.bank);
    bool any_diff = c.poisoned.fingerprint() != a.poisoned.fingerprint();
    CHECK(any_diff);

    SUBCASE("later steps attach to earlier injections when they help") {
        // endpoints live in the grown graph, so ids >= |V| are legal
        for (std::size_t i = 0; i < a.committed.size(); ++i)
            for (NodeId u : a.committed[i].endpoints)
                CHECK(u < fx.graph.num_nodes() + static_cast<int>(i));
    }
}

TEST_CASE("attack queries stay within the evaluation budget") {
    EvoFixture fx(50, 23);
    EvolutionConfig ec = fx.config(5, 3, 77);
    AttackOutcome out = run_attack(fx.graph, fx.model, 0.04, ec, nullptr, &fx.bank);
    const std::uint64_t steps = out.committed.size();
    CHECK(out.attacker_queries > 0);
    // per step: one base-confidence refresh plus at most pop*gens evaluations
    CHECK(out.attacker_queries <= steps * (1 + 5 * 3));

    // traces count against the attack's own baseline
    REQUIRE(!out.traces.empty());
    CHECK(out.traces[0].generations[0].queries_cumulative <= 1 + 5);
}

TEST_CASE("trace serialization is stable") {
    InjectionTrace t;
    t.injection_index = 2;
    t.generations.push_back({0, 0.5, 0.25, 7, 3.25});
    t.generations.push_back({1, 0.75, 0.5, 13, 4.5});
    t.fitness_rows.push_back({0, 0, 0.1, 0.4, 0.5});

    const std::string timed = trace_to_csv({t}, true);
    CHECK(timed ==
          "injection_index,generation,best_fitness,mean_fitness,queries_cumulative,wall_clock_ms\n"
          "2,0,0.500000000,0.250000000,7,3.250\n"
          "2,1,0.750000000,0.500000000,13,4.500\n");
    const std::string untimed = trace_to_csv({t}, false);
    CHECK(untimed.find("3.250") == std::string::npos);
    CHECK(untimed.find(",0.000\n") != std::string::npos);

    CHECK(fitness_rows_to_csv(t) ==
          "generation,candidate_index,delta_conf,pr,total\n"
          "0,0,0.100000000,0.400000000,0.500000000\n");
}
