#include <doctest.h>

#include <cstdlib>

#include "invforge/density.hpp"
#include "invforge/registry.hpp"
#include "invforge/toy.hpp"
#include "oracles.hpp"

using namespace invforge;

namespace {

const ExtensionAxiom& axiom_with(const std::vector<ExtensionAxiom>& all, int arity, const std::function<bool(const ExtensionAxiom&)>& pred) {
    for (const auto& a : all)
        if (a.arity == arity && pred(a)) return a;
    throw std::runtime_error("no such axiom");
}

struct GraphAxioms {
    std::vector<ExtensionAxiom> all;
    ExtensionAxiom vertex, adj, nonadj, over_edge;
    GraphAxioms() {
        auto g = make_class("graphs");
        all = extension_axioms(*g, 1, 2);
        vertex = axiom_with(all, 0, [](const ExtensionAxiom&) { return true; });
        adj = axiom_with(all, 1, [](const ExtensionAxiom& a) { return a.ext.atom("E", {0, 1}); });
        nonadj = axiom_with(all, 1, [](const ExtensionAxiom& a) { return !a.ext.atom("E", {0, 1}); });
        over_edge = axiom_with(all, 2, [](const ExtensionAxiom& a) { return a.base.atom("E", {0, 1}); });
    }
};

std::vector<ToyStage> graphs_run(int stages) {
    auto g = make_class("graphs");
    ToySchedule sched(extension_axioms(*g, 1, 3));
    return build_toy(make_graph(1, {}), *g, sched, stages);
}

}  // namespace

TEST_SUITE("toy") {

TEST_CASE("schedule dovetails formula indices") {
    auto g = make_class("graphs");
    ToySchedule sched(extension_axioms(*g, 1, 3));
    std::vector<int> got;
    for (int n = 1; n <= 8; ++n) got.push_back(sched.formula_index(n));
    CHECK(got == std::vector<int>{0, 1, 0, 1, 2, 0, 1, 2});
    for (int f = 0; f < 5; ++f) {
        int hits = 0;
        for (int n = 1; n <= 200; ++n) hits += sched.formula_index(n) == f;
        CHECK(hits >= 10);
    }
    CHECK(sched.zeta(8, 1) == 6);
    CHECK(sched.zeta(8, 2) == 7);
    CHECK(sched.zeta(8, 5) == 5);
    for (std::uint64_t n = 0; n < 500; ++n) {
        auto [a, b] = ToySchedule::unpair(n);
        CHECK((a + b) * (a + b + 1) / 2 + a == n);
    }
}

TEST_CASE("init_stage0") {
    auto g = make_class("graphs");
    auto st = init_stage0(make_graph(1, {}), *g);
    CHECK(st.size == 1);
    CHECK(st.slice_size(0) == 1);
    CHECK(st.alpha == 0);
    auto edge = init_stage0(make_graph(2, {{0, 1}}), *g);
    CHECK(edge.slice_size(0) == 2);
    CHECK(edge.roots.relation(0).size() == 2);

    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK_THROWS_AS(init_stage0(k3, *make_class("triangle-free")), Error);
    try {
        init_stage0(k3, *make_class("triangle-free"));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotInAge);
    }
    CHECK_THROWS_AS(init_stage0(metric_to_structure(RationalMetricSpace(1), {{Rational(0), Rational(1)}}), *make_class("metric")), Error);
}

TEST_CASE("run_stage examples") {
    GraphAxioms ax;
    auto g = make_class("graphs");
    auto s0 = init_stage0(make_graph(1, {}), *g);
    auto s1 = run_stage(s0, ax.adj, *g);
    CHECK(s1.new_count == 1);
    CHECK(s1.alpha == 1);
    CHECK(s1.size == 2);
    CHECK(s1.roots.holds(0, 0, 1));

    // no edge to witness over: one arbitrary fresh element
    auto s2 = run_stage(s1, ax.over_edge, *g);
    CHECK(s2.new_count == 2);  // the edge r0-r1 gives two ordered tuples
    auto lone = run_stage(s0, ax.over_edge, *g);
    CHECK(lone.new_count == 1);
    CHECK(lone.roots.relation(0).size() == 0);

    // |B(4,4)| = 3 gives alpha_4 = 2^3 * 3
    auto e0 = init_stage0(FinStructure(graph_signature()), *g);
    auto e1 = run_stage(e0, ax.vertex, *g);
    auto e2 = run_stage(e1, ax.vertex, *g);
    auto e3 = run_stage(e2, ax.vertex, *g);
    auto e4 = run_stage(e3, ax.nonadj, *g);
    CHECK(e4.new_count == 3);
    CHECK(e4.alpha == 24);
    CHECK(e4.ratio_ok());

    CHECK_THROWS_AS(run_stage(s1, ax.adj, *g, 2), Error);
}

TEST_CASE("tf witness demands that are impossible propagate") {
    auto tf = make_class("triangle-free");
    auto all = extension_axioms(*tf, 1, 2);
    // y adjacent to both ends of an edge is not in the age, so no such axiom exists
    for (const auto& a : all)
        if (a.arity == 2 && a.base.atom("E", {0, 1})) CHECK_FALSE((a.ext.atom("E", {0, 2}) && a.ext.atom("E", {1, 2})));
    Demand both{{{"E", {0, Literal::kY}, true}, {"E", {1, Literal::kY}, true}}};
    CHECK_THROWS_AS(tf->canonical_witness(make_graph(2, {{0, 1}}), {"0", "1"}, both, "y"), Error);
}

TEST_CASE("slice ratio, partition and sizes along a graphs run") {
    auto run = graphs_run(8);
    for (const auto& st : run) {
        CHECK(st.ratio_ok());
        BigInt total = 0;
        for (int i = 0; i <= st.n; ++i) total += st.slice_size(i);
        CHECK(total == st.size);
        if (st.n >= 1) {
            CHECK(st.alpha == (st.new_count << (st.n - 1)));
            CHECK(st.substage_sizes.size() == static_cast<std::size_t>(st.n + 1));
            CHECK(st.substage_sizes.back() == st.size);
        }
    }
    for (std::size_t i = 1; i < run.size(); ++i) CHECK(run[i].size > run[i - 1].size);
}

TEST_CASE("projection coherence on materialized stages") {
    auto run = graphs_run(4);
    for (const auto& st : run) {
        auto m = materialize(st, 5000);
        REQUIRE(BigInt(m.size()) == st.size);
        std::vector<int> root(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) root[i] = st.roots.index_of(toy_projection(m.label(i)));
        // binary signature: pairs fix the type of every tuple
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = 0; b < m.size(); ++b) {
                auto t = qf_type_of_idx(m, {static_cast<int>(a), static_cast<int>(b)});
                if (root[a] != root[b]) {
                    CHECK(t == qf_type_of_idx(st.roots, {root[a], root[b]}));
                } else {
                    CHECK_FALSE(t.atom(0, {0, 1}));
                }
            }
        CHECK(make_class("graphs")->contains(m));
    }
    auto big = graphs_run(6).back();
    CHECK_THROWS_AS(materialize(big, 1000), Error);
    // sampled triples beyond the materialized range
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        std::vector<ToyStage::Element> d{big.draw(rng), big.draw(rng), big.draw(rng)};
        auto t = stage_pullback_type(big, d);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                CHECK(t.atom(0, {a, b}) == (d[a].root != d[b].root && big.roots.holds(0, d[a].root, d[b].root)));
    }
}

TEST_CASE("addresses descend by prefix") {
    auto run = graphs_run(3);
    auto m2 = materialize(run[2], 5000);
    auto m3 = materialize(run[3], 5000);
    for (const auto& l : m3.labels()) {
        auto cut = l.substr(0, l.rfind('.'));
        if (l.find('.') != std::string::npos) CHECK(m2.has_element(cut));
    }
}

TEST_CASE("sample_GNG") {
    auto k1 = make_graph(1, {});
    CHECK(sample_GNG(k1, 0, 1).size() == 0);
    auto s = sample_GNG(k1, 5, 1);
    CHECK(s.size() == 5);
    CHECK(s.relation(0).size() == 0);
    CHECK_THROWS_AS(sample_GNG(make_graph(0, {}), 2, 1), Error);
    CHECK(sample_GNG(make_graph(4, {{0, 1}}), 6, 42).same_as(sample_GNG(make_graph(4, {{0, 1}}), 6, 42)));

    auto k2 = make_graph(2, {{0, 1}});
    auto edge = qf_type_of(k2, {"0", "1"});
    auto e = mc_estimate(k2, edge, 100000, 3);
    CHECK(std::abs(e.p_hat - 0.5) <= 3 * e.sigma);
}

TEST_CASE("mc_estimate") {
    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto edge = qf_type_of(make_graph(2, {{0, 1}}), {"0", "1"});
    auto e = mc_estimate(k3, edge, 100000, 9);
    CHECK(std::abs(e.p_hat - 2.0 / 3) <= 3 * e.sigma);
    CHECK(e.sigma == doctest::Approx(std::sqrt(e.p_hat * (1 - e.p_hat) / 1e5)));

    auto taut = mc_estimate(k3, Formula::top(), 2, 1000, 9);
    CHECK(taut.p_hat == 1);
    CHECK(taut.sigma == 0);
    auto none = mc_estimate(make_graph(4, {}), edge, 1000, 9);
    CHECK(none.p_hat == 0);
    auto atom = mc_estimate(k3, Formula::atom("E", {0, 1}), 2, 100000, 9);
    CHECK(std::abs(atom.p_hat - 2.0 / 3) <= 3 * atom.sigma);
}

TEST_CASE("sampler identity against full homomorphism density") {
    std::vector<oracle::Graph> gs = oracle::all_graphs(4);
    for (std::size_t gi = 0; gi < gs.size(); gi += 7) {
        auto g = oracle::to_structure(gs[gi]);
        for (int k = 1; k <= 3; ++k)
            for (const auto& f : oracle::all_graphs(k)) {
                auto fs = oracle::to_structure(f);
                std::vector<std::string> lab;
                for (int i = 0; i < f.n; ++i) lab.push_back(std::to_string(i));
                auto est = mc_estimate(g, qf_type_of(fs, lab), 20000, 100 + gi);
                double truth = to_double(full_hom_density(fs, g).value());
                CHECK(std::abs(est.p_hat - truth) <= 3 * est.sigma);
            }
    }
}

TEST_CASE("reproducible regardless of worker count") {
    auto run = graphs_run(5);
    auto catalog = type_catalog(*make_class("graphs"), 1, 2);
    setenv("INVFORGE_THREADS", "1", 1);
    auto a = delta_report(run, catalog, 3000, 17);
    setenv("INVFORGE_THREADS", "3", 1);
    auto b = delta_report(run, catalog, 3000, 17);
    unsetenv("INVFORGE_THREADS");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].estimate == b[i].estimate);
    auto r1 = graphs_run(4), r2 = graphs_run(4);
    CHECK(materialize(r1.back(), 5000).same_as(materialize(r2.back(), 5000)));
}

TEST_CASE("delta report") {
    CHECK(to_double(delta_bound(2, 5)) == 0.0625);
    auto g = make_class("graphs");
    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto a = init_stage0(k3, *g);
    auto b = a;
    b.n = 1;
    auto edge = qf_type_of(make_graph(2, {{0, 1}}), {"0", "1"});
    auto rows = delta_report({a, b}, {edge}, 5000, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].estimate == 0);
    CHECK(rows[0].pass);

    auto run = graphs_run(8);
    std::vector<QfType> cat;
    for (int k = 1; k <= 3; ++k)
        for (const auto& q : type_catalog(*g, 1, k)) cat.push_back(q);
    auto all = delta_report(run, cat, 20000, 7);
    CHECK(all.size() == 8 * cat.size());
    for (const auto& r : all) CHECK_MESSAGE(r.pass, r.n << " " << r.type_id << " " << r.estimate << " " << r.bound);
}

TEST_CASE("gamma bound and product lemma") {
    CHECK(to_double(gamma_bound_factor(1, 6)) == doctest::Approx(0.938476).epsilon(1e-6));
    CHECK(gamma_bound_factor(1, 6) == Rational(961, 1024));
    CHECK(gamma_bound_factor(4, 2) == 0);
    auto v = very_comb_check(1, 1);
    CHECK(v.product == doctest::Approx(0.288788).epsilon(1e-6));
    CHECK(v.bound == 0.25);
    CHECK(v.pass);
    CHECK(minimal_valid_k(1) == 1);
    CHECK(minimal_valid_k(2) == 2);
    CHECK(minimal_valid_k(3) == 2);
    for (int C : {1, 2, 3}) CHECK(very_comb_check(C, minimal_valid_k(C)).pass);
    CHECK_THROWS_AS(very_comb_check(2, 1), Error);
}

TEST_CASE("gamma report on a graphs run") {
    auto g = make_class("graphs");
    ToySchedule sched(extension_axioms(*g, 1, 3));
    auto run = build_toy(make_graph(1, {}), *g, sched, 8);
    auto rows = gamma_report(run, sched, 20000, 3);
    for (const auto& r : rows) CHECK_MESSAGE(r.pass, r.n << " " << r.type_id << " " << r.estimate << " " << r.bound);
    // a stage where the witnessed formula holds for every sample
    GraphAxioms ax;
    auto s0 = init_stage0(make_graph(1, {}), *g);
    auto s1 = run_stage(s0, ax.nonadj, *g);
    auto e = gamma_estimate(s1, ax.nonadj, 2000, 1);
    CHECK(e.gamma.p_hat == 1);
}

TEST_CASE("erdos_renyi_baseline") {
    CHECK(erdos_renyi_baseline(6, 0, 1).relation(0).size() == 0);
    CHECK(erdos_renyi_baseline(6, 1, 1).relation(0).size() == 30);
    auto e = run_bernoulli(20000, 4, [](std::uint64_t i, Rng&) {
        return erdos_renyi_baseline(2, Rational(1, 2), i).relation(0).size() == 2;
    });
    CHECK(std::abs(e.p_hat - 0.5) <= 3 * e.sigma);
    CHECK_THROWS_AS(erdos_renyi_baseline(2, Rational(3, 2), 1), Error);
}

}
