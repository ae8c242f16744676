#include <doctest.h>

#include "invforge/density.hpp"
#include "invforge/morley.hpp"
#include "oracles.hpp"

using namespace invforge;

TEST_SUITE("core") {

TEST_CASE("qf_type_of reads atoms and equality") {
    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto q = qf_type_of(k3, {"0", "1"});
    CHECK(q.atom("E", {0, 1}));
    CHECK(q.atom("E", {1, 0}));
    CHECK_FALSE(q.atom("E", {0, 0}));
    CHECK(q.non_redundant());

    auto empty = qf_type_of(k3, {});
    CHECK(empty.var_count() == 0);
    CHECK(empty.raw_atoms().empty());

    auto rep = qf_type_of(k3, {"2", "2"});
    CHECK_FALSE(rep.non_redundant());
    CHECK_THROWS_AS(qf_type_of(k3, {"9"}), Error);
}

TEST_CASE("restrict_vars") {
    auto k2 = make_graph(2, {{0, 1}});
    auto edge = qf_type_of(k2, {"0", "1"});
    auto vertex = restrict_vars(edge, {0});
    CHECK(vertex == qf_type_of(make_graph(1, {}), {"0"}));
    CHECK(restrict_vars(edge, {0, 1}) == edge);
    CHECK_THROWS_AS(restrict_vars(edge, {2}), Error);
    CHECK_THROWS_AS(restrict_vars(edge, {0, 0}), Error);

    // idempotence on every tuple of a small graph
    auto p = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                auto t = qf_type_of_idx(p, {a, b, c});
                CHECK(restrict_vars(t, {0, 1, 2}) == t);
            }
}

TEST_CASE("restrict_language") {
    Signature sig({{"E0", 2, 0}, {"E1", 2, 1}}, 2);
    FinStructure s(sig);
    s.add_element("a");
    s.add_element("b");
    s.add_sym(0, 0, 1);
    s.normalize();
    auto q = qf_type_of(s, {"a", "b"});
    auto r = restrict_language(q, {0});
    CHECK(r.signature().size() == 1);
    CHECK(r.atom("E0", {0, 1}));
    CHECK(restrict_language(q, {0, 1}) == q);
}

TEST_CASE("induced_substructure") {
    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto k2 = induced_substructure(k3, {"0", "1"});
    CHECK(k2.same_as(make_graph(2, {{0, 1}})));
    CHECK(induced_substructure(k3, {"0", "1", "2"}).same_as(k3));
    auto p2 = make_graph(3, {{0, 1}, {1, 2}});
    auto two = induced_substructure(p2, {"0", "2"});
    CHECK(two.relation(0).size() == 0);
    CHECK_THROWS_AS(induced_substructure(p2, {"7"}), Error);
}

TEST_CASE("full_hom_density spot values") {
    auto k2 = make_graph(2, {{0, 1}});
    auto k3 = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto p2 = make_graph(3, {{0, 1}, {1, 2}});
    CHECK(full_hom_density(k2, k3).value() == Rational(2, 3));
    CHECK(full_hom_density(p2, k3).value() == Rational(2, 9));
    CHECK(full_hom_density(make_graph(1, {}), p2).value() == 1);
    CHECK_THROWS_AS(full_hom_density(k2, make_graph(0, {})), Error);
}

TEST_CASE("full_hom_density matches map enumeration on all small labeled graphs") {
    for (int k = 0; k <= 3; ++k)
        for (const auto& f : oracle::all_graphs(k))
            for (int n = 1; n <= 4; ++n)
                for (const auto& g : oracle::all_graphs(n)) {
                    auto d = full_hom_density(oracle::to_structure(f), oracle::to_structure(g));
                    CHECK(d.value() == oracle::tind(f, g));
                }
}

TEST_CASE("morleyization of a negated atom") {
    auto e = Formula::atom("E", {0, 1});
    auto exp = pithy_pi2_expansion(graph_signature(), {Formula::neg(e)});
    const auto& sig = exp.signature;
    REQUIRE(sig.size() == 3);
    int re = sig.index_of(exp.relation_for.at(e.str()));
    int rne = sig.index_of(exp.relation_for.at(Formula::neg(e).str()));
    REQUIRE(re >= 0);
    REQUIRE(rne >= 0);
    CHECK(sig[re].arity == 3);
    CHECK(sig[rne].arity == 3);
    CHECK(exp.axioms.size() == 2);
    CHECK(exp.axioms[1].universal_vars == 3);
    CHECK_FALSE(exp.axioms[1].has_existential);
}

TEST_CASE("morleyization of the empty list") {
    auto exp = pithy_pi2_expansion(graph_signature(), {});
    CHECK(exp.signature == graph_signature());
    CHECK(exp.axioms.empty());
}

TEST_CASE("morleyization expander on all 4-vertex graphs") {
    auto ex = Formula::exists(1, Formula::atom("E", {0, 1}));
    auto exp = pithy_pi2_expansion(graph_signature(), {ex});
    int r = exp.signature.index_of(exp.relation_for.at(ex.str()));
    for (int n = 1; n <= 4; ++n)
        for (const auto& g : oracle::all_graphs(n)) {
            auto m = exp.expand(oracle::to_structure(g));
            for (const auto& ax : exp.axioms) CHECK(satisfies(m, ax));
            for (int a = 0; a < n; ++a) {
                bool has_nb = false;
                for (int b = 0; b < n; ++b) has_nb = has_nb || g.adj(a, b);
                for (int w = 0; w < n; ++w) CHECK(m.holds(r, {a, w}) == has_nb);
            }
        }
}

TEST_CASE("morleyization rejects infinitary and term input") {
    CHECK_THROWS_AS(pithy_pi2_expansion(graph_signature(), {Formula::infinite_conj()}), Error);
    CHECK_THROWS_AS(pithy_pi2_expansion(graph_signature(), {Formula::term_atom("c", {0})}), Error);
}

}
