#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>

#include "invforge/qftype.hpp"
#include "invforge/rational.hpp"

namespace invforge {

// Literal over a tuple plus the new element y; argument kY stands for y.
struct Literal {
    static constexpr int kY = -1;
    std::string rel;
    std::vector<int> args;
    bool positive = true;
};

// Conjunction of literals, the shape of demand handed to canonical_witness.
struct Demand {
    std::vector<Literal> lits;

    // All atoms of ext that mention its last variable.
    static Demand from_extension(const QfType& ext) {
        Demand d;
        int y = ext.var_count() - 1;
        for (std::size_t r = 0; r < ext.signature().size(); ++r) {
            for_each_var_tuple(ext.var_count(), ext.signature()[r].arity, [&](const std::vector<int>& vars) {
                if (std::find(vars.begin(), vars.end(), y) == vars.end()) return;
                Literal l;
                l.rel = ext.signature()[r].name;
                for (int v : vars) l.args.push_back(v == y ? Literal::kY : v);
                l.positive = ext.atom(static_cast<int>(r), vars);
                d.lits.push_back(l);
            });
        }
        return d;
    }
};

class AmalgamationClass {
public:
    virtual ~AmalgamationClass() = default;

    virtual std::string name() const = 0;
    virtual Signature signature_at(int layers) const = 0;
    virtual std::optional<int> splitting_order() const { return std::nullopt; }
    virtual bool constant_free() const { return true; }

    // Empty string when s is in the age, otherwise the violated condition.
    virtual std::string violation(const FinStructure& s) const = 0;
    bool contains(const FinStructure& s) const { return violation(s).empty(); }

    virtual FinStructure strong_amalgam(const FinStructure& m, const FinStructure& n,
                                        const std::vector<std::string>& over) const = 0;
    virtual FinStructure canonical_witness(const FinStructure& s, const std::vector<std::string>& tuple,
                                           const Demand& demand, const std::string& new_label) const = 0;
    virtual QfType iterated_duplicate(const QfType& q, const std::vector<int>& multiplicities) const = 0;
    virtual QfType extend_language(const QfType& q, int to_layers) const = 0;
    virtual std::pair<int, QfType> split_type(const QfType& q) const {
        (void)q;
        throw Error(ErrorKind::NoSplittingDeclared, name() + " declares no splitting order");
    }

    // Every structure on k labelled points in the age over signature_at(layers),
    // used to build type catalogs. Order is deterministic.
    virtual std::vector<FinStructure> enumerate_structures(int layers, int k) const = 0;

    // Names of the policies in effect, for manifests.
    virtual std::string witness_policy() const = 0;
    virtual std::string duplicate_policy() const = 0;
    virtual std::string extension_policy() const = 0;
    virtual std::string split_policy() const { return "none"; }
};

namespace detail {

inline void check_amalgam_inputs(const AmalgamationClass& c, const FinStructure& m, const FinStructure& n,
                                 const std::vector<std::string>& over) {
    if (!(m.signature() == n.signature())) throw Error(ErrorKind::SignatureMismatch, "amalgam inputs differ in signature");
    if (!c.contains(m) || !c.contains(n)) throw Error(ErrorKind::NotInAge, "amalgam input outside the age");
    for (const auto& l : over)
        if (!m.has_element(l) || !n.has_element(l)) throw Error(ErrorKind::BadEmbedding, "shared element " + l + " missing");
    if (!induced_substructure(m, over).same_as(induced_substructure(n, over)))
        throw Error(ErrorKind::BadEmbedding, "shared part differs between inputs");
    std::set<std::string> ov(over.begin(), over.end());
    for (const auto& l : n.labels())
        if (!ov.count(l) && m.has_element(l)) throw Error(ErrorKind::BadEmbedding, "label " + l + " clashes");
}

// Disjoint union over the shared part: m's elements first, then n's new ones.
inline FinStructure glue(const FinStructure& m, const FinStructure& n, std::vector<int>& n_map) {
    FinStructure out(m.signature());
    for (const auto& l : m.labels()) out.add_element(l);
    n_map.assign(n.size(), -1);
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (m.has_element(n.label(i))) n_map[i] = m.index_of(n.label(i));
        else n_map[i] = out.add_element(n.label(i));
    }
    for (std::size_t r = 0; r < m.signature().size(); ++r) {
        for (const auto& t : m.relation(static_cast<int>(r)).tuples())
            out.add_tuple(static_cast<int>(r), std::vector<int>(t.begin(), t.end()));
        for (const auto& t : n.relation(static_cast<int>(r)).tuples()) {
            std::vector<int> u;
            for (auto e : t) u.push_back(n_map[e]);
            out.add_tuple(static_cast<int>(r), u);
        }
    }
    return out;
}

inline std::vector<int> copy_elements(const FinStructure& from, FinStructure& to) {
    std::vector<int> idx;
    for (const auto& l : from.labels()) idx.push_back(to.add_element(l));
    for (std::size_t r = 0; r < from.signature().size(); ++r)
        for (const auto& t : from.relation(static_cast<int>(r)).tuples())
            to.add_tuple(static_cast<int>(r), std::vector<int>(t.begin(), t.end()));
    return idx;
}

}  // namespace detail

// Graph-like classes: every relation is binary, symmetric and irreflexive,
// optionally triangle-free in each relation separately.
class LayeredGraphClass : public AmalgamationClass {
public:
    explicit LayeredGraphClass(bool triangle_free) : tf_(triangle_free) {}

    std::string violation(const FinStructure& s) const override {
        for (const auto& r : s.signature().relations()) {
            if (r.arity != 2) throw Error(ErrorKind::SignatureMismatch, "relation " + r.name + " is not binary");
            if (!relation_allowed(r)) throw Error(ErrorKind::SignatureMismatch, "relation " + r.name + " not in " + name());
        }
        int n = static_cast<int>(s.size());
        for (std::size_t r = 0; r < s.signature().size(); ++r) {
            const auto& nm = s.signature()[r].name;
            for (const auto& t : s.relation(static_cast<int>(r)).tuples()) {
                if (t[0] == t[1]) return "loop " + nm + "(" + s.label(t[0]) + "," + s.label(t[0]) + ")";
                if (!s.holds(static_cast<int>(r), t[1], t[0]))
                    return "asymmetric " + nm + "(" + s.label(t[0]) + "," + s.label(t[1]) + ")";
            }
            if (!tf_) continue;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    if (!s.holds(static_cast<int>(r), a, b)) continue;
                    for (int c = b + 1; c < n; ++c)
                        if (s.holds(static_cast<int>(r), a, c) && s.holds(static_cast<int>(r), b, c))
                            return "forbidden substructure: triangle " + s.label(a) + "," + s.label(b) + "," + s.label(c) +
                                   " in " + nm;
                }
        }
        return "";
    }

    FinStructure strong_amalgam(const FinStructure& m, const FinStructure& n,
                                const std::vector<std::string>& over) const override {
        detail::check_amalgam_inputs(*this, m, n, over);
        std::vector<int> n_map;
        auto out = detail::glue(m, n, n_map);
        out.normalize();
        return out;
    }

    FinStructure canonical_witness(const FinStructure& s, const std::vector<std::string>& tuple, const Demand& demand,
                                   const std::string& new_label) const override {
        FinStructure out(s.signature());
        detail::copy_elements(s, out);
        int y = out.add_element(new_label);
        std::vector<int> tidx;
        for (const auto& l : tuple) tidx.push_back(s.index_of(l));
        std::map<std::pair<int, int>, bool> want;  // (rel, element) -> adjacency to y
        for (const auto& lit : demand.lits) {
            int r = out.rel_index(lit.rel);
            if (lit.args.size() != 2) throw Error(ErrorKind::UnsatisfiableDemand, "non-binary literal");
            int a = lit.args[0], b = lit.args[1];
            if (a == Literal::kY && b == Literal::kY) {
                if (lit.positive) throw Error(ErrorKind::UnsatisfiableDemand, "loop demanded on y");
                continue;
            }
            if (a != Literal::kY && b != Literal::kY) {
                if (s.holds(r, tidx.at(a), tidx.at(b)) != lit.positive)
                    throw Error(ErrorKind::UnsatisfiableDemand, "demand contradicts the tuple");
                continue;
            }
            int e = tidx.at(a == Literal::kY ? b : a);
            auto key = std::make_pair(r, e);
            auto it = want.find(key);
            if (it != want.end() && it->second != lit.positive)
                throw Error(ErrorKind::UnsatisfiableDemand, "contradictory literals on " + s.label(e));
            want[key] = lit.positive;
        }
        for (auto [key, pos] : want)
            if (pos) out.add_sym(key.first, key.second, y);
        out.normalize();
        std::string v = violation(out);
        if (!v.empty()) throw Error(ErrorKind::UnsatisfiableDemand, v);
        return out;
    }

    QfType iterated_duplicate(const QfType& q, const std::vector<int>& mult) const override {
        auto [orig, total] = dup_layout(q, mult);
        QfType out(q.signature(), total);
        for (std::size_t r = 0; r < q.signature().size(); ++r)
            for (int a = 0; a < total; ++a)
                for (int b = 0; b < total; ++b)
                    if (orig[a] != orig[b] && q.atom(static_cast<int>(r), {orig[a], orig[b]}))
                        out.set_atom(static_cast<int>(r), {a, b}, true);
        return out;
    }

    std::vector<FinStructure> enumerate_structures(int layers, int k) const override {
        Signature sig = signature_at(layers);
        int R = static_cast<int>(sig.size());
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) pairs.push_back({i, j});
        std::vector<FinStructure> out;
        std::size_t bits = pairs.size() * R;
        if (bits > 20) throw Error(ErrorKind::StageBudgetExceeded, "type catalog too large");
        for (unsigned long mask = 0; mask < (1ul << bits); ++mask) {
            FinStructure s(sig);
            for (int i = 0; i < k; ++i) s.add_element(std::to_string(i));
            for (std::size_t p = 0; p < pairs.size(); ++p)
                for (int r = 0; r < R; ++r)
                    if (mask & (1ul << (p * R + r))) s.add_sym(r, pairs[p].first, pairs[p].second);
            s.normalize();
            if (contains(s)) out.push_back(std::move(s));
        }
        return out;
    }

    std::string witness_policy() const override { return "fresh-nonadjacent"; }
    std::string duplicate_policy() const override { return "duplicates-nonadjacent"; }
    std::string extension_policy() const override { return "new-layers-false"; }

protected:
    virtual bool relation_allowed(const RelationSymbol& r) const = 0;

    static std::pair<std::vector<int>, int> dup_layout(const QfType& q, const std::vector<int>& mult) {
        if (static_cast<int>(mult.size()) != q.var_count())
            throw Error(ErrorKind::IndexOutOfRange, "one multiplicity per variable expected");
        if (!q.non_redundant()) throw Error(ErrorKind::NotDuplicableInAge, "type is redundant");
        // Copy c of variable i sits at index i + c*k, so copy 0 keeps the original numbering.
        int k = q.var_count();
        int mx = 0;
        for (int m : mult) {
            if (m < 1) throw Error(ErrorKind::IndexOutOfRange, "multiplicity below 1");
            mx = std::max(mx, m);
        }
        std::vector<int> orig;
        for (int c = 0; c < mx; ++c)
            for (int i = 0; i < k; ++i)
                if (c < mult[i]) orig.push_back(i);
        return {orig, static_cast<int>(orig.size())};
    }

    bool tf_;
};

class GraphClass : public LayeredGraphClass {
public:
    explicit GraphClass(bool triangle_free) : LayeredGraphClass(triangle_free) {}
    std::string name() const override { return tf_ ? "triangle-free" : "graphs"; }
    Signature signature_at(int layers) const override {
        if (layers <= 0) return Signature({}, 0);
        return Signature({{"E", 2, 0}}, layers);
    }
    QfType extend_language(const QfType& q, int to_layers) const override {
        if (to_layers <= q.signature().layers()) return q;
        Signature sig = q.signature();
        sig.set_layers(to_layers);
        if (sig.size() == 0 && to_layers >= 1) sig = signature_at(to_layers);
        QfType out(sig, q.var_count());
        for (int i = 0; i < q.var_count(); ++i) out.set_equal(i, q.eq_rep(i));
        for (std::size_t r = 0; r < q.signature().size(); ++r)
            for_each_var_tuple(q.var_count(), 2, [&](const std::vector<int>& v) {
                out.set_atom(static_cast<int>(r), v, q.atom(static_cast<int>(r), v));
            });
        return out;
    }

protected:
    bool relation_allowed(const RelationSymbol& r) const override { return r.name == "E"; }
};

// Layers are disjoint copies of the base language; layer j holds relation E<j>.
class KaleidoscopeClass : public LayeredGraphClass {
public:
    explicit KaleidoscopeClass(bool triangle_free_base) : LayeredGraphClass(triangle_free_base) {}
    std::string name() const override { return tf_ ? "kaleidoscope:triangle-free" : "kaleidoscope:graphs"; }
    Signature signature_at(int layers) const override {
        std::vector<RelationSymbol> rels;
        for (int j = 0; j < layers; ++j) rels.push_back({layer_name(j), 2, j});
        return Signature(rels, std::max(layers, 0));
    }
    std::optional<int> splitting_order() const override { return 2; }
    static std::string layer_name(long long j) { return "E" + std::to_string(j); }

    QfType extend_language(const QfType& q, int to_layers) const override {
        int from = q.signature().layers();
        if (to_layers <= from) return q;
        Signature sig = q.signature();
        for (int j = from; j < to_layers; ++j) sig.add({layer_name(j), 2, j});
        QfType out(sig, q.var_count());
        copy_atoms(q, out);
        return out;
    }

    // One fresh layer per ordered 4-tuple u of distinct variables of the doubled
    // type; in that layer the only edge is u0-u1. Two ordered pairs with
    // different underlying sets are separated by the layer listing one pair
    // first and the other (or a spare variable) second.
    std::pair<int, QfType> split_type(const QfType& q) const override {
        int k = q.var_count();
        if (k < 2) throw Error(ErrorKind::OrderTooSmall, "split needs at least 2 variables");
        QfType dup = iterated_duplicate(q, std::vector<int>(k, 2));
        int n = 2 * k;
        int J = q.signature().layers();
        Signature sig = q.signature();
        std::vector<std::array<int, 4>> us;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        if (a != b && a != c && a != d && b != c && b != d && c != d) us.push_back({a, b, c, d});
        for (std::size_t i = 0; i < us.size(); ++i) sig.add({layer_name(J + static_cast<long long>(i)), 2, J + static_cast<int>(i)});
        QfType out(sig, n);
        copy_atoms(dup, out);
        for (std::size_t i = 0; i < us.size(); ++i) {
            int r = static_cast<int>(q.signature().size() + i);
            out.set_atom(r, {us[i][0], us[i][1]}, true);
            out.set_atom(r, {us[i][1], us[i][0]}, true);
        }
        return {J + static_cast<int>(us.size()), out};
    }

    std::string split_policy() const override { return "one-layer-per-ordered-4-tuple"; }

protected:
    bool relation_allowed(const RelationSymbol& r) const override {
        return r.name.size() > 1 && r.name[0] == 'E' && r.name.find_first_not_of("0123456789", 1) == std::string::npos;
    }

private:
    static void copy_atoms(const QfType& from, QfType& to) {
        for (int i = 0; i < from.var_count(); ++i) to.set_equal(i, from.eq_rep(i));
        for (std::size_t r = 0; r < from.signature().size(); ++r)
            for_each_var_tuple(from.var_count(), 2, [&](const std::vector<int>& v) {
                to.set_atom(static_cast<int>(r), v, from.atom(static_cast<int>(r), v));
            });
    }
};

// A one-point extension axiom: forall x (base(x) -> exists y ext(x,y)).
struct ExtensionAxiom {
    int arity = 0;
    QfType base;
    QfType ext;
    std::string id;
};

inline std::vector<QfType> type_catalog(const AmalgamationClass& c, int layers, int k) {
    std::vector<QfType> out;
    std::vector<int> id(k);
    for (int i = 0; i < k; ++i) id[i] = i;
    for (const auto& s : c.enumerate_structures(layers, k)) out.push_back(qf_type_of_idx(s, id));
    std::sort(out.begin(), out.end(), [](const QfType& a, const QfType& b) { return a.key() < b.key(); });
    return out;
}

// Ordered by arity, then base type, then extension type.
inline std::vector<ExtensionAxiom> extension_axioms(const AmalgamationClass& c, int layers, int max_arity) {
    std::vector<ExtensionAxiom> out;
    for (int l = 0; l <= max_arity; ++l) {
        std::vector<int> first(l);
        for (int i = 0; i < l; ++i) first[i] = i;
        auto exts = type_catalog(c, layers, l + 1);
        std::vector<std::pair<std::string, std::size_t>> order;
        for (std::size_t i = 0; i < exts.size(); ++i) order.push_back({restrict_vars(exts[i], first).key() + "|" + exts[i].key(), i});
        std::sort(order.begin(), order.end());
        int counter = 0;
        for (const auto& [key, i] : order) {
            ExtensionAxiom ax;
            ax.arity = l;
            ax.ext = exts[i];
            ax.base = restrict_vars(exts[i], first);
            ax.id = "ext" + std::to_string(l) + "_" + std::to_string(counter++);
            out.push_back(std::move(ax));
        }
    }
    return out;
}

}  // namespace invforge
