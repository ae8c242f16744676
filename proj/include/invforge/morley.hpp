#pragma once

#include <functional>
#include <map>

#include "invforge/formula.hpp"
#include "invforge/qftype.hpp"

namespace invforge {

// (forall x_0..x_{u-1}) (exists x_u)? body, with body quantifier-free.
struct PithyPi2Sentence {
    Formula body;
    int universal_vars = 0;
    bool has_existential = false;
};

inline bool satisfies(const FinStructure& s, const PithyPi2Sentence& ax) {
    int u = ax.universal_vars;
    int n = static_cast<int>(s.size());
    std::vector<int> assign(u + 1, 0);
    if (n == 0) return true;
    while (true) {
        bool ok;
        if (ax.has_existential) {
            ok = false;
            for (int y = 0; y < n && !ok; ++y) {
                assign[u] = y;
                ok = evaluate(s, ax.body, assign);
            }
        } else {
            ok = evaluate(s, ax.body, assign);
        }
        if (!ok) return false;
        int i = u - 1;
        while (i >= 0 && ++assign[i] == n) assign[i--] = 0;
        if (i < 0) return true;
    }
}

struct Pi2Expansion {
    Signature signature;
    std::vector<PithyPi2Sentence> axioms;
    // Subformula text -> relation name R_psi, with argument order = sorted free variables then w.
    std::map<std::string, std::string> relation_for;
    std::function<FinStructure(const FinStructure&)> expand;
};

namespace detail {

inline void check_finitary(const Signature& sig, const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::Atom: {
            int r = sig.index_of(f.rel);
            if (r < 0) throw Error(ErrorKind::UnsupportedFormula, "unknown relation " + f.rel);
            if (sig[r].arity != static_cast<int>(f.vars.size()))
                throw Error(ErrorKind::UnsupportedFormula, "arity mismatch in " + f.str());
            return;
        }
        case K::Not:
        case K::And:
        case K::Exists:
            for (const auto& k : f.kids) check_finitary(sig, k);
            return;
        case K::InfiniteAnd: throw Error(ErrorKind::UnsupportedFormula, "infinitary conjunction");
        case K::TermAtom: throw Error(ErrorKind::UnsupportedFormula, "constant or function symbol " + f.rel);
        default: throw Error(ErrorKind::UnsupportedFormula, "connective outside {not, and, exists}: " + f.str());
    }
}

inline void collect(const Formula& f, std::vector<const Formula*>& out, std::set<std::string>& seen) {
    for (const auto& k : f.kids) collect(k, out, seen);
    if (seen.insert(f.str()).second) out.push_back(&f);
}

// Renumbers variables of a formula via m.
inline Formula rename(const Formula& f, const std::map<int, int>& m) {
    Formula g = f;
    for (auto& v : g.vars) v = m.at(v);
    for (auto& k : g.kids) k = rename(k, m);
    return g;
}

inline Formula iff(Formula a, Formula b) {
    return Formula::conj({Formula::disj({Formula::neg(a), b}), Formula::disj({Formula::neg(b), a})});
}

}  // namespace detail

inline Pi2Expansion pithy_pi2_expansion(const Signature& sig, const std::vector<Formula>& formulas) {
    for (const auto& f : formulas) detail::check_finitary(sig, f);

    std::vector<const Formula*> subs;
    std::set<std::string> seen;
    for (const auto& f : formulas) detail::collect(f, subs, seen);

    Pi2Expansion out;
    out.signature = sig;
    int new_layer = sig.layers();
    std::map<std::string, std::vector<int>> fv_of;
    for (const Formula* f : subs) {
        auto fv = f->free_vars();
        std::string name = "R[" + f->str() + "]";
        out.relation_for[f->str()] = name;
        fv_of[f->str()] = std::vector<int>(fv.begin(), fv.end());
        out.signature.add({name, static_cast<int>(fv.size()) + 1, new_layer});
    }

    int w = -1;
    for (const auto& f : formulas) w = std::max(w, f.max_var());
    ++w;

    auto rel_atom = [&](const Formula& f, std::vector<int> args) {
        args.push_back(w);
        return Formula::atom(out.relation_for.at(f.str()), args);
    };

    // Builds a sentence: universals = sorted vars, then optional existential y.
    auto sentence = [&](const Formula& body, std::vector<int> universals, int y) {
        std::map<int, int> m;
        for (std::size_t i = 0; i < universals.size(); ++i) m[universals[i]] = static_cast<int>(i);
        if (y >= 0) m[y] = static_cast<int>(universals.size());
        PithyPi2Sentence s;
        s.body = detail::rename(body, m);
        s.universal_vars = static_cast<int>(universals.size());
        s.has_existential = y >= 0;
        return s;
    };

    using K = Formula::Kind;
    for (const Formula* f : subs) {
        const auto& fv = fv_of[f->str()];
        std::vector<int> univ = fv;
        univ.push_back(w);
        Formula lhs = rel_atom(*f, fv);
        switch (f->kind) {
            case K::Atom:
                out.axioms.push_back(sentence(detail::iff(lhs, *f), univ, -1));
                break;
            case K::Not:
                out.axioms.push_back(sentence(detail::iff(lhs, Formula::neg(rel_atom(f->kids[0], fv_of[f->kids[0].str()]))), univ, -1));
                break;
            case K::And: {
                std::vector<Formula> parts;
                for (const auto& k : f->kids) parts.push_back(rel_atom(k, fv_of[k.str()]));
                out.axioms.push_back(sentence(detail::iff(lhs, Formula::conj(parts)), univ, -1));
                break;
            }
            case K::Exists: {
                int y = f->vars[0];
                Formula inner = rel_atom(f->kids[0], fv_of[f->kids[0].str()]);
                // Forward direction needs the witness; backward direction is universal in y.
                out.axioms.push_back(sentence(Formula::disj({Formula::neg(lhs), inner}), univ, y));
                auto univ_y = univ;
                univ_y.push_back(y);
                out.axioms.push_back(sentence(Formula::disj({Formula::neg(inner), lhs}), univ_y, -1));
                break;
            }
            default: break;
        }
    }

    Signature full = out.signature;
    std::vector<Formula> keep(formulas);
    auto fv_copy = fv_of;
    std::vector<Formula> sub_copies;
    for (const Formula* f : subs) sub_copies.push_back(*f);
    auto names = out.relation_for;
    out.expand = [full, sub_copies, fv_copy, names, sig](const FinStructure& m) {
        if (!(m.signature() == sig)) throw Error(ErrorKind::SignatureMismatch, "expander input signature");
        FinStructure e(full);
        for (const auto& l : m.labels()) e.add_element(l);
        for (std::size_t r = 0; r < sig.size(); ++r)
            for (const auto& t : m.relation(static_cast<int>(r)).tuples())
                e.add_tuple(static_cast<int>(r), std::vector<int>(t.begin(), t.end()));
        int n = static_cast<int>(m.size());
        for (const auto& f : sub_copies) {
            const auto& fv = fv_copy.at(f.str());
            int rel = e.rel_index(names.at(f.str()));
            int k = static_cast<int>(fv.size());
            std::vector<int> a(k, 0);
            std::vector<int> assign(f.max_var() + 2, -1);
            if (n == 0) continue;
            while (true) {
                for (int i = 0; i < k; ++i) assign[fv[i]] = a[i];
                if (evaluate(m, f, assign)) {
                    std::vector<int> t = a;
                    t.push_back(0);
                    for (int wv = 0; wv < n; ++wv) {
                        t.back() = wv;
                        e.add_tuple(rel, t);
                    }
                }
                int i = k - 1;
                while (i >= 0 && ++a[i] == n) a[i--] = 0;
                if (i < 0) break;
            }
        }
        e.normalize();
        return e;
    };
    return out;
}

}  // namespace invforge
