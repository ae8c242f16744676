#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "invforge/structure.hpp"

namespace invforge {

// First-order formulas over a relational signature; variables are naturals.
struct Formula {
    enum class Kind { True, False, Atom, Eq, Not, And, Or, Exists, InfiniteAnd, TermAtom };
    Kind kind = Kind::True;
    std::string rel;            // Atom, TermAtom (symbol name)
    std::vector<int> vars;      // Atom args, Eq pair, Exists bound var in vars[0]
    std::vector<Formula> kids;

    static Formula top() { return Formula{}; }
    static Formula bottom() { return Formula{Kind::False, {}, {}, {}}; }
    static Formula atom(std::string r, std::vector<int> v) { return Formula{Kind::Atom, std::move(r), std::move(v), {}}; }
    static Formula eq(int a, int b) { return Formula{Kind::Eq, {}, {a, b}, {}}; }
    static Formula neg(Formula f) { return Formula{Kind::Not, {}, {}, {std::move(f)}}; }
    static Formula conj(std::vector<Formula> fs) { return Formula{Kind::And, {}, {}, std::move(fs)}; }
    static Formula disj(std::vector<Formula> fs) { return Formula{Kind::Or, {}, {}, std::move(fs)}; }
    static Formula exists(int v, Formula f) { return Formula{Kind::Exists, {}, {v}, {std::move(f)}}; }
    // Placeholders that exist only so unsupported input can be rejected.
    static Formula infinite_conj() { return Formula{Kind::InfiniteAnd, {}, {}, {}}; }
    static Formula term_atom(std::string sym, std::vector<int> v) { return Formula{Kind::TermAtom, std::move(sym), std::move(v), {}}; }

    bool quantifier_free() const {
        if (kind == Kind::Exists || kind == Kind::InfiniteAnd) return false;
        for (const auto& k : kids)
            if (!k.quantifier_free()) return false;
        return true;
    }

    std::set<int> free_vars() const {
        std::set<int> out;
        switch (kind) {
            case Kind::Atom:
            case Kind::Eq:
            case Kind::TermAtom:
                out.insert(vars.begin(), vars.end());
                break;
            case Kind::Exists: {
                out = kids[0].free_vars();
                out.erase(vars[0]);
                break;
            }
            default:
                for (const auto& k : kids) {
                    auto s = k.free_vars();
                    out.insert(s.begin(), s.end());
                }
        }
        return out;
    }

    int max_var() const {
        int m = -1;
        for (int v : vars) m = std::max(m, v);
        for (const auto& k : kids) m = std::max(m, k.max_var());
        return m;
    }

    std::string str() const {
        auto vs = [&](const std::vector<int>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + ("x" + std::to_string(v[i]));
            return s;
        };
        auto join = [&](const char* op) {
            std::string s = "(";
            for (std::size_t i = 0; i < kids.size(); ++i) s += (i ? op : "") + kids[i].str();
            return s + ")";
        };
        switch (kind) {
            case Kind::True: return "T";
            case Kind::False: return "F";
            case Kind::Atom: return rel + "(" + vs(vars) + ")";
            case Kind::Eq: return "x" + std::to_string(vars[0]) + "=x" + std::to_string(vars[1]);
            case Kind::Not: return "~" + kids[0].str();
            case Kind::And: return join("&");
            case Kind::Or: return join("|");
            case Kind::Exists: return "Ex" + std::to_string(vars[0]) + "." + kids[0].str();
            case Kind::InfiniteAnd: return "BigAnd";
            case Kind::TermAtom: return rel + "[" + vs(vars) + "]";
        }
        return "?";
    }
};

// Evaluates f in s under an assignment (variable -> element index).
inline bool evaluate(const FinStructure& s, const Formula& f, std::vector<int>& assign) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::True: return true;
        case K::False: return false;
        case K::Atom: {
            int r = s.rel_index(f.rel);
            std::vector<int> t;
            for (int v : f.vars) t.push_back(assign.at(v));
            return s.holds(r, t);
        }
        case K::Eq: return assign.at(f.vars[0]) == assign.at(f.vars[1]);
        case K::Not: return !evaluate(s, f.kids[0], assign);
        case K::And:
            for (const auto& k : f.kids)
                if (!evaluate(s, k, assign)) return false;
            return true;
        case K::Or:
            for (const auto& k : f.kids)
                if (evaluate(s, k, assign)) return true;
            return false;
        case K::Exists: {
            int v = f.vars[0];
            if (static_cast<int>(assign.size()) <= v) assign.resize(v + 1, -1);
            int saved = assign[v];
            bool found = false;
            for (std::size_t e = 0; e < s.size() && !found; ++e) {
                assign[v] = static_cast<int>(e);
                found = evaluate(s, f.kids[0], assign);
            }
            assign[v] = saved;
            return found;
        }
        case K::InfiniteAnd:
        case K::TermAtom:
            throw Error(ErrorKind::UnsupportedFormula, "cannot evaluate " + f.str());
    }
    return false;
}

}  // namespace invforge
