#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "invforge/structure.hpp"

namespace invforge {

// Complete quantifier-free type stored as an atom truth table.
// Atoms of relation r occupy k^arity consecutive slots, tuples in mixed-radix order.
class QfType {
public:
    QfType() = default;
    QfType(Signature sig, int k) : sig_(std::move(sig)), k_(k), eq_(k) {
        for (int i = 0; i < k; ++i) eq_[i] = i;
        std::size_t off = 0;
        for (const auto& r : sig_.relations()) {
            offsets_.push_back(off);
            off += ipow(k, r.arity);
        }
        atoms_.assign(off, 0);
    }

    const Signature& signature() const { return sig_; }
    int var_count() const { return k_; }
    bool non_redundant() const {
        for (int i = 0; i < k_; ++i)
            if (eq_[i] != i) return false;
        return true;
    }
    // eq_rep(i) = least j with x_j = x_i.
    int eq_rep(int i) const { return eq_[i]; }
    void set_equal(int i, int j) {
        int lo = std::min(eq_[i], eq_[j]);
        int a = eq_[i], b = eq_[j];
        for (int v = 0; v < k_; ++v)
            if (eq_[v] == a || eq_[v] == b) eq_[v] = lo;
    }

    bool atom(int rel, const std::vector<int>& vars) const { return atoms_[slot(rel, vars)] != 0; }
    bool atom(const std::string& name, const std::vector<int>& vars) const { return atom(rel_or_throw(name), vars); }
    void set_atom(int rel, const std::vector<int>& vars, bool v) { atoms_[slot(rel, vars)] = v ? 1 : 0; }

    const std::vector<std::uint8_t>& raw_atoms() const { return atoms_; }
    std::size_t slot_base(int rel) const { return offsets_[rel]; }

    bool operator==(const QfType& o) const {
        return k_ == o.k_ && eq_ == o.eq_ && atoms_ == o.atoms_ && sig_ == o.sig_;
    }
    bool operator!=(const QfType& o) const { return !(*this == o); }

    // Canonical byte key for hashing and ordering; assumes a shared signature.
    std::string key() const {
        std::string s;
        s.reserve(atoms_.size() + k_ + 1);
        s.push_back(static_cast<char>(k_));
        for (int e : eq_) s.push_back(static_cast<char>(e));
        for (auto a : atoms_) s.push_back(a ? '1' : '0');
        return s;
    }

    static std::size_t ipow(int b, int e) {
        std::size_t r = 1;
        for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
        return r;
    }

private:
    int rel_or_throw(const std::string& name) const {
        int r = sig_.index_of(name);
        if (r < 0) throw Error(ErrorKind::SignatureMismatch, "no relation " + name);
        return r;
    }
    std::size_t slot(int rel, const std::vector<int>& vars) const {
        std::size_t s = 0;
        for (int v : vars) {
            if (v < 0 || v >= k_) throw Error(ErrorKind::IndexOutOfRange, "variable index out of range");
            s = s * k_ + v;
        }
        return offsets_[rel] + s;
    }

    Signature sig_;
    int k_ = 0;
    std::vector<int> eq_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint8_t> atoms_;
};

// Calls f(vars) for every tuple in {0..k-1}^arity, mixed-radix order.
template <class F>
void for_each_var_tuple(int k, int arity, F&& f) {
    std::vector<int> t(arity, 0);
    if (k == 0 && arity > 0) return;
    while (true) {
        f(t);
        int i = arity - 1;
        while (i >= 0 && ++t[i] == k) t[i--] = 0;
        if (i < 0) return;
    }
}

inline QfType qf_type_of_idx(const FinStructure& s, const std::vector<int>& elems) {
    int k = static_cast<int>(elems.size());
    QfType q(s.signature(), k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < i; ++j)
            if (elems[i] == elems[j]) {
                q.set_equal(i, j);
                break;
            }
    std::vector<int> img;
    for (std::size_t r = 0; r < s.signature().size(); ++r) {
        for_each_var_tuple(k, s.signature()[r].arity, [&](const std::vector<int>& vars) {
            img.resize(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i) img[i] = elems[vars[i]];
            if (s.holds(static_cast<int>(r), img)) q.set_atom(static_cast<int>(r), vars, true);
        });
    }
    return q;
}

inline QfType qf_type_of(const FinStructure& s, const std::vector<std::string>& tuple) {
    std::vector<int> idx;
    for (const auto& l : tuple) idx.push_back(s.index_of(l));
    return qf_type_of_idx(s, idx);
}

inline QfType restrict_language(const QfType& q, const std::set<int>& keep_layers) {
    std::vector<RelationSymbol> rels;
    std::vector<int> kept;
    int layers = 0;
    for (int l : keep_layers) layers = std::max(layers, l + 1);
    for (std::size_t r = 0; r < q.signature().size(); ++r) {
        if (keep_layers.count(q.signature()[r].layer)) {
            rels.push_back(q.signature()[r]);
            kept.push_back(static_cast<int>(r));
        }
    }
    if (keep_layers.empty()) layers = 0;
    QfType out(Signature(rels, layers), q.var_count());
    for (int i = 0; i < q.var_count(); ++i) out.set_equal(i, q.eq_rep(i));
    for (std::size_t nr = 0; nr < kept.size(); ++nr) {
        for_each_var_tuple(q.var_count(), rels[nr].arity, [&](const std::vector<int>& vars) {
            out.set_atom(static_cast<int>(nr), vars, q.atom(kept[nr], vars));
        });
    }
    return out;
}

// Keeps layers 0..count-1.
inline QfType restrict_to_layers(const QfType& q, int count) {
    std::set<int> keep;
    for (int i = 0; i < count; ++i) keep.insert(i);
    return restrict_language(q, keep);
}

inline QfType restrict_vars(const QfType& q, const std::vector<int>& sub) {
    int k = static_cast<int>(sub.size());
    std::set<int> seen;
    for (int v : sub) {
        if (v < 0 || v >= q.var_count()) throw Error(ErrorKind::IndexOutOfRange, "restrict_vars index out of range");
        if (!seen.insert(v).second) throw Error(ErrorKind::IndexOutOfRange, "restrict_vars repeated index");
    }
    QfType out(q.signature(), k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < i; ++j)
            if (q.eq_rep(sub[i]) == q.eq_rep(sub[j])) {
                out.set_equal(i, j);
                break;
            }
    std::vector<int> src;
    for (std::size_t r = 0; r < q.signature().size(); ++r) {
        for_each_var_tuple(k, q.signature()[r].arity, [&](const std::vector<int>& vars) {
            src.resize(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i) src[i] = sub[vars[i]];
            out.set_atom(static_cast<int>(r), vars, q.atom(static_cast<int>(r), src));
        });
    }
    return out;
}

// The structure on variables 0..k-1 (one element per equality class) realizing q.
inline FinStructure type_to_structure(const QfType& q) {
    FinStructure s(q.signature());
    std::vector<int> elem(q.var_count());
    for (int i = 0; i < q.var_count(); ++i) {
        if (q.eq_rep(i) == i) elem[i] = s.add_element(std::to_string(i));
        else elem[i] = elem[q.eq_rep(i)];
    }
    std::vector<int> img;
    for (std::size_t r = 0; r < q.signature().size(); ++r) {
        for_each_var_tuple(q.var_count(), q.signature()[r].arity, [&](const std::vector<int>& vars) {
            if (!q.atom(static_cast<int>(r), vars)) return;
            img.resize(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i) img[i] = elem[vars[i]];
            s.add_tuple(static_cast<int>(r), img);
        });
    }
    s.normalize();
    return s;
}

}  // namespace invforge
