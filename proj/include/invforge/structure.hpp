#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "invforge/error.hpp"

namespace invforge {

struct RelationSymbol {
    std::string name;
    int arity = 1;
    int layer = 0;
    bool operator==(const RelationSymbol&) const = default;
};

// A relational signature split into layers; layer i holds the symbols new to L_i.
class Signature {
public:
    Signature() = default;
    Signature(std::vector<RelationSymbol> rels, int layers) : rels_(std::move(rels)), layers_(layers) {
        validate();
    }

    const std::vector<RelationSymbol>& relations() const { return rels_; }
    int layers() const { return layers_; }
    std::size_t size() const { return rels_.size(); }
    const RelationSymbol& operator[](std::size_t i) const { return rels_[i]; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < rels_.size(); ++i)
            if (rels_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    void add(RelationSymbol r) {
        rels_.push_back(std::move(r));
        if (rels_.back().layer >= layers_) layers_ = rels_.back().layer + 1;
        validate();
    }
    void set_layers(int n) {
        layers_ = n;
        validate();
    }

    bool operator==(const Signature&) const = default;

private:
    void validate() const {
        std::set<std::string> names;
        for (const auto& r : rels_) {
            if (r.arity < 1) throw Error(ErrorKind::SignatureMismatch, "relation " + r.name + " has arity < 1");
            if (r.layer < 0 || r.layer >= layers_)
                throw Error(ErrorKind::SignatureMismatch, "relation " + r.name + " outside layer range");
            if (!names.insert(r.name).second)
                throw Error(ErrorKind::SignatureMismatch, "duplicate relation name " + r.name);
        }
    }

    std::vector<RelationSymbol> rels_;
    int layers_ = 0;
};

// Flat sorted tuple storage; tuples are element indices.
class TupleSet {
public:
    explicit TupleSet(int arity = 1) : arity_(arity) {}

    int arity() const { return arity_; }
    std::size_t size() const {
        normalize();
        return data_.size() / arity_;
    }

    void insert(const std::uint32_t* t) {
        data_.insert(data_.end(), t, t + arity_);
        sorted_ = false;
    }

    bool contains(const std::uint32_t* t) const {
        normalize();
        std::size_t lo = 0, hi = data_.size() / arity_;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            int c = cmp(&data_[mid * arity_], t);
            if (c == 0) return true;
            if (c < 0) lo = mid + 1;
            else hi = mid;
        }
        return false;
    }

    std::vector<std::vector<std::uint32_t>> tuples() const {
        normalize();
        std::vector<std::vector<std::uint32_t>> out;
        for (std::size_t i = 0; i < data_.size(); i += arity_)
            out.emplace_back(data_.begin() + i, data_.begin() + i + arity_);
        return out;
    }

    // Sorts and dedups; call before sharing across threads.
    void normalize() const {
        if (sorted_) return;
        std::size_t n = data_.size() / arity_;
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return cmp(&data_[a * arity_], &data_[b * arity_]) < 0; });
        std::vector<std::uint32_t> out;
        out.reserve(data_.size());
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t* t = &data_[idx[k] * arity_];
            if (!out.empty() && cmp(&out[out.size() - arity_], t) == 0) continue;
            out.insert(out.end(), t, t + arity_);
        }
        data_.swap(out);
        sorted_ = true;
    }

    bool operator==(const TupleSet& o) const {
        normalize();
        o.normalize();
        return arity_ == o.arity_ && data_ == o.data_;
    }

private:
    int cmp(const std::uint32_t* a, const std::uint32_t* b) const {
        for (int i = 0; i < arity_; ++i) {
            if (a[i] < b[i]) return -1;
            if (a[i] > b[i]) return 1;
        }
        return 0;
    }

    int arity_;
    mutable std::vector<std::uint32_t> data_;
    mutable bool sorted_ = true;
};

class FinStructure {
public:
    FinStructure() = default;
    explicit FinStructure(Signature sig) : sig_(std::move(sig)) {
        for (const auto& r : sig_.relations()) rels_.emplace_back(r.arity);
    }

    const Signature& signature() const { return sig_; }
    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }

    int add_element(const std::string& label) {
        if (index_.count(label)) throw Error(ErrorKind::UnknownElement, "duplicate element label " + label);
        index_[label] = static_cast<int>(labels_.size());
        labels_.push_back(label);
        return static_cast<int>(labels_.size()) - 1;
    }

    bool has_element(const std::string& label) const { return index_.count(label) > 0; }

    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) throw Error(ErrorKind::UnknownElement, "no element " + label);
        return it->second;
    }

    int rel_index(const std::string& name) const {
        int r = sig_.index_of(name);
        if (r < 0) throw Error(ErrorKind::SignatureMismatch, "no relation " + name);
        return r;
    }

    void add_tuple(int rel, const std::vector<int>& t) {
        if (static_cast<int>(t.size()) != sig_[rel].arity)
            throw Error(ErrorKind::SignatureMismatch, "tuple arity mismatch for " + sig_[rel].name);
        std::uint32_t buf[16];
        if (t.size() > 16) throw Error(ErrorKind::SignatureMismatch, "arity above 16 unsupported");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] < 0 || t[i] >= static_cast<int>(size()))
                throw Error(ErrorKind::UnknownElement, "element index out of range");
            buf[i] = static_cast<std::uint32_t>(t[i]);
        }
        rels_[rel].insert(buf);
    }
    void add_tuple(const std::string& name, const std::vector<std::string>& t) {
        std::vector<int> idx;
        for (const auto& l : t) idx.push_back(index_of(l));
        add_tuple(rel_index(name), idx);
    }
    // Adds (a,b) and (b,a).
    void add_sym(int rel, int a, int b) {
        add_tuple(rel, {a, b});
        add_tuple(rel, {b, a});
    }

    bool holds(int rel, const std::vector<int>& t) const {
        std::uint32_t buf[16];
        for (std::size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<std::uint32_t>(t[i]);
        return rels_[rel].contains(buf);
    }
    bool holds(int rel, int a, int b) const {
        std::uint32_t buf[2] = {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
        return rels_[rel].contains(buf);
    }

    const TupleSet& relation(int rel) const { return rels_[rel]; }

    void normalize() const {
        for (const auto& r : rels_) r.normalize();
    }

    // Same signature, same element labels (as sets), same relations under label matching.
    bool same_as(const FinStructure& o) const {
        if (!(sig_ == o.sig_) || size() != o.size()) return false;
        std::vector<int> map(size());
        for (std::size_t i = 0; i < size(); ++i) {
            if (!o.has_element(labels_[i])) return false;
            map[i] = o.index_of(labels_[i]);
        }
        for (std::size_t r = 0; r < rels_.size(); ++r) {
            if (rels_[r].size() != o.rels_[r].size()) return false;
            for (const auto& t : rels_[r].tuples()) {
                std::vector<int> u;
                for (auto e : t) u.push_back(map[e]);
                if (!o.holds(static_cast<int>(r), u)) return false;
            }
        }
        return true;
    }

private:
    Signature sig_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
    std::vector<TupleSet> rels_;
};

inline FinStructure induced_substructure(const FinStructure& s, const std::vector<std::string>& subset) {
    FinStructure out(s.signature());
    std::vector<int> old_to_new(s.size(), -1);
    for (const auto& l : subset) {
        int i = s.index_of(l);
        if (old_to_new[i] >= 0) continue;
        old_to_new[i] = out.add_element(l);
    }
    for (std::size_t r = 0; r < s.signature().size(); ++r) {
        for (const auto& t : s.relation(static_cast<int>(r)).tuples()) {
            std::vector<int> u;
            bool inside = true;
            for (auto e : t) {
                if (old_to_new[e] < 0) {
                    inside = false;
                    break;
                }
                u.push_back(old_to_new[e]);
            }
            if (inside) out.add_tuple(static_cast<int>(r), u);
        }
    }
    out.normalize();
    return out;
}

// Graph helpers used throughout tests and classes.
inline Signature graph_signature() { return Signature({{"E", 2, 0}}, 1); }

inline FinStructure make_graph(int n, const std::vector<std::pair<int, int>>& edges, const Signature& sig = graph_signature()) {
    FinStructure g(sig);
    for (int i = 0; i < n; ++i) g.add_element(std::to_string(i));
    int e = g.rel_index("E");
    for (auto [a, b] : edges) g.add_sym(e, a, b);
    g.normalize();
    return g;
}

}  // namespace invforge
