#pragma once

#include <optional>

#include "invforge/classes.hpp"

namespace invforge {

struct MetricThresholds {
    std::vector<Rational> values;

    void validate() const {
        if (values.empty() || values[0] != 0) throw Error(ErrorKind::ConfigError, "thresholds must start with 0");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i - 1] < values[i])) throw Error(ErrorKind::ConfigError, "thresholds must increase strictly");
        if (values.size() < 2) throw Error(ErrorKind::ConfigError, "thresholds need a positive value");
    }
};

struct RationalMetricSpace {
    int size = 0;
    std::vector<std::vector<Rational>> dist;

    explicit RationalMetricSpace(int n = 0) : size(n), dist(n, std::vector<Rational>(n, Rational(0))) {}
    void set(int a, int b, const Rational& d) { dist[a][b] = dist[b][a] = d; }

    bool is_metric() const {
        for (int a = 0; a < size; ++a) {
            if (dist[a][a] != 0) return false;
            for (int b = 0; b < size; ++b) {
                if (a != b && dist[a][b] <= 0) return false;
                if (dist[a][b] != dist[b][a]) return false;
                for (int c = 0; c < size; ++c)
                    if (dist[a][c] > dist[a][b] + dist[b][c]) return false;
            }
        }
        return true;
    }
};

inline std::string threshold_name(const Rational& q) { return "d_" + to_string(q); }

// (threshold, relation index) pairs sorted by threshold.
inline std::vector<std::pair<Rational, int>> thresholds_of(const Signature& sig) {
    std::vector<std::pair<Rational, int>> out;
    for (std::size_t r = 0; r < sig.size(); ++r) {
        const auto& rel = sig[r];
        if (rel.arity != 2 || rel.name.rfind("d_", 0) != 0)
            throw Error(ErrorKind::SignatureMismatch, "relation " + rel.name + " is not a distance threshold");
        Rational q;
        try {
            q = parse_rational(rel.name.substr(2));
        } catch (const Error&) {
            throw Error(ErrorKind::SignatureMismatch, "relation " + rel.name + " has no rational threshold");
        }
        if (q < 0) throw Error(ErrorKind::SignatureMismatch, "negative threshold in " + rel.name);
        out.push_back({q, static_cast<int>(r)});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

inline FinStructure metric_to_structure(const RationalMetricSpace& m, const MetricThresholds& t) {
    t.validate();
    std::vector<RelationSymbol> rels;
    for (const auto& q : t.values) rels.push_back({threshold_name(q), 2, 0});
    FinStructure s(Signature(rels, 1));
    for (int i = 0; i < m.size; ++i) s.add_element(std::to_string(i));
    for (int a = 0; a < m.size; ++a)
        for (int b = 0; b < m.size; ++b)
            for (std::size_t r = 0; r < t.values.size(); ++r)
                if (m.dist[a][b] <= t.values[r]) s.add_tuple(static_cast<int>(r), {a, b});
    s.normalize();
    return s;
}

// delta* then all-pairs shortest paths, as in the path-closure construction.
struct TmsCompletion {
    std::vector<std::string> labels;
    std::vector<std::vector<Rational>> delta;
    bool holds(const Rational& q, int a, int b) const { return delta[a][b] <= q; }
};

namespace detail {

inline std::vector<std::vector<Rational>> path_closure(const FinStructure& s) {
    auto ts = thresholds_of(s.signature());
    int n = static_cast<int>(s.size());
    Rational p = ts.empty() ? Rational(0) : ts.back().first;
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, Rational(0)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            Rational best = 2 * p;
            for (const auto& [q, r] : ts)
                if (s.holds(r, a, b)) {
                    if (q < best) best = q;
                    break;
                }
            d[a][b] = best;
        }
    for (int m = 0; m < n; ++m)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (d[a][m] + d[m][b] < d[a][b]) d[a][b] = d[a][m] + d[m][b];
    return d;
}

}  // namespace detail

// Empty when s is a model of the metric theory restricted to its thresholds.
inline std::string metric_violation(const FinStructure& s) {
    auto ts = thresholds_of(s.signature());
    int n = static_cast<int>(s.size());
    auto L = [&](int i) { return s.label(i); };
    for (int a = 0; a < n; ++a)
        for (const auto& [q, r] : ts)
            if (!s.holds(r, a, a)) return "reflexivity fails: not " + threshold_name(q) + "(" + L(a) + "," + L(a) + ")";
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (std::size_t i = 0; i < ts.size(); ++i) {
                bool h = s.holds(ts[i].second, a, b);
                if (h != s.holds(ts[i].second, b, a))
                    return "symmetry fails on " + threshold_name(ts[i].first) + "(" + L(a) + "," + L(b) + ")";
                if (h && i + 1 < ts.size() && !s.holds(ts[i + 1].second, a, b))
                    return "monotonicity fails on (" + L(a) + "," + L(b) + ") at " + threshold_name(ts[i].first);
            }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                for (const auto& [q, rq] : ts) {
                    if (!s.holds(rq, x, y)) continue;
                    for (const auto& [r, rr] : ts) {
                        if (!s.holds(rr, y, z)) continue;
                        for (const auto& [t, rt] : ts)
                            if (t >= q + r && !s.holds(rt, x, z))
                                return "triangle fails on triple (" + L(x) + "," + L(y) + "," + L(z) + "): " +
                                       threshold_name(q) + " + " + threshold_name(r) + " without " + threshold_name(t);
                        break;
                    }
                    break;
                }
    auto d = detail::path_closure(s);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (const auto& [q, r] : ts)
                if (!s.holds(r, a, b) && d[a][b] <= q)
                    return "path closure forces " + threshold_name(q) + "(" + L(a) + "," + L(b) + ")";
    return "";
}

inline TmsCompletion complete_to_TMS(const FinStructure& s) {
    auto v = metric_violation(s);
    if (!v.empty()) throw Error(ErrorKind::NotAMetricModel, v);
    TmsCompletion c;
    c.labels = s.labels();
    c.delta = detail::path_closure(s);
    return c;
}

// Least threshold holding on each pair; nullopt stands for +infinity.
inline std::vector<std::vector<std::optional<Rational>>> structure_to_metric(const FinStructure& s) {
    auto v = metric_violation(s);
    if (!v.empty()) throw Error(ErrorKind::NotAMetricModel, v);
    auto ts = thresholds_of(s.signature());
    int n = static_cast<int>(s.size());
    std::vector<std::vector<std::optional<Rational>>> out(n, std::vector<std::optional<Rational>>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (const auto& [q, r] : ts)
                if (s.holds(r, a, b)) {
                    out[a][b] = q;
                    break;
                }
    return out;
}

class MetricClass : public AmalgamationClass {
public:
    // Layer j introduces the thresholds in layers[j].
    explicit MetricClass(std::vector<std::vector<Rational>> layers = {{Rational(0), Rational(1)}, {Rational(2)}})
        : layers_(std::move(layers)) {
        MetricThresholds t{all_thresholds(static_cast<int>(layers_.size()))};
        t.validate();
    }

    std::string name() const override { return "metric"; }
    std::optional<int> splitting_order() const override { return 2; }

    std::vector<Rational> all_thresholds(int layers) const {
        std::vector<Rational> out;
        for (int j = 0; j < layers && j < static_cast<int>(layers_.size()); ++j)
            out.insert(out.end(), layers_[j].begin(), layers_[j].end());
        std::sort(out.begin(), out.end());
        return out;
    }

    Signature signature_at(int layers) const override {
        std::vector<RelationSymbol> rels;
        for (int j = 0; j < layers && j < static_cast<int>(layers_.size()); ++j)
            for (const auto& q : layers_[j]) rels.push_back({threshold_name(q), 2, j});
        return Signature(rels, std::max(layers, 0));
    }

    std::string violation(const FinStructure& s) const override { return metric_violation(s); }

    FinStructure strong_amalgam(const FinStructure& m, const FinStructure& n,
                                const std::vector<std::string>& over) const override {
        detail::check_amalgam_inputs(*this, m, n, over);
        auto dm = detail::path_closure(m);
        auto dn = detail::path_closure(n);
        auto ts = thresholds_of(m.signature());
        Rational p = ts.back().first;
        std::vector<int> n_map;
        auto out = detail::glue(m, n, n_map);
        std::set<std::string> ov(over.begin(), over.end());
        for (std::size_t x = 0; x < m.size(); ++x) {
            if (ov.count(m.label(x))) continue;
            for (std::size_t z = 0; z < n.size(); ++z) {
                if (ov.count(n.label(z))) continue;
                Rational d = 2 * p;
                for (const auto& o : over) {
                    Rational via = dm[x][m.index_of(o)] + dn[n.index_of(o)][z];
                    if (via < d) d = via;
                }
                for (const auto& [q, r] : ts)
                    if (d <= q) out.add_sym(r, static_cast<int>(x), n_map[z]);
            }
        }
        out.normalize();
        auto v = violation(out);
        if (!v.empty()) throw Error(ErrorKind::NotInAge, "amalgam: " + v);
        return out;
    }

    // Demanded distances sit at the top of their allowed interval; every other
    // distance is the largest value the triangle inequality allows, capped at 2p.
    FinStructure canonical_witness(const FinStructure& s, const std::vector<std::string>& tuple, const Demand& demand,
                                   const std::string& new_label) const override {
        auto ts = thresholds_of(s.signature());
        Rational p = ts.back().first;
        auto d = detail::path_closure(s);
        std::vector<int> tidx;
        for (const auto& l : tuple) tidx.push_back(s.index_of(l));
        int k = static_cast<int>(tidx.size());
        std::vector<std::optional<Rational>> upper(k), lower(k);
        for (const auto& lit : demand.lits) {
            if (lit.args.size() != 2) throw Error(ErrorKind::UnsatisfiableDemand, "non-binary literal");
            Rational q = threshold_of(s, lit.rel);
            int a = lit.args[0], b = lit.args[1];
            if (a == Literal::kY && b == Literal::kY) {
                if (!lit.positive) throw Error(ErrorKind::UnsatisfiableDemand, "y must be at distance 0 from itself");
                continue;
            }
            if (a != Literal::kY && b != Literal::kY) {
                if (s.holds(s.rel_index(lit.rel), tidx.at(a), tidx.at(b)) != lit.positive)
                    throw Error(ErrorKind::UnsatisfiableDemand, "demand contradicts the tuple");
                continue;
            }
            int i = a == Literal::kY ? b : a;
            if (lit.positive) {
                if (!upper[i] || q < *upper[i]) upper[i] = q;
            } else {
                if (!lower[i] || q > *lower[i]) lower[i] = q;
            }
        }
        int n = static_cast<int>(s.size());
        std::vector<Rational> row(n, 2 * p);
        for (int i = 0; i < k; ++i) {
            if (!upper[i] && !lower[i]) continue;
            Rational init = upper[i] ? *upper[i] : 2 * p;
            for (int w = 0; w < n; ++w)
                if (init + d[tidx[i]][w] < row[w]) row[w] = init + d[tidx[i]][w];
        }
        for (int i = 0; i < k; ++i) {
            const Rational& got = row[tidx[i]];
            if ((upper[i] && got > *upper[i]) || (lower[i] && got <= *lower[i]))
                throw Error(ErrorKind::UnsatisfiableDemand, "no distance to " + tuple[i] + " fits the demand");
        }
        FinStructure out(s.signature());
        detail::copy_elements(s, out);
        int y = out.add_element(new_label);
        for (const auto& [q, r] : ts) {
            out.add_tuple(r, {y, y});
            for (int w = 0; w < n; ++w)
                if (row[w] <= q) out.add_sym(r, w, y);
        }
        out.normalize();
        auto v = violation(out);
        if (!v.empty()) throw Error(ErrorKind::UnsatisfiableDemand, v);
        return out;
    }

    QfType iterated_duplicate(const QfType& q, const std::vector<int>& mult) const override {
        if (static_cast<int>(mult.size()) != q.var_count())
            throw Error(ErrorKind::IndexOutOfRange, "one multiplicity per variable expected");
        if (!q.non_redundant()) throw Error(ErrorKind::NotDuplicableInAge, "type is redundant");
        int k = q.var_count();
        auto base = detail::path_closure(type_to_structure(q));
        auto ts = thresholds_of(q.signature());
        int mx = 0;
        for (int m : mult) {
            if (m < 1) throw Error(ErrorKind::IndexOutOfRange, "multiplicity below 1");
            mx = std::max(mx, m);
        }
        std::vector<int> orig;
        for (int c = 0; c < mx; ++c)
            for (int i = 0; i < k; ++i)
                if (c < mult[i]) orig.push_back(i);
        int total = static_cast<int>(orig.size());
        std::vector<Rational> dup(k, smallest_positive(ts));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (i != j && 2 * base[i][j] < dup[i]) dup[i] = 2 * base[i][j];
        std::vector<std::vector<Rational>> D(total, std::vector<Rational>(total, Rational(0)));
        for (int a = 0; a < total; ++a)
            for (int b = 0; b < total; ++b)
                if (a != b) D[a][b] = orig[a] == orig[b] ? dup[orig[a]] : base[orig[a]][orig[b]];
        QfType out = type_from_distances(q.signature(), D);
        auto v = violation(type_to_structure(out));
        if (!v.empty()) throw Error(ErrorKind::NotDuplicableInAge, v);
        return out;
    }

    QfType extend_language(const QfType& q, int to_layers) const override {
        int from = q.signature().layers();
        if (to_layers <= from) return q;
        auto base = detail::path_closure(type_to_structure(q));
        Signature sig = q.signature();
        for (int j = from; j < to_layers; ++j) {
            if (j < static_cast<int>(layers_.size()))
                for (const auto& t : layers_[j])
                    if (sig.index_of(threshold_name(t)) < 0) sig.add({threshold_name(t), 2, j});
        }
        sig.set_layers(to_layers);
        int k = q.var_count();
        std::vector<std::vector<Rational>> D(k, std::vector<Rational>(k, Rational(0)));
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) D[a][b] = base[a][b];
        QfType out = type_from_distances(sig, D);
        for (int i = 0; i < k; ++i) out.set_equal(i, q.eq_rep(i));
        return out;
    }

    // Doubles every variable, moves all positive distances apart by a small
    // scale-and-code perturbation, then adds a layer of midpoint thresholds.
    std::pair<int, QfType> split_type(const QfType& q) const override {
        int k = q.var_count();
        if (k < 2) throw Error(ErrorKind::OrderTooSmall, "split needs at least 2 variables");
        QfType dup = iterated_duplicate(q, std::vector<int>(k, 2));
        auto D = detail::path_closure(type_to_structure(dup));
        auto ts = thresholds_of(q.signature());
        int n = 2 * k;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (D[a][b] == 0)
                    throw Error(ErrorKind::NotAMetricModel, "zero distance between distinct variables cannot be split");
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) pairs.push_back({a, b});
        Rational M = static_cast<int>(pairs.size());
        Rational eta(1, 4);
        std::vector<std::vector<Rational>> P;
        for (int attempt = 0; attempt < 200; ++attempt, eta /= 2) {
            P = D;
            for (std::size_t e = 0; e < pairs.size(); ++e) {
                auto [a, b] = pairs[e];
                P[a][b] = P[b][a] = D[a][b] * (1 - eta) + eta * eta * (M + static_cast<int>(e));
            }
            if (perturbation_ok(D, P, ts)) break;
        }
        std::vector<Rational> dists;
        for (auto [a, b] : pairs) dists.push_back(P[a][b]);
        std::sort(dists.begin(), dists.end());
        int J = q.signature().layers();
        Signature sig = q.signature();
        for (std::size_t i = 0; i + 1 < dists.size(); ++i) {
            Rational mid = (dists[i] + dists[i + 1]) / 2;
            if (sig.index_of(threshold_name(mid)) < 0) sig.add({threshold_name(mid), 2, J});
        }
        sig.set_layers(J + 1);
        return {J + 1, type_from_distances(sig, P)};
    }

    std::vector<FinStructure> enumerate_structures(int layers, int k) const override {
        auto ts = all_thresholds(layers);
        Signature sig = signature_at(layers);
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) pairs.push_back({i, j});
        // Part j in 1..|T|: the least threshold holding is T[j], or none when j = |T|.
        int parts = static_cast<int>(ts.size());
        std::vector<FinStructure> out;
        std::vector<int> choice(pairs.size(), 1);
        while (true) {
            FinStructure s(sig);
            for (int i = 0; i < k; ++i) s.add_element(std::to_string(i));
            for (std::size_t r = 0; r < sig.size(); ++r)
                for (int i = 0; i < k; ++i) s.add_tuple(static_cast<int>(r), {i, i});
            for (std::size_t pi = 0; pi < pairs.size(); ++pi)
                for (std::size_t r = 0; r < sig.size(); ++r) {
                    Rational t = threshold_of_sig(sig, static_cast<int>(r));
                    if (choice[pi] < parts && t >= ts[choice[pi]]) s.add_sym(static_cast<int>(r), pairs[pi].first, pairs[pi].second);
                }
            s.normalize();
            if (contains(s)) out.push_back(std::move(s));
            int i = static_cast<int>(pairs.size()) - 1;
            while (i >= 0 && ++choice[i] > parts) choice[i--] = 1;
            if (i < 0) break;
        }
        return out;
    }

    std::string witness_policy() const override { return "demanded-upper-end-else-largest-feasible-capped-2p"; }
    std::string duplicate_policy() const override { return "duplicates-at-smallest-positive-threshold"; }
    std::string extension_policy() const override { return "new-thresholds-from-path-closure"; }
    std::string split_policy() const override { return "scale-and-code-perturbation-midpoint-refinement"; }

    static QfType type_from_distances(const Signature& sig, const std::vector<std::vector<Rational>>& D) {
        int k = static_cast<int>(D.size());
        QfType out(sig, k);
        auto ts = thresholds_of(sig);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                for (const auto& [t, r] : ts)
                    if (D[a][b] <= t) out.set_atom(r, {a, b}, true);
        return out;
    }

    static Rational threshold_of_sig(const Signature& sig, int r) { return parse_rational(sig[r].name.substr(2)); }

private:
    static Rational threshold_of(const FinStructure& s, const std::string& rel) {
        return threshold_of_sig(s.signature(), s.rel_index(rel));
    }
    static Rational smallest_positive(const std::vector<std::pair<Rational, int>>& ts) {
        for (const auto& [q, r] : ts)
            if (q > 0) return q;
        throw Error(ErrorKind::NotAMetricModel, "no positive threshold");
    }

    // Every perturbed distance stays in its threshold interval, positive
    // distances become pairwise distinct, and the triangle inequality survives.
    static bool perturbation_ok(const std::vector<std::vector<Rational>>& D, const std::vector<std::vector<Rational>>& P,
                                const std::vector<std::pair<Rational, int>>& ts) {
        int n = static_cast<int>(D.size());
        std::set<Rational> seen;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                for (const auto& [t, r] : ts)
                    if ((D[a][b] <= t) != (P[a][b] <= t)) return false;
                if (!seen.insert(P[a][b]).second) return false;
            }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (P[a][c] > P[a][b] + P[b][c]) return false;
        return true;
    }

    std::vector<std::vector<Rational>> layers_;
};

}  // namespace invforge
