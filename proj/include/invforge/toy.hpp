#pragma once
// Staged finite-graph construction sampled with replacement.
//
// Every element of a stage is an offshoot of a root: an element first added as
// a witness. Offshoots of one root are pairwise unrelated duplicates, so a stage
// is stored as the structure on its roots plus an exact offshoot count per root.

#include <cmath>
#include <functional>

#include "invforge/classes.hpp"
#include "invforge/formula.hpp"
#include "invforge/mc.hpp"

namespace invforge {

// Formula at stage n (n >= 1) is extension axiom number unpair(n).first, where
// unpair inverts the Cantor pairing; every index recurs infinitely often.
class ToySchedule {
public:
    ToySchedule() = default;
    explicit ToySchedule(std::vector<ExtensionAxiom> formulas) : formulas_(std::move(formulas)) {
        if (formulas_.empty()) throw Error(ErrorKind::ConfigError, "empty formula list");
    }
    // Fixed cycle through the listed axioms, for hand-built examples.
    static ToySchedule cycle(std::vector<ExtensionAxiom> formulas) {
        ToySchedule s(std::move(formulas));
        s.cycle_ = true;
        return s;
    }

    static std::pair<std::uint64_t, std::uint64_t> unpair(std::uint64_t n) {
        auto w = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(n) + 1) - 1) / 2);
        while (w * (w + 1) / 2 > n) --w;
        while ((w + 1) * (w + 2) / 2 <= n) ++w;
        std::uint64_t y = n - w * (w + 1) / 2;
        return {y, w - y};
    }

    int formula_index(int n) const {
        if (n < 1) throw Error(ErrorKind::IndexOutOfRange, "schedule starts at stage 1");
        std::uint64_t i = cycle_ ? static_cast<std::uint64_t>(n - 1) : unpair(static_cast<std::uint64_t>(n)).first;
        return static_cast<int>(i % formulas_.size());
    }
    // Second pairing coordinate. Kept for the record: stages consider every tuple.
    std::uint64_t anchor_index(int n) const { return unpair(static_cast<std::uint64_t>(n)).second; }

    const ExtensionAxiom& formula(int n) const { return formulas_[formula_index(n)]; }
    const std::vector<ExtensionAxiom>& formulas() const { return formulas_; }

    // Greatest k < n with the same formula as stage j, or 0 if none.
    int zeta(int n, int j) const {
        int f = formula_index(j);
        for (int k = n - 1; k >= 1; --k)
            if (formula_index(k) == f) return k;
        return 0;
    }

private:
    std::vector<ExtensionAxiom> formulas_;
    bool cycle_ = false;
};

struct ToyStage {
    int n = 0;
    FinStructure roots;
    std::vector<int> birth;
    std::vector<BigInt> weight;
    std::vector<BigInt> alphas;  // alphas[m] for m = 1..n; alphas[0] = 0
    BigInt alpha = 0;
    BigInt size = 0;
    BigInt new_count = 0;            // |B(n,n)|
    std::vector<BigInt> substage_sizes;  // |M_n^k| for k = 0..n
    std::vector<BigInt> cumulative;

    void finish() {
        roots.normalize();
        cumulative.clear();
        BigInt acc = 0;
        for (const auto& w : weight) {
            acc += w;
            cumulative.push_back(acc);
        }
        size = acc;
    }

    // |B(n,i)|
    BigInt slice_size(int i) const {
        BigInt s = 0;
        for (std::size_t r = 0; r < birth.size(); ++r)
            if (birth[r] == i) s += weight[r];
        return s;
    }
    std::vector<int> slice_roots(int i) const {
        std::vector<int> out;
        for (std::size_t r = 0; r < birth.size(); ++r)
            if (birth[r] == i) out.push_back(static_cast<int>(r));
        return out;
    }

    // |B(n,n)| * 2^(n-1) <= |M_n^k| after every branching substage.
    bool ratio_ok() const {
        if (n == 0) return true;
        BigInt lhs = new_count << (n - 1);
        for (std::size_t k = 1; k < substage_sizes.size(); ++k)
            if (lhs > substage_sizes[k]) return false;
        return true;
    }

    struct Element {
        int root;
        BigInt offshoot;
        bool operator==(const Element& o) const { return root == o.root && offshoot == o.offshoot; }
    };

    Element draw(Rng& rng) const {
        BigInt u = rng.below(size);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        int r = static_cast<int>(it - cumulative.begin());
        BigInt before = r == 0 ? BigInt(0) : cumulative[r - 1];
        return {r, u - before};
    }

    // Address label: root label, then one offshoot digit per branching stage.
    std::string address(const Element& e) const {
        std::string out = roots.label(e.root);
        std::vector<BigInt> digits;
        BigInt o = e.offshoot;
        for (int m = n; m > birth[e.root]; --m) {
            digits.push_back(o % alphas[m]);
            o /= alphas[m];
        }
        for (auto it = digits.rbegin(); it != digits.rend(); ++it) out += "." + it->str();
        return out;
    }
};

// The root an address label descends from.
inline std::string toy_projection(const std::string& address) { return address.substr(0, address.find('.')); }

namespace detail {

inline void require_relation_free_duplicates(const AmalgamationClass& c) {
    QfType v(c.signature_at(1), 1);
    auto d = c.iterated_duplicate(v, {2});
    for (auto a : d.raw_atoms())
        if (a) throw Error(ErrorKind::ConfigError, c.name() + ": toy construction needs relation-free duplicates");
}

inline std::vector<std::vector<int>> root_tuples_of_type(const FinStructure& s, const QfType& base, std::size_t limit) {
    std::vector<std::vector<int>> out;
    int l = base.var_count();
    int n = static_cast<int>(s.size());
    if (l == 0) return {{}};
    if (n == 0) return out;
    std::vector<int> t(l, 0);
    while (true) {
        if (qf_type_of_idx(s, t) == base) {
            out.push_back(t);
            if (out.size() > limit) throw Error(ErrorKind::StageBudgetExceeded, "witness count exceeds element cap");
        }
        int i = l - 1;
        while (i >= 0 && ++t[i] == n) t[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

}  // namespace detail

inline ToyStage init_stage0(const FinStructure& seed, const AmalgamationClass& c) {
    detail::require_relation_free_duplicates(c);
    if (!(seed.signature() == c.signature_at(1))) throw Error(ErrorKind::SignatureMismatch, "seed signature differs from class");
    if (auto v = c.violation(seed); !v.empty()) throw Error(ErrorKind::NotInAge, v);
    ToyStage st;
    st.roots = FinStructure(seed.signature());
    for (std::size_t i = 0; i < seed.size(); ++i) st.roots.add_element("r" + std::to_string(i));
    for (std::size_t r = 0; r < seed.signature().size(); ++r)
        for (const auto& t : seed.relation(static_cast<int>(r)).tuples())
            st.roots.add_tuple(static_cast<int>(r), std::vector<int>(t.begin(), t.end()));
    st.roots.normalize();
    st.birth.assign(seed.size(), 0);
    st.weight.assign(seed.size(), BigInt(1));
    st.alphas = {BigInt(0)};
    st.new_count = seed.size();
    st.finish();
    st.substage_sizes = {st.size};
    return st;
}

inline ToyStage run_stage(const ToyStage& prev, const ExtensionAxiom& phi, const AmalgamationClass& c,
                          std::size_t root_cap = 1u << 16) {
    ToyStage st;
    st.n = prev.n + 1;
    int n = st.n;
    std::size_t room = root_cap > prev.roots.size() ? root_cap - prev.roots.size() : 0;

    // Substage (n,0). A tuple never has a witness among its own entries, since
    // the extension type keeps y apart from them; so every base-type tuple of
    // distinct roots gets one fresh witness, related to the whole fibre.
    auto tuples = detail::root_tuples_of_type(prev.roots, phi.base, room);
    Demand demand = Demand::from_extension(phi.ext);
    FinStructure s = prev.roots;
    std::size_t next = prev.roots.size();
    if (tuples.empty()) {
        if (room == 0) throw Error(ErrorKind::StageBudgetExceeded, "root cap reached");
        s = c.canonical_witness(s, {}, Demand{}, "r" + std::to_string(next++));
    } else {
        for (const auto& t : tuples) {
            std::vector<std::string> labels;
            for (int i : t) labels.push_back(prev.roots.label(i));
            s = c.canonical_witness(s, labels, demand, "r" + std::to_string(next++));
        }
    }
    st.roots = std::move(s);
    st.new_count = st.roots.size() - prev.roots.size();
    st.alpha = (st.new_count << (n - 1));
    st.alphas = prev.alphas;
    st.alphas.push_back(st.alpha);

    st.birth = prev.birth;
    st.weight = prev.weight;
    BigInt size = prev.size + st.new_count;
    st.substage_sizes.push_back(size);
    // Substages (n,k), k >= 1: slice B(n-1, n-k) branches alpha_n-fold.
    for (int k = 1; k <= n; ++k) {
        BigInt slice = prev.slice_size(n - k);
        for (std::size_t r = 0; r < prev.birth.size(); ++r)
            if (prev.birth[r] == n - k) st.weight[r] *= st.alpha;
        size += (st.alpha - 1) * slice;
        st.substage_sizes.push_back(size);
    }
    for (std::size_t i = prev.roots.size(); i < st.roots.size(); ++i) {
        st.birth.push_back(n);
        st.weight.push_back(1);
    }
    st.finish();
    if (st.size != size) throw Error(ErrorKind::StageBudgetExceeded, "internal size mismatch");
    return st;
}

inline std::vector<ToyStage> build_toy(const FinStructure& seed, const AmalgamationClass& c, const ToySchedule& sched,
                                       int stages, std::size_t root_cap = 1u << 16) {
    std::vector<ToyStage> out{init_stage0(seed, c)};
    for (int n = 1; n <= stages; ++n) out.push_back(run_stage(out.back(), sched.formula(n), c, root_cap));
    return out;
}

// Explicit structure of a stage, one element per offshoot, labelled by address.
inline FinStructure materialize(const ToyStage& st, std::size_t cap) {
    if (st.size > cap) throw Error(ErrorKind::StageBudgetExceeded, "stage has " + st.size.str() + " elements");
    FinStructure out(st.roots.signature());
    std::vector<std::vector<int>> fibre(st.roots.size());
    for (std::size_t r = 0; r < st.roots.size(); ++r)
        for (BigInt o = 0; o < st.weight[r]; ++o)
            fibre[r].push_back(out.add_element(st.address({static_cast<int>(r), o})));
    for (std::size_t rel = 0; rel < st.roots.signature().size(); ++rel)
        for (const auto& t : st.roots.relation(static_cast<int>(rel)).tuples()) {
            std::vector<int> idx(t.size(), 0);
            while (true) {
                std::vector<int> e;
                for (std::size_t i = 0; i < t.size(); ++i) e.push_back(fibre[t[i]][idx[i]]);
                out.add_tuple(static_cast<int>(rel), e);
                int i = static_cast<int>(t.size()) - 1;
                while (i >= 0 && ++idx[i] == static_cast<int>(fibre[t[i]].size())) idx[i--] = 0;
                if (i < 0) break;
            }
        }
    out.normalize();
    return out;
}

// ---- sampling -------------------------------------------------------------

// Type of indices 0..k-1 in the sample pulled back from draws over g.
inline QfType pullback_type(const FinStructure& g, const std::vector<int>& draws) {
    QfType q(g.signature(), static_cast<int>(draws.size()));
    std::vector<int> img;
    for (std::size_t r = 0; r < g.signature().size(); ++r)
        for_each_var_tuple(static_cast<int>(draws.size()), g.signature()[r].arity, [&](const std::vector<int>& vars) {
            img.resize(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i) img[i] = draws[vars[i]];
            if (g.holds(static_cast<int>(r), img)) q.set_atom(static_cast<int>(r), vars, true);
        });
    return q;
}

inline FinStructure sample_GNG(const FinStructure& g, int k, std::uint64_t seed) {
    if (g.size() == 0) throw Error(ErrorKind::EmptySource, "cannot sample from an empty structure");
    Rng rng(seed);
    std::vector<int> draws;
    for (int i = 0; i < k; ++i) draws.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(g.size()))));
    return type_to_structure(pullback_type(g, draws));
}

// Histogram of sampled k-types, keyed by QfType::key().
inline std::map<std::string, std::uint64_t> mc_type_histogram(const FinStructure& g, int k, std::uint64_t trials,
                                                              std::uint64_t seed) {
    if (g.size() == 0) throw Error(ErrorKind::EmptySource, "cannot sample from an empty structure");
    auto n = static_cast<std::uint64_t>(g.size());
    g.normalize();
    return run_trials<std::string>(trials, seed, [&](std::uint64_t, Rng& rng) {
        std::vector<int> draws(k);
        for (auto& d : draws) d = static_cast<int>(rng.below(n));
        return pullback_type(g, draws).key();
    });
}

inline McEstimate mc_estimate(const FinStructure& g, const QfType& event, std::uint64_t trials, std::uint64_t seed) {
    auto h = mc_type_histogram(g, event.var_count(), trials, seed);
    auto it = h.find(event.key());
    return McEstimate::from_counts(it == h.end() ? 0 : it->second, trials);
}

inline McEstimate mc_estimate(const FinStructure& g, const Formula& event, int k, std::uint64_t trials,
                              std::uint64_t seed) {
    if (g.size() == 0) throw Error(ErrorKind::EmptySource, "cannot sample from an empty structure");
    auto n = static_cast<std::uint64_t>(g.size());
    g.normalize();
    return run_bernoulli(trials, seed, [&](std::uint64_t, Rng& rng) {
        std::vector<int> draws(k);
        for (auto& d : draws) d = static_cast<int>(rng.below(n));
        auto s = type_to_structure(pullback_type(g, draws));
        std::vector<int> assign(k);
        for (int i = 0; i < k; ++i) assign[i] = i;
        return evaluate(s, event, assign);
    });
}

// Type of a sample from a stage: atoms hold only among distinct roots.
inline QfType stage_pullback_type(const ToyStage& st, const std::vector<ToyStage::Element>& draws) {
    const auto& g = st.roots;
    QfType q(g.signature(), static_cast<int>(draws.size()));
    std::vector<int> img;
    for (std::size_t r = 0; r < g.signature().size(); ++r)
        for_each_var_tuple(static_cast<int>(draws.size()), g.signature()[r].arity, [&](const std::vector<int>& vars) {
            img.resize(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i) img[i] = draws[vars[i]].root;
            for (std::size_t i = 0; i < img.size(); ++i)
                for (std::size_t j = 0; j < i; ++j)
                    if (img[i] == img[j]) return;
            if (g.holds(static_cast<int>(r), img)) q.set_atom(static_cast<int>(r), vars, true);
        });
    return q;
}

inline std::map<std::string, std::uint64_t> stage_type_histogram(const ToyStage& st, int k, std::uint64_t trials,
                                                                 std::uint64_t seed) {
    return run_trials<std::string>(trials, seed, [&](std::uint64_t, Rng& rng) {
        std::vector<ToyStage::Element> draws;
        for (int i = 0; i < k; ++i) draws.push_back(st.draw(rng));
        return stage_pullback_type(st, draws).key();
    });
}

inline FinStructure erdos_renyi_baseline(int k, const Rational& p, std::uint64_t seed) {
    if (p < 0 || p > 1) throw Error(ErrorKind::ConfigError, "edge probability outside [0,1]");
    Rng rng(seed);
    FinStructure g(graph_signature());
    for (int i = 0; i < k; ++i) g.add_element(std::to_string(i));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (rng.coin(p)) g.add_sym(0, i, j);
    g.normalize();
    return g;
}

// ---- reports --------------------------------------------------------------

struct ReportRow {
    std::string run_id;
    int n = 0;
    std::string quantity;
    std::string type_id;
    double estimate = 0;
    double sigma = 0;
    double bound = 0;
    bool pass = false;
};

inline Rational delta_bound(int l, int n) { return Rational(l) / pow2(n); }

// (1 - l 2^-(zeta-1))^2, or 0 once the base leaves (0,1].
inline Rational gamma_bound_factor(int l, int zeta) {
    Rational t = Rational(l) / pow2(zeta - 1);
    if (zeta < 1 || t >= 1) return 0;
    return (1 - t) * (1 - t);
}

// One row per (stage pair, catalog type): delta_{n+1} = |p_n - p_{n+1}| against l 2^-n.
inline std::vector<ReportRow> delta_report(const std::vector<ToyStage>& stages, const std::vector<QfType>& catalog,
                                           std::uint64_t trials, std::uint64_t seed, const std::string& run_id = "toy") {
    if (stages.size() < 2) throw Error(ErrorKind::ConfigError, "delta report needs two stages");
    int kmax = 0;
    for (const auto& q : catalog) kmax = std::max(kmax, q.var_count());
    // marginal estimates per stage: draw kmax points, read each prefix type
    std::vector<std::map<std::string, std::uint64_t>> marg(stages.size());
    for (std::size_t s = 0; s < stages.size(); ++s) {
        auto h = run_trials<std::string>(trials, derive_seed(seed, 0xde17a), [&](std::uint64_t, Rng& rng) {
            std::vector<ToyStage::Element> draws;
            for (int i = 0; i < kmax; ++i) draws.push_back(stages[s].draw(rng));
            std::string key;
            for (int k = 1; k <= kmax; ++k) {
                std::vector<ToyStage::Element> pre(draws.begin(), draws.begin() + k);
                key += stage_pullback_type(stages[s], pre).key();
                key.push_back('\x7f');
            }
            return key;
        });
        for (const auto& [key, cnt] : h) {
            std::size_t pos = 0;
            while (pos < key.size()) {
                std::size_t e = key.find('\x7f', pos);
                marg[s][key.substr(pos, e - pos)] += cnt;
                pos = e + 1;
            }
        }
    }
    std::vector<ReportRow> rows;
    for (std::size_t s = 0; s + 1 < stages.size(); ++s)
        for (std::size_t t = 0; t < catalog.size(); ++t) {
            const auto& q = catalog[t];
            auto a = McEstimate::from_counts(marg[s][q.key()], trials);
            auto b = McEstimate::from_counts(marg[s + 1][q.key()], trials);
            ReportRow r;
            r.run_id = run_id;
            r.n = stages[s].n + 1;
            r.quantity = "delta";
            r.type_id = "q" + std::to_string(q.var_count()) + "_" + std::to_string(t);
            r.estimate = std::abs(a.p_hat - b.p_hat);
            r.sigma = a.sigma + b.sigma;
            r.bound = to_double(delta_bound(q.var_count(), stages[s].n));
            r.pass = r.estimate <= r.bound + 3 * r.sigma;
            rows.push_back(r);
        }
    return rows;
}

struct GammaEstimate {
    McEstimate gamma;
    McEstimate distinct;  // the sampled l elements are pairwise distinct
};

// Estimates Pr(sample |= exists y phi(0..l-1, y)) for phi = base -> ext. The
// witness index is fresh, so y relates to x_i only through distinct roots.
inline GammaEstimate gamma_estimate(const ToyStage& st, const ExtensionAxiom& phi, std::uint64_t trials,
                                    std::uint64_t seed) {
    Demand d = Demand::from_extension(phi.ext);
    int l = phi.arity;
    const auto& g = st.roots;
    struct Lit {
        int rel;
        std::vector<int> args;
        bool positive;
    };
    std::vector<Lit> lits;
    for (const auto& x : d.lits) lits.push_back({g.rel_index(x.rel), x.args, x.positive});
    auto h = run_trials<int>(trials, seed, [&](std::uint64_t, Rng& rng) {
        std::vector<ToyStage::Element> draws;
        for (int i = 0; i < l; ++i) draws.push_back(st.draw(rng));
        bool distinct = true;
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < i; ++j)
                if (draws[i] == draws[j]) distinct = false;
        bool sat = true;
        if (stage_pullback_type(st, draws) == phi.base) {
            sat = false;
            std::vector<int> img;
            for (int y = 0; y < static_cast<int>(g.size()) && !sat; ++y) {
                bool ok = true;
                for (const auto& lit : lits) {
                    img.clear();
                    for (int a : lit.args) img.push_back(a == Literal::kY ? y : draws[a].root);
                    bool repeated = false;
                    for (std::size_t i = 0; i < img.size(); ++i)
                        for (std::size_t j = 0; j < i; ++j) repeated = repeated || img[i] == img[j];
                    bool v = !repeated && g.holds(lit.rel, img);
                    if (v != lit.positive) {
                        ok = false;
                        break;
                    }
                }
                sat = ok;
            }
        }
        return (sat ? 1 : 0) | (distinct ? 2 : 0);
    });
    std::uint64_t gs = h[1] + h[3], ds = h[2] + h[3];
    return {McEstimate::from_counts(gs, trials), McEstimate::from_counts(ds, trials)};
}

// Rows for every n >= 2 in the run and every scheduled j < n.
inline std::vector<ReportRow> gamma_report(const std::vector<ToyStage>& stages, const ToySchedule& sched,
                                           std::uint64_t trials, std::uint64_t seed, const std::string& run_id = "toy") {
    std::vector<ReportRow> rows;
    for (const auto& st : stages) {
        std::map<int, GammaEstimate> cache;
        for (int j = 1; j < st.n; ++j) {
            int f = sched.formula_index(j);
            if (!cache.count(f))
                cache[f] = gamma_estimate(st, sched.formulas()[f], trials, derive_seed(seed, 0x9a77a, st.n * 1000003ULL + f));
            const auto& e = cache[f];
            int zeta = sched.zeta(st.n, j);
            ReportRow r;
            r.run_id = run_id;
            r.n = st.n;
            r.quantity = "gamma";
            r.type_id = "phi" + std::to_string(j) + ":" + sched.formulas()[f].id;
            r.estimate = e.gamma.p_hat;
            r.sigma = e.gamma.sigma;
            r.bound = to_double(gamma_bound_factor(sched.formulas()[f].arity, zeta)) * e.distinct.p_hat;
            r.pass = r.estimate >= r.bound - 3 * r.sigma;
            rows.push_back(r);
        }
    }
    return rows;
}

// Partial products of prod_{i>=k} (1 - C 2^-i) until a factor moves the
// product by less than tol; compared against (1 - C 2^-k)^2.
struct VeryCombCheck {
    double product = 1;
    double bound = 0;
    int terms = 0;
    bool pass = false;
};

inline VeryCombCheck very_comb_check(int C, int k, double tol = 1e-9) {
    if (C <= 0 || std::ldexp(1.0, k) <= C) throw Error(ErrorKind::ConfigError, "need 0 < C < 2^k");
    VeryCombCheck v;
    long double p = 1;
    for (int i = k;; ++i) {
        long double f = 1 - C * std::ldexp(1.0L, -i);
        long double np = p * f;
        ++v.terms;
        bool done = std::abs(static_cast<double>(p - np)) < tol;
        p = np;
        if (done) break;
    }
    double t = 1 - C * std::ldexp(1.0, -k);
    v.product = static_cast<double>(p);
    v.bound = t * t;
    v.pass = v.product >= v.bound;
    return v;
}

inline int minimal_valid_k(int C) {
    int k = 0;
    while (std::ldexp(1.0, k) <= C) ++k;
    return k;
}

}  // namespace invforge
