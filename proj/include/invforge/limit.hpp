#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "invforge/classes.hpp"
#include "invforge/mc.hpp"
#include "invforge/metric.hpp"
#include "invforge/registry.hpp"
#include "invforge/toy.hpp"

namespace invforge {

// Tree address. A root with label r born at stage b sits at r,0,...,0 (length
// 2b-2); stage s >= b appends the pair (j, c): duplicate index j in 1..Lambda_s
// and split bit c.
using Address = std::vector<long long>;

inline std::string address_str(const Address& a) {
    std::string out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(a[i]);
    }
    return out.empty() ? "()" : out;
}

inline Address truncate_address(const Address& a, std::size_t len) {
    if (len > a.size()) throw Error(ErrorKind::InvalidAddress, "cannot truncate " + address_str(a));
    return Address(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(len));
}
inline Address pi(const Address& a) {
    if (a.empty()) throw Error(ErrorKind::InvalidAddress, "pi of the empty address");
    return truncate_address(a, a.size() - 1);
}
inline Address pi2(const Address& a) {
    if (a.size() < 2) throw Error(ErrorKind::InvalidAddress, "pi^2 of " + address_str(a));
    return truncate_address(a, a.size() - 2);
}

struct BaseMassMeasure {
    Rational operator()(long long k) const {
        if (k < 0) throw Error(ErrorKind::IndexOutOfRange, "negative root label");
        return pow2(-static_cast<int>(k + 1));
    }
};

// 1 - prod_{i<n} (1 - i/L), exactly.
inline Rational collision_probability(int n, long long L) {
    if (L <= 0) return Rational(1);
    Rational prod(1);
    for (int i = 0; i < n; ++i) prod *= Rational(L - i, L);
    return 1 - prod;
}

// Least L with collision_probability(n, L) < 2^-n. The search starts just below
// the bound implied by 1 - prod(1 - i/L) >= 1 - exp(-n(n-1)/2L).
inline long long lambda_min(int n) {
    if (n < 2) throw Error(ErrorKind::IndexOutOfRange, "lambda_min needs n >= 2");
    Rational bound = pow2(-n);
    double x = -std::log1p(-std::ldexp(1.0, -n));
    long long L = std::max<long long>(n, static_cast<long long>(n * (n - 1) / (2 * x)) - 2);
    while (L > n && collision_probability(n, L - 1) < bound) --L;
    while (collision_probability(n, L) >= bound) ++L;
    return L;
}

// Distance with infinitesimal parts: component 0 is the standard part, and
// components 2s-3, 2s-2 are the coefficients of eps_s, eps'_s introduced by the
// split at stage s. eps_2 >> eps'_2 >> eps_3 >> ... so order is lexicographic.
class LexDist {
public:
    LexDist() = default;
    explicit LexDist(const Rational& s) {
        if (s != 0) c_.push_back(s);
    }

    const Rational& part(std::size_t i) const {
        static const Rational zero(0);
        return i < c_.size() ? c_[i] : zero;
    }
    Rational standard() const { return part(0); }
    void set(std::size_t i, const Rational& v) {
        if (c_.size() <= i) c_.resize(i + 1);
        c_[i] = v;
        trim();
    }

    friend int compare(const LexDist& a, const LexDist& b) {
        std::size_t n = std::max(a.c_.size(), b.c_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const Rational& x = a.part(i);
            const Rational& y = b.part(i);
            if (x < y) return -1;
            if (y < x) return 1;
        }
        return 0;
    }
    friend bool operator<(const LexDist& a, const LexDist& b) { return compare(a, b) < 0; }
    friend bool operator<=(const LexDist& a, const LexDist& b) { return compare(a, b) <= 0; }
    friend bool operator==(const LexDist& a, const LexDist& b) { return compare(a, b) == 0; }
    friend LexDist operator+(const LexDist& a, const LexDist& b) {
        LexDist out;
        out.c_.resize(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = a.part(i) + b.part(i);
        out.trim();
        return out;
    }
    friend LexDist operator/(const LexDist& a, long long k) {
        LexDist out = a;
        for (auto& v : out.c_) v /= k;
        return out;
    }

    std::string str() const {
        if (c_.empty()) return "0";
        std::string out;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) out += ';';
            out += to_string(c_[i]);
        }
        return out;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rational> c_;
};

// d(1 - eps_m) + eps'_m * code.
inline LexDist perturb(int m, const LexDist& d, const BigInt& code) {
    LexDist out = d;
    out.set(static_cast<std::size_t>(2 * m - 3), -d.standard());
    out.set(static_cast<std::size_t>(2 * m - 2), Rational(code));
    return out;
}

// Type over the whole stage language. Layers past the first are too many to
// list, so they are carried as a canonical key: split-block pairs for the
// Kaleidoscope class, exact distances for the metric class.
struct LimitType {
    QfType explicit_part;
    std::string symbolic;
    std::string key() const { return explicit_part.key() + "|" + symbolic; }
    friend bool operator==(const LimitType& a, const LimitType& b) { return a.key() == b.key(); }
};

struct LimitStage {
    int n = 0;
    BigInt alpha;
    long long lambda = 0;
    bool split = false;
    BigInt count1, count2, count;  // |X_n^1|, |X_n^2|, |X_n|
    Rational total_mass, gamma, min_mass;
    std::optional<long long> mass_root, witness_root;
    int axiom = -1;
    std::vector<Address> anchor;
    std::string witness_note;
    LexDist dup;       // distance between duplicates made at this stage (metric)
    LexDist next_dup;  // least positive threshold once the stage closes
    std::map<long long, BigInt> desc;         // root -> number of descendants in X_n
    std::map<long long, BigInt> rank_offset;  // root -> rank of its first descendant
    std::vector<std::pair<long long, BigInt>> cdf;  // roots with cumulative mass numerators
    BigInt cdf_den;
};

struct RootInfo {
    long long label = 0;
    int birth = 0;
    bool witness = false;
};

class LimitConstruction {
public:
    enum class Kind { Graph, Kaleidoscope, Metric };

    LimitConstruction(ClassPtr cls, std::uint64_t seed, int max_arity = 2, BaseMassMeasure mstar = {})
        : cls_(std::move(cls)), seed_(seed), mstar_(mstar) {
        if (!cls_->constant_free()) throw Error(ErrorKind::ConstantsUnsupported, cls_->name() + " has constants");
        if (dynamic_cast<const MetricClass*>(cls_.get())) kind_ = Kind::Metric;
        else if (dynamic_cast<const KaleidoscopeClass*>(cls_.get())) kind_ = Kind::Kaleidoscope;
        else kind_ = Kind::Graph;
        sig_ = cls_->signature_at(1);
        if (kind_ == Kind::Metric) {
            auto ts = thresholds_of(sig_);
            for (const auto& [q, r] : ts)
                if (q > 0 && (t1_ == 0 || q < t1_)) t1_ = q;
            two_p_ = 2 * ts.back().first;
            if (t1_ <= 0) throw Error(ErrorKind::ConfigError, "metric base needs a positive threshold");
        }
        for (auto& ax : extension_axioms(*cls_, 1, max_arity)) {
            // Zero distance between distinct points could never be split later.
            if (kind_ == Kind::Metric && has_zero_pair(ax.ext)) continue;
            axioms_.push_back(std::move(ax));
        }
        if (axioms_.empty()) throw Error(ErrorKind::ConfigError, "no extension axioms for " + cls_->name());
        init_stages_01();
    }

    const AmalgamationClass& cls() const { return *cls_; }
    Kind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    const Signature& explicit_signature() const { return sig_; }
    const std::vector<ExtensionAxiom>& axioms() const { return axioms_; }
    const BaseMassMeasure& base_mass() const { return mstar_; }
    int stages() const { return static_cast<int>(stages_.size()) - 1; }
    const LimitStage& stage(int n) const {
        if (n < 0 || n > stages()) throw Error(ErrorKind::IndexOutOfRange, "stage " + std::to_string(n) + " not built");
        return stages_[n];
    }
    const std::map<long long, RootInfo>& roots() const { return roots_; }
    const std::vector<std::string>& gen_log() const { return log_; }
    std::string gen_log_text() const {
        std::string out;
        for (const auto& l : log_) out += l + "\n";
        return out;
    }

    void init_stages_01() {
        stages_.assign(2, LimitStage{});
        stages_[0].n = 0;
        stages_[0].alpha = 0;
        stages_[1].n = 1;
        stages_[1].alpha = 1;
        if (kind_ == Kind::Metric) stages_[1].next_dup = LexDist(t1_);
        roots_.clear();
        log_.clear();
        log({{"kind", "init"}, {"n", 1}, {"class", cls_->name()}, {"alpha", "1"}});
    }

    void build(int n_max) {
        while (stages() < n_max) build_stage(stages() + 1);
    }

    void build_stage(int n) {
        if (n != stages() + 1 || n < 2) throw Error(ErrorKind::IndexOutOfRange, "stages are built in order from 2");
        stages_.push_back(LimitStage{});
        LimitStage& st = stages_.back();
        st.n = n;
        substage_add_mass(n);
        substage_add_witnesses(n);
        substage_duplicate(n);
        substage_expand_split(n);
        close_stage(n);
    }

    void substage_add_mass(int n) {
        LimitStage& st = stages_.at(n);
        const LimitStage& prev = stages_.at(n - 1);
        st.count1 = prev.count;
        st.total_mass = prev.total_mass;
        if (roots_.count(n)) {
            log({{"kind", "add_mass"}, {"n", n}, {"skipped", true}});
            return;
        }
        roots_[n] = RootInfo{n, n, false};
        st.mass_root = n;
        st.count1 += 1;
        st.total_mass += mstar_(n);
        log({{"kind", "add_mass"}, {"n", n}, {"address", address_str(root_address(n))}, {"mass", to_string(mstar_(n))}});
    }

    void substage_add_witnesses(int n) {
        LimitStage& st = stages_.at(n);
        st.axiom = static_cast<int>(ToySchedule::unpair(static_cast<std::uint64_t>(n)).first % axioms_.size());
        const ExtensionAxiom& ax = axioms_[st.axiom];
        Rng rng(derive_seed(seed_, 0xa7c, static_cast<std::uint64_t>(n)));
        st.anchor.clear();
        for (int i = 0; i < ax.arity; ++i) st.anchor.push_back(draw_level1(n, rng));
        nlohmann::json rec{{"kind", "add_witness"}, {"n", n}, {"axiom", ax.id}};
        nlohmann::json anchor = nlohmann::json::array();
        for (const auto& a : st.anchor) anchor.push_back(address_str(a));
        rec["anchor"] = anchor;
        // The only tuple extending a realized anchor at its own level is the
        // anchor itself; it needs a witness unless it fails the base type.
        bool distinct = true;
        for (std::size_t i = 0; i < st.anchor.size(); ++i)
            for (std::size_t j = i + 1; j < st.anchor.size(); ++j)
                if (st.anchor[i] == st.anchor[j]) distinct = false;
        if (!distinct || level_explicit_type(st.anchor).key() != ax.base.key()) {
            st.witness_note = distinct ? "anchor does not realize the base type" : "anchor has repeated entries";
            rec["skipped"] = st.witness_note;
            log(rec);
            return;
        }
        long long label = 0;
        while (roots_.count(label)) ++label;
        roots_[label] = RootInfo{label, n, true};
        st.witness_root = label;
        st.count1 += 1;
        st.total_mass += mstar_(label);
        std::vector<Address> with_y = st.anchor;
        with_y.push_back(root_address(label));
        if (level_explicit_type(with_y).key() != ax.ext.key()) {
            roots_.erase(label);
            throw Error(ErrorKind::UnsatisfiableDemand, "witness for " + ax.id + " at stage " + std::to_string(n));
        }
        rec["address"] = address_str(root_address(label));
        rec["mass"] = to_string(mstar_(label));
        log(rec);
    }

    void substage_duplicate(int n) {
        LimitStage& st = stages_.at(n);
        st.lambda = lambda_min(n);
        st.count2 = st.count1 * st.lambda;
        st.dup = stages_.at(n - 1).next_dup;
        log({{"kind", "duplicate"}, {"n", n}, {"lambda", st.lambda}, {"count", st.count2.str()}});
    }

    void substage_expand_split(int n) {
        LimitStage& st = stages_.at(n);
        const LimitStage& prev = stages_.at(n - 1);
        auto l = cls_->splitting_order();
        st.split = l && BigInt(*l) <= st.count2;
        st.count = st.count2 * (st.split ? 2 : 1);
        if (!st.split) {
            st.alpha = prev.alpha + 1;
        } else if (kind_ == Kind::Kaleidoscope) {
            const BigInt& N = st.count;
            st.alpha = prev.alpha + N * (N - 1) * (N - 2) * (N - 3);
        } else {
            st.alpha = prev.alpha + 1;
        }
        st.next_dup = prev.next_dup;
        if (st.split && kind_ == Kind::Metric) {
            // The closest pair is the first sibling pair; the midpoint layer
            // includes half of its distance.
            LexDist closest = perturb(n, st.dup, st.count * st.count + 1);
            st.next_dup = closest / 2;
        }
        log({{"kind", "expand"},
             {"n", n},
             {"case", st.split ? "b" : "a"},
             {"alpha", st.alpha.str()},
             {"count", st.count.str()}});
    }

    // ---- addresses ----

    Address root_address(long long label) const {
        const RootInfo& r = root(label);
        Address a(static_cast<std::size_t>(2 * r.birth - 2), 0);
        a[0] = label;
        return a;
    }

    // First descendant in X_m: every pair (1, 0).
    Address first_descendant(long long label, int m) const {
        Address a = root_address(label);
        for (int s = root(label).birth; s <= m; ++s) {
            a.push_back(1);
            a.push_back(0);
        }
        return a;
    }

    const RootInfo& root(long long label) const {
        auto it = roots_.find(label);
        if (it == roots_.end()) throw Error(ErrorKind::InvalidAddress, "no root " + std::to_string(label));
        return it->second;
    }

    // Throws InvalidAddress unless a is in X_m (length 2m) or is a bare root.
    void check_address(const Address& a) const {
        if (a.empty() || a.size() % 2) throw Error(ErrorKind::InvalidAddress, "odd or empty address " + address_str(a));
        auto it = roots_.find(a[0]);
        if (it == roots_.end()) throw Error(ErrorKind::InvalidAddress, "unknown root in " + address_str(a));
        int b = it->second.birth;
        std::size_t root_len = static_cast<std::size_t>(2 * b - 2);
        if (a.size() < root_len) throw Error(ErrorKind::InvalidAddress, "address shorter than its root " + address_str(a));
        for (std::size_t i = 1; i < root_len; ++i)
            if (a[i] != 0) throw Error(ErrorKind::InvalidAddress, "bad root padding in " + address_str(a));
        int m = static_cast<int>(a.size() / 2);
        if (a.size() > root_len && m > stages()) throw Error(ErrorKind::InvalidAddress, "stage not built for " + address_str(a));
        for (int s = b; s <= m && a.size() > root_len; ++s) {
            long long j = a[2 * s - 2], c = a[2 * s - 1];
            if (j < 1 || j > stages_[s].lambda || c < 0 || c > (stages_[s].split ? 1 : 0))
                throw Error(ErrorKind::InvalidAddress, "coordinate out of range in " + address_str(a));
        }
    }

    bool is_bare_root(const Address& a) const { return a.size() == static_cast<std::size_t>(2 * root(a[0]).birth - 2); }

    // Mass of an element of X_m (m = |a|/2) or of a bare root.
    Rational mass(const Address& a) const {
        check_address(a);
        auto it = mass_override_.find(a);
        if (it != mass_override_.end()) return it->second;
        Rational m = mstar_(a[0]);
        if (is_bare_root(a)) return m;
        int b = root(a[0]).birth;
        for (int s = b; s <= static_cast<int>(a.size() / 2); ++s)
            m /= Rational(stages_[s].lambda * (stages_[s].split ? 2 : 1));
        return m;
    }

    // Test fixture for the negative control of verify_suite.
    void corrupt_mass(const Address& a, const Rational& m) { mass_override_[a] = m; }

    // Lexicographic rank of a in X_m.
    BigInt rank(const Address& a) const {
        check_address(a);
        if (is_bare_root(a)) throw Error(ErrorKind::InvalidAddress, "bare roots have no stage rank");
        int m = static_cast<int>(a.size() / 2);
        const LimitStage& st = stages_[m];
        BigInt r = st.rank_offset.at(a[0]);
        BigInt within = 0;
        for (int s = root(a[0]).birth; s <= m; ++s) {
            long long w = stages_[s].split ? 2 : 1;
            within = within * (stages_[s].lambda * w) + (a[2 * s - 2] - 1) * w + a[2 * s - 1];
        }
        return r + within;
    }

    // ---- lazy type oracle ----

    bool adjacent(const Address& a, const Address& b) const {
        if (a[0] == b[0]) return false;
        const RootInfo& A = root(a[0]);
        const RootInfo& B = root(b[0]);
        bool b_younger = B.birth > A.birth || (B.birth == A.birth && B.witness && !A.witness);
        const RootInfo& y = b_younger ? B : A;
        if (!y.witness) return false;
        Address o = truncate_address(b_younger ? a : b, static_cast<std::size_t>(2 * y.birth - 2));
        const LimitStage& st = stages_[y.birth];
        const ExtensionAxiom& ax = axioms_[st.axiom];
        for (std::size_t i = 0; i < st.anchor.size(); ++i)
            if (st.anchor[i] == o) return ax.ext.atom(0, {static_cast<int>(i), ax.arity});
        return false;
    }

    LexDist distance(const Address& a, const Address& b) const {
        if (a == b) return LexDist();
        if (a.size() != b.size()) throw Error(ErrorKind::InvalidAddress, "distance between different depths");
        bool ra = is_bare_root(a), rb = is_bare_root(b);
        if (!ra && !rb) {
            int m = static_cast<int>(a.size() / 2);
            const LimitStage& st = stages_[m];
            Address a0 = pi2(a), b0 = pi2(b);
            LexDist pre = a0 == b0 ? st.dup : distance(a0, b0);
            if (!st.split) return pre;
            BigInt x = rank(a), y = rank(b);
            if (y < x) std::swap(x, y);
            return perturb(m, pre, st.count * st.count + x * st.count + y);
        }
        // At least one is a root born at this level; the later-added one is y.
        const RootInfo& A = root(a[0]);
        const RootInfo& B = root(b[0]);
        bool b_younger = rb && (!ra || (B.witness && !A.witness));
        const RootInfo& Y = b_younger ? B : A;
        const Address& w = b_younger ? a : b;
        if (!Y.witness) return LexDist(two_p_);
        const LimitStage& st = stages_[Y.birth];
        auto init = witness_init(axioms_[st.axiom]);
        LexDist best(two_p_);
        for (std::size_t i = 0; i < st.anchor.size(); ++i) {
            if (!init[i]) continue;
            LexDist via = LexDist(*init[i]) + (st.anchor[i] == w ? LexDist() : distance(st.anchor[i], w));
            if (via < best) best = via;
        }
        return best;
    }

    // Explicit-layer type of distinct addresses of a common length.
    QfType level_explicit_type(const std::vector<Address>& addrs) const {
        for (const auto& a : addrs) check_address(a);
        int k = static_cast<int>(addrs.size());
        QfType q(sig_, k);
        if (kind_ == Kind::Metric) {
            auto ts = thresholds_of(sig_);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    LexDist d = i == j ? LexDist() : distance(addrs[i], addrs[j]);
                    for (const auto& [t, r] : ts) q.set_atom(r, {i, j}, d <= LexDist(t));
                }
        } else {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (i != j && adjacent(addrs[i], addrs[j])) q.set_atom(0, {i, j}, true);
        }
        return q;
    }

    // Type over L_{alpha_n} of distinct elements of X_n.
    LimitType address_type(int n, const std::vector<Address>& addrs) const {
        for (std::size_t i = 0; i < addrs.size(); ++i) {
            check_address(addrs[i]);
            if (addrs[i].size() != static_cast<std::size_t>(2 * n))
                throw Error(ErrorKind::InvalidAddress, address_str(addrs[i]) + " is not in X_" + std::to_string(n));
            for (std::size_t j = 0; j < i; ++j)
                if (addrs[i] == addrs[j]) throw Error(ErrorKind::InvalidAddress, "repeated address " + address_str(addrs[i]));
        }
        LimitType t;
        t.explicit_part = level_explicit_type(addrs);
        std::ostringstream sym;
        int k = static_cast<int>(addrs.size());
        if (kind_ == Kind::Kaleidoscope) {
            for (int s = 2; s <= n; ++s) {
                if (!stages_[s].split) continue;
                for (int i = 0; i < k; ++i)
                    for (int j = i + 1; j < k; ++j) {
                        if (root(addrs[i][0]).birth > s || root(addrs[j][0]).birth > s) continue;
                        Address x = truncate_address(addrs[i], 2 * s), y = truncate_address(addrs[j], 2 * s);
                        if (x == y) continue;
                        if (y < x) std::swap(x, y);
                        sym << s << ':' << i << ',' << j << '=' << address_str(x) << '~' << address_str(y) << ' ';
                    }
            }
        } else if (kind_ == Kind::Metric) {
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j) sym << i << ',' << j << '=' << distance(addrs[i], addrs[j]).str() << ' ';
        }
        t.symbolic = sym.str();
        return t;
    }

    // ---- sampling ----

    // Top-down walk of the mass tree to depth d.
    Address sample_address(int d, Rng& rng) const {
        const LimitStage& st = stage(d);
        if (st.cdf.empty()) throw Error(ErrorKind::EmptySource, "X_" + std::to_string(d) + " is empty");
        BigInt u = rng.below(st.cdf_den);
        long long label = st.cdf.back().first;
        for (const auto& [l, c] : st.cdf)
            if (u < c) {
                label = l;
                break;
            }
        Address a = root_address(label);
        for (int s = root(label).birth; s <= d; ++s) {
            a.push_back(1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(stages_[s].lambda))));
            a.push_back(stages_[s].split ? static_cast<long long>(rng.below(std::uint64_t{2})) : 0);
        }
        return a;
    }

    static bool has_zero_pair(const QfType& q) {
        auto ts = thresholds_of(q.signature());
        for (const auto& [t, r] : ts) {
            if (t != 0) continue;
            for (int i = 0; i < q.var_count(); ++i)
                for (int j = 0; j < q.var_count(); ++j)
                    if (i != j && q.atom(r, {i, j})) return true;
        }
        return false;
    }

    // Start value of the witness row per anchor entry: the demanded upper end,
    // 2p when only a lower end is demanded, none when nothing is demanded.
    std::vector<std::optional<Rational>> witness_init(const ExtensionAxiom& ax) const {
        std::vector<std::optional<Rational>> upper(ax.arity), init(ax.arity);
        std::vector<bool> any(ax.arity, false);
        for (const auto& lit : Demand::from_extension(ax.ext).lits) {
            if (lit.args[0] == Literal::kY && lit.args[1] == Literal::kY) continue;
            if (lit.args[0] != Literal::kY && lit.args[1] != Literal::kY) continue;
            int i = lit.args[0] == Literal::kY ? lit.args[1] : lit.args[0];
            Rational q = MetricClass::threshold_of_sig(ax.ext.signature(), ax.ext.signature().index_of(lit.rel));
            any[i] = true;
            if (lit.positive && (!upper[i] || q < *upper[i])) upper[i] = q;
        }
        for (int i = 0; i < ax.arity; ++i)
            if (any[i]) init[i] = upper[i] ? *upper[i] : two_p_;
        return init;
    }

    const Rational& cap_distance() const { return two_p_; }

private:
    void log(const nlohmann::json& j) { log_.push_back(j.dump()); }

    // Anchor entry drawn by mass from X_{n-1} plus the stage-n mass root.
    Address draw_level1(int n, Rng& rng) const {
        std::vector<std::pair<long long, Rational>> cand;
        for (const auto& [l, r] : roots_)
            if (r.birth <= n - 1 || (r.birth == n && !r.witness)) cand.push_back({l, mstar_(l)});
        BigInt den = 1;
        for (const auto& [l, m] : cand) den = boost::multiprecision::lcm(den, BigInt(denominator(m)));
        BigInt total = 0;
        for (const auto& [l, m] : cand) total += BigInt(numerator(m)) * (den / BigInt(denominator(m)));
        BigInt u = rng.below(total);
        long long label = cand.back().first;
        BigInt acc = 0;
        for (const auto& [l, m] : cand) {
            acc += BigInt(numerator(m)) * (den / BigInt(denominator(m)));
            if (u < acc) {
                label = l;
                break;
            }
        }
        Address a = root_address(label);
        if (root(label).birth == n) return a;
        for (int s = root(label).birth; s <= n - 1; ++s) {
            a.push_back(1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(stages_[s].lambda))));
            a.push_back(stages_[s].split ? static_cast<long long>(rng.below(std::uint64_t{2})) : 0);
        }
        return a;
    }

    void close_stage(int n) {
        LimitStage& st = stages_[n];
        BigInt per = st.lambda * (st.split ? 2 : 1);
        BigInt offset = 0, den = 1;
        st.gamma = 0;
        st.min_mass = 0;
        for (const auto& [l, r] : roots_) {
            BigInt d = r.birth == n ? per : stages_[n - 1].desc.at(l) * per;
            st.desc[l] = d;
            st.rank_offset[l] = offset;
            offset += d;
            Rational each = mstar_(l) / Rational(d);
            if (each > st.gamma) st.gamma = each;
            if (st.min_mass == 0 || each < st.min_mass) st.min_mass = each;
            den = boost::multiprecision::lcm(den, BigInt(denominator(mstar_(l))));
        }
        if (offset != st.count) throw Error(ErrorKind::StageBudgetExceeded, "stage count bookkeeping broke at " + std::to_string(n));
        BigInt acc = 0;
        for (const auto& [l, r] : roots_) {
            Rational m = mstar_(l);
            acc += BigInt(numerator(m)) * (den / BigInt(denominator(m)));
            st.cdf.push_back({l, acc});
        }
        st.cdf_den = acc;
        log({{"kind", "close"},
             {"n", n},
             {"total_mass", to_string(st.total_mass)},
             {"gamma", to_string(st.gamma)},
             {"count", st.count.str()}});
    }

    ClassPtr cls_;
    Kind kind_ = Kind::Graph;
    std::uint64_t seed_ = 0;
    BaseMassMeasure mstar_;
    Signature sig_;
    Rational t1_ = 0, two_p_ = 0;
    std::vector<ExtensionAxiom> axioms_;
    std::vector<LimitStage> stages_;
    std::map<long long, RootInfo> roots_;
    std::vector<std::string> log_;
    std::map<Address, Rational> mass_override_;
};

// ---- materialized oracle ----

// X_n built element by element from the substage rules, with explicit layers
// as a FinStructure and the remaining layers as tables.
struct MaterializedStage {
    int n = 0;
    LimitConstruction::Kind kind = LimitConstruction::Kind::Graph;
    std::vector<Address> addrs;  // lexicographic
    std::vector<Rational> mass;
    FinStructure structure;
    std::vector<Address> level1;  // X_n^1
    std::vector<Rational> level1_mass;
    std::vector<int> up;  // index in level1 of pi^2
    bool split = false;
    LexDist dup;
    std::vector<LexDist> level1_dist;  // metric, row-major
    std::map<int, std::vector<int>> block_point;  // Kaleidoscope: split stage -> point index per element
    std::map<int, std::vector<Address>> block_addr;

    std::size_t size() const { return addrs.size(); }
    int index_of(const Address& a) const {
        auto it = std::lower_bound(addrs.begin(), addrs.end(), a);
        if (it == addrs.end() || *it != a) throw Error(ErrorKind::UnknownElement, address_str(a));
        return static_cast<int>(it - addrs.begin());
    }

    LexDist distance(int i, int j) const {
        if (i == j) return LexDist();
        std::size_t N1 = level1.size();
        LexDist pre = up[i] == up[j] ? dup : level1_dist[static_cast<std::size_t>(up[i]) * N1 + static_cast<std::size_t>(up[j])];
        if (!split) return pre;
        BigInt N = static_cast<long long>(addrs.size());
        BigInt lo = std::min(i, j), hi = std::max(i, j);
        return perturb(n, pre, N * N + lo * N + hi);
    }

    LimitType type_of(const std::vector<int>& idx) const {
        LimitType t;
        t.explicit_part = qf_type_of_idx(structure, idx);
        std::ostringstream sym;
        int k = static_cast<int>(idx.size());
        if (kind == LimitConstruction::Kind::Kaleidoscope) {
            for (const auto& [s, pts] : block_point)
                for (int i = 0; i < k; ++i)
                    for (int j = i + 1; j < k; ++j) {
                        int p = pts[idx[i]], q = pts[idx[j]];
                        if (p < 0 || q < 0 || p == q) continue;
                        Address x = block_addr.at(s)[p], y = block_addr.at(s)[q];
                        if (y < x) std::swap(x, y);
                        sym << s << ':' << i << ',' << j << '=' << address_str(x) << '~' << address_str(y) << ' ';
                    }
        } else if (kind == LimitConstruction::Kind::Metric) {
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j) sym << i << ',' << j << '=' << distance(idx[i], idx[j]).str() << ' ';
        }
        t.symbolic = sym.str();
        return t;
    }
};

namespace detail {

inline FinStructure explicit_from_tables(const Signature& sig, LimitConstruction::Kind kind,
                                         const std::vector<Address>& addrs,
                                         const std::function<bool(int, int)>& adj,
                                         const std::function<LexDist(int, int)>& dist) {
    FinStructure s(sig);
    int N = static_cast<int>(addrs.size());
    for (const auto& a : addrs) s.add_element(address_str(a));
    if (kind == LimitConstruction::Kind::Metric) {
        auto ts = thresholds_of(sig);
        for (int i = 0; i < N; ++i)
            for (const auto& [t, r] : ts) s.add_tuple(r, {i, i});
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                LexDist d = dist(i, j);
                for (const auto& [t, r] : ts)
                    if (d <= LexDist(t)) s.add_sym(r, i, j);
            }
    } else {
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (adj(i, j)) s.add_sym(0, i, j);
    }
    s.normalize();
    return s;
}

}  // namespace detail

inline MaterializedStage materialize_stage(const LimitConstruction& run, int n, std::size_t cap = 5000) {
    using Kind = LimitConstruction::Kind;
    const LimitStage& target = run.stage(n);
    if (target.count > BigInt(cap))
        throw Error(ErrorKind::StageBudgetExceeded,
                    "X_" + std::to_string(n) + " has " + target.count.str() + " elements, cap " + std::to_string(cap));
    Kind kind = run.kind();
    const Signature& sig = run.explicit_signature();
    MaterializedStage cur;
    cur.n = 1;
    cur.kind = kind;
    cur.structure = FinStructure(sig);
    // Full tables of the current stage, used to seed the next level.
    std::vector<std::vector<char>> adj;
    std::vector<std::vector<LexDist>> dist;
    LexDist least_threshold(run.cap_distance());
    if (kind == Kind::Metric)
        for (const auto& [q, r] : thresholds_of(sig))
            if (q > 0 && LexDist(q) < least_threshold) least_threshold = LexDist(q);

    for (int m = 2; m <= n; ++m) {
        const LimitStage& st = run.stage(m);
        MaterializedStage next;
        next.n = m;
        next.kind = kind;
        // n.0 and n.1
        next.level1 = cur.addrs;
        next.level1_mass = cur.mass;
        std::vector<std::vector<char>> A1 = adj;
        std::vector<std::vector<LexDist>> D1 = dist;
        std::map<int, std::vector<int>> bp1;
        for (const auto& [s, pts] : cur.block_point) bp1[s] = pts;
        auto add_row = [&](const Address& a, const Rational& ms) {
            next.level1.push_back(a);
            next.level1_mass.push_back(ms);
            for (auto& row : A1) row.push_back(0);
            A1.emplace_back(next.level1.size(), 0);
            for (auto& row : D1) row.push_back(LexDist(run.cap_distance()));
            D1.emplace_back(next.level1.size(), LexDist(run.cap_distance()));
            D1.back().back() = LexDist();
            for (auto& [s, pts] : bp1) pts.push_back(-1);
        };
        if (st.mass_root) add_row(run.root_address(*st.mass_root), run.base_mass()(*st.mass_root));
        if (st.witness_root) {
            const ExtensionAxiom& ax = run.axioms()[st.axiom];
            std::vector<int> anchor;
            for (const auto& a : st.anchor) {
                auto it = std::find(next.level1.begin(), next.level1.end(), a);
                if (it == next.level1.end()) throw Error(ErrorKind::InvalidAddress, "anchor " + address_str(a) + " not realized");
                anchor.push_back(static_cast<int>(it - next.level1.begin()));
            }
            Address ya = run.root_address(*st.witness_root);
            if (kind == Kind::Metric) {
                auto init = run.witness_init(ax);
                std::size_t N1 = next.level1.size();
                std::vector<LexDist> row(N1, LexDist(run.cap_distance()));
                for (std::size_t w = 0; w < N1; ++w)
                    for (std::size_t i = 0; i < anchor.size(); ++i) {
                        if (!init[i]) continue;
                        LexDist via = LexDist(*init[i]) + D1[anchor[i]][w];
                        if (via < row[w]) row[w] = via;
                    }
                add_row(ya, run.base_mass()(*st.witness_root));
                for (std::size_t w = 0; w < N1; ++w) D1[w][N1] = D1[N1][w] = row[w];
            } else {
                FinStructure s1(sig);
                std::vector<std::string> labels;
                for (const auto& a : next.level1) s1.add_element(address_str(a));
                for (std::size_t i = 0; i < next.level1.size(); ++i)
                    for (std::size_t j = i + 1; j < next.level1.size(); ++j)
                        if (A1[i][j]) s1.add_sym(0, static_cast<int>(i), static_cast<int>(j));
                s1.normalize();
                for (int i : anchor) labels.push_back(s1.label(i));
                FinStructure s2 = run.cls().canonical_witness(s1, labels, Demand::from_extension(ax.ext), address_str(ya));
                std::size_t N1 = next.level1.size();
                add_row(ya, run.base_mass()(*st.witness_root));
                int yi = s2.index_of(address_str(ya));
                for (std::size_t w = 0; w < N1; ++w)
                    if (s2.holds(0, static_cast<int>(w), yi)) A1[w][N1] = A1[N1][w] = 1;
            }
        }
        if (next.level1.size() > cap) throw Error(ErrorKind::StageBudgetExceeded, "materialization over cap");
        // n.2 and n.3
        next.split = st.split;
        next.dup = least_threshold;
        std::vector<std::pair<Address, int>> kids;
        std::vector<Rational> kid_mass;
        long long w = st.split ? 2 : 1;
        for (std::size_t p = 0; p < next.level1.size(); ++p)
            for (long long j = 1; j <= st.lambda; ++j)
                for (long long c = 0; c < w; ++c) {
                    Address a = next.level1[p];
                    a.push_back(j);
                    a.push_back(c);
                    kids.push_back({a, static_cast<int>(p)});
                }
        if (kids.size() > cap) throw Error(ErrorKind::StageBudgetExceeded, "materialization over cap");
        std::sort(kids.begin(), kids.end());
        for (const auto& [a, p] : kids) {
            next.addrs.push_back(a);
            next.up.push_back(p);
            next.mass.push_back(next.level1_mass[p] / Rational(st.lambda) / Rational(w));
        }
        std::size_t N1 = next.level1.size();
        next.level1_dist.clear();
        if (kind == Kind::Metric) {
            next.level1_dist.reserve(N1 * N1);
            for (std::size_t i = 0; i < N1; ++i)
                for (std::size_t j = 0; j < N1; ++j) next.level1_dist.push_back(D1[i][j]);
        }
        for (const auto& [s, pts] : bp1) {
            auto& out = next.block_point[s];
            for (int p : next.up) out.push_back(pts[p]);
            next.block_addr[s] = cur.block_addr.at(s);
        }
        if (st.split && kind == Kind::Kaleidoscope) {
            auto& out = next.block_point[m];
            for (std::size_t i = 0; i < next.addrs.size(); ++i) out.push_back(static_cast<int>(i));
            next.block_addr[m] = next.addrs;
        }
        int N = static_cast<int>(next.addrs.size());
        auto adj_fn = [&](int i, int j) { return next.up[i] != next.up[j] && A1[next.up[i]][next.up[j]] != 0; };
        auto dist_fn = [&](int i, int j) { return next.distance(i, j); };
        next.structure = detail::explicit_from_tables(sig, kind, next.addrs, adj_fn, dist_fn);
        if (m < n) {
            adj.assign(N, std::vector<char>(N, 0));
            if (kind == Kind::Metric) dist.assign(N, std::vector<LexDist>(N));
            LexDist closest;
            bool have = false;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    if (i == j) continue;
                    if (kind == Kind::Metric) {
                        dist[i][j] = next.distance(i, j);
                        if (!have || dist[i][j] < closest) closest = dist[i][j], have = true;
                    } else {
                        adj[i][j] = adj_fn(i, j);
                    }
                }
            // New thresholds: midpoints of the sorted distances with 0 prepended.
            if (kind == Kind::Metric && st.split && have && closest / 2 < least_threshold) least_threshold = closest / 2;
        }
        cur = std::move(next);
    }
    return cur;
}

// ---- reports ----

inline std::vector<ReportRow> verify_suite(const LimitConstruction& run, int upto, std::uint64_t seed,
                                           const std::string& run_id = "limit", int materialize_upto = 3,
                                           std::size_t cap = 5000, int lazy_fibers = 1000) {
    std::vector<ReportRow> rows;
    if (upto < 2 || upto > run.stages()) throw Error(ErrorKind::ConfigError, "verify_suite needs built stages 2..n");
    Rational prev_total = 0, prev_gamma = 0;
    for (int n = 2; n <= upto; ++n) {
        const LimitStage& st = run.stage(n);
        // (i) mass preservation over fibers of X_n^1 -> X_n
        long failures = 0, checked = 0;
        bool materialized = false;
        long long w = st.split ? 2 : 1;
        auto check_fiber = [&](const Address& parent) {
            Rational sum = 0;
            for (long long j = 1; j <= st.lambda; ++j)
                for (long long c = 0; c < w; ++c) {
                    Address a = parent;
                    a.push_back(j);
                    a.push_back(c);
                    sum += run.mass(a);
                }
            ++checked;
            if (sum != run.mass(parent)) ++failures;
        };
        if (n <= materialize_upto && st.count <= BigInt(cap)) {
            MaterializedStage ms = materialize_stage(run, n, cap);
            materialized = true;
            std::vector<Rational> sums(ms.level1.size(), Rational(0));
            for (std::size_t i = 0; i < ms.size(); ++i) {
                sums[ms.up[i]] += run.mass(ms.addrs[i]);
                if (ms.mass[i] != run.mass(ms.addrs[i])) ++failures;
            }
            for (std::size_t p = 0; p < ms.level1.size(); ++p) {
                ++checked;
                if (sums[p] != run.mass(ms.level1[p])) ++failures;
            }
        } else {
            Rng rng(derive_seed(seed, 0xf1b, static_cast<std::uint64_t>(n)));
            for (int t = 0; t < lazy_fibers; ++t) {
                Address parent = n - 1 >= 2 ? run.sample_address(n - 1, rng) : Address{};
                if (parent.empty() || rng.below(std::uint64_t{4}) == 0) {
                    if (st.mass_root) check_fiber(run.root_address(*st.mass_root));
                    if (st.witness_root) check_fiber(run.root_address(*st.witness_root));
                    if (parent.empty()) continue;
                }
                check_fiber(parent);
            }
        }
        rows.push_back({run_id, n, "mass_preservation", materialized ? "full" : "sampled", static_cast<double>(failures),
                        static_cast<double>(checked), 0, failures == 0});
        // (ii) max atom halves
        bool halves = n == 2 || st.gamma <= prev_gamma / 2;
        rows.push_back({run_id, n, "gamma_halving", to_string(st.gamma), to_double(st.gamma), 0,
                        n == 2 ? 1.0 : to_double(prev_gamma / 2), halves});
        // (iii) total mass equals the introduced roots, grows, stays <= 1
        Rational sum_roots = 0;
        for (const auto& [l, r] : run.roots())
            if (r.birth <= n) sum_roots += run.base_mass()(l);
        bool total_ok = sum_roots == st.total_mass && st.total_mass >= prev_total && st.total_mass <= 1;
        rows.push_back({run_id, n, "total_mass", to_string(st.total_mass), to_double(st.total_mass), 0,
                        1.0, total_ok});
        // (iv) no element has mass 0
        rows.push_back({run_id, n, "positive_mass", to_string(st.min_mass), to_double(st.min_mass), 0, 0.0,
                        st.min_mass > 0});
        prev_total = st.total_mass;
        prev_gamma = st.gamma;
    }
    return rows;
}

struct SampledStructure {
    FinStructure structure;
    std::vector<Address> addresses;
    bool collision_flag = false;
};

// k i.i.d. draws at depth d; on a collision every relation holds everywhere.
inline SampledStructure sample_invariant(const LimitConstruction& run, int d, int k, Rng& rng) {
    SampledStructure out;
    out.structure = FinStructure(run.explicit_signature());
    for (int i = 0; i < k; ++i) {
        out.structure.add_element(std::to_string(i));
        out.addresses.push_back(run.sample_address(d, rng));
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < i; ++j)
            if (out.addresses[i] == out.addresses[j]) out.collision_flag = true;
    const Signature& sig = run.explicit_signature();
    if (out.collision_flag) {
        for (std::size_t r = 0; r < sig.size(); ++r)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) out.structure.add_tuple(static_cast<int>(r), {i, j});
    } else if (k > 0) {
        QfType q = run.level_explicit_type(out.addresses);
        for (std::size_t r = 0; r < sig.size(); ++r)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (q.atom(static_cast<int>(r), {i, j})) out.structure.add_tuple(static_cast<int>(r), {i, j});
    }
    out.structure.normalize();
    return out;
}

inline SampledStructure sample_invariant(const LimitConstruction& run, int d, int k, std::uint64_t seed) {
    Rng rng(seed);
    return sample_invariant(run, d, k, rng);
}

inline Rational eta_bound(int l, int g) {
    Rational base = 1 - pow2(-l), p = 1;
    for (int i = 0; i < g - l; ++i) p *= base;
    return pow2(-g) + p;
}

struct EtaTarget {
    Address a, b;  // at the deepest depth
};

// The first descendants of the two smallest roots born by stage 3.
inline EtaTarget eta_target(const LimitConstruction& run, int depth) {
    std::vector<long long> labels;
    for (const auto& [l, r] : run.roots())
        if (r.birth <= 3) labels.push_back(l);
    if (labels.size() < 2) throw Error(ErrorKind::ConfigError, "eta needs two roots by stage 3");
    return {run.first_descendant(labels[0], depth), run.first_descendant(labels[1], depth)};
}

// Exact eta_g for split classes: an X_g pair has the target type only when it
// is the target pair in either order.
inline Rational eta_exact(const LimitConstruction& run, const EtaTarget& t, int g) {
    Address a = truncate_address(t.a, 2 * g), b = truncate_address(t.b, 2 * g);
    const Rational& T = run.stage(g).total_mass;
    return 2 * run.mass(a) * run.mass(b) / (T * T);
}

inline std::vector<ReportRow> eta_report(const LimitConstruction& run, const std::vector<int>& depths,
                                         std::uint64_t trials, std::uint64_t seed, const std::string& run_id = "limit") {
    auto l = run.cls().splitting_order();
    if (!l) throw Error(ErrorKind::NoSplittingDeclared, run.cls().name() + " declares no splitting");
    int deepest = *std::max_element(depths.begin(), depths.end());
    EtaTarget t = eta_target(run, deepest);
    std::vector<ReportRow> rows;
    std::optional<McEstimate> prev;
    std::optional<Rational> prev_exact;
    for (int g : depths) {
        if (g < 3 || g > run.stages()) throw Error(ErrorKind::ConfigError, "eta depth out of range");
        Address a = truncate_address(t.a, 2 * g), b = truncate_address(t.b, 2 * g);
        std::string target = run.address_type(g, {a, b}).key();
        auto est = run_bernoulli(trials, derive_seed(seed, 0xe7a, static_cast<std::uint64_t>(g)),
                                 [&](std::uint64_t, Rng& rng) {
                                     Address x = run.sample_address(g, rng), y = run.sample_address(g, rng);
                                     return x != y && run.address_type(g, {x, y}).key() == target;
                                 });
        double bound = to_double(eta_bound(*l, g));
        rows.push_back({run_id, g, "eta", "l=" + std::to_string(*l), est.p_hat, est.sigma, bound,
                        est.p_hat <= bound + 3 * est.sigma});
        Rational ex = eta_exact(run, t, g);
        rows.push_back({run_id, g, "eta_exact", to_string(ex), to_double(ex), 0, bound,
                        ex <= eta_bound(*l, g) && (!prev_exact || ex < *prev_exact)});
        if (prev) {
            double s = std::sqrt(est.sigma * est.sigma + prev->sigma * prev->sigma);
            rows.push_back({run_id, g, "eta_decrease", "", est.p_hat - prev->p_hat, s, 2 * s,
                            est.p_hat <= prev->p_hat + 2 * s});
        }
        prev = est;
        prev_exact = ex;
    }
    return rows;
}

inline std::string sampled_pair_key(const LimitConstruction& run, int d, const std::vector<Address>& sample, int i,
                                    int j, bool explicit_only = false) {
    for (std::size_t a = 0; a < sample.size(); ++a)
        for (std::size_t b = 0; b < a; ++b)
            if (sample[a] == sample[b]) return "collision";
    auto t = run.address_type(d, {sample[i], sample[j]});
    return explicit_only ? t.explicit_part.key() : t.key();
}

// Pr(type of (0,1) = q) against Pr(type of (2,3) = q) for every observed q,
// once for full limit types and once for their explicit-language part.
inline std::vector<ReportRow> exchangeability_report(const LimitConstruction& run, int depth, std::uint64_t trials,
                                                     std::uint64_t seed, const std::string& run_id = "limit") {
    using Keys = std::array<std::string, 4>;
    auto hist = run_trials<Keys>(trials, derive_seed(seed, 0xec4), [&](std::uint64_t, Rng& rng) {
        std::vector<Address> s;
        for (int i = 0; i < 4; ++i) s.push_back(run.sample_address(depth, rng));
        return Keys{sampled_pair_key(run, depth, s, 0, 1), sampled_pair_key(run, depth, s, 2, 3),
                    sampled_pair_key(run, depth, s, 0, 1, true), sampled_pair_key(run, depth, s, 2, 3, true)};
    });
    std::vector<ReportRow> rows;
    for (int part = 0; part < 2; ++part) {
        std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> counts;
        for (const auto& [k, v] : hist) {
            counts[k[2 * part]].first += v;
            counts[k[2 * part + 1]].second += v;
        }
        int id = 0;
        std::string q = part == 0 ? "exchangeability" : "exchangeability_explicit";
        for (const auto& [key, c] : counts) {
            auto e1 = McEstimate::from_counts(c.first, trials), e2 = McEstimate::from_counts(c.second, trials);
            double s = std::sqrt(e1.sigma * e1.sigma + e2.sigma * e2.sigma);
            double diff = std::abs(e1.p_hat - e2.p_hat);
            rows.push_back({run_id, depth, q, (part == 0 ? "t" : "e") + std::to_string(id++), diff, s, 4 * s,
                            s > 0 ? diff <= 4 * s : c.first == c.second});
        }
    }
    return rows;
}

// Exhaustive witness check on a materialized stage: every tuple of X_n lying
// over a processed anchor has a witness in X_n.
struct WitnessCoverage {
    long tuples = 0;
    long witnessed = 0;
};

inline WitnessCoverage witness_coverage(const LimitConstruction& run, const MaterializedStage& ms) {
    WitnessCoverage out;
    for (int j = 2; j <= ms.n; ++j) {
        const LimitStage& st = run.stage(j);
        if (!st.witness_root) continue;
        const ExtensionAxiom& ax = run.axioms()[st.axiom];
        std::vector<std::vector<int>> over(ax.arity);
        for (int i = 0; i < ax.arity; ++i)
            for (std::size_t e = 0; e < ms.size(); ++e)
                if (truncate_address(ms.addrs[e], st.anchor[i].size()) == st.anchor[i]) over[i].push_back(static_cast<int>(e));
        std::vector<std::size_t> pos(ax.arity, 0);
        while (true) {
            std::vector<int> t;
            for (int i = 0; i < ax.arity; ++i) t.push_back(over[i][pos[i]]);
            ++out.tuples;
            for (std::size_t w = 0; w < ms.size(); ++w) {
                if (std::find(t.begin(), t.end(), static_cast<int>(w)) != t.end()) continue;
                auto tw = t;
                tw.push_back(static_cast<int>(w));
                if (qf_type_of_idx(ms.structure, tw).key() == ax.ext.key()) {
                    ++out.witnessed;
                    break;
                }
            }
            int i = ax.arity - 1;
            while (i >= 0 && ++pos[i] == over[i].size()) pos[i--] = 0;
            if (i < 0) break;
        }
    }
    return out;
}

// Sampled tuples lying over a processed anchor, and how many of them see the
// witness root's first descendant with the demanded type.
inline std::vector<ReportRow> as_model_report(const LimitConstruction& run, const std::vector<int>& depths,
                                              std::uint64_t trials, std::uint64_t seed,
                                              const std::string& run_id = "limit") {
    std::vector<ReportRow> rows;
    double prev = 0;
    for (int d : depths) {
        auto hist = run_trials<std::pair<int, int>>(trials, derive_seed(seed, 0xa5d, static_cast<std::uint64_t>(d)),
                                                    [&](std::uint64_t, Rng& rng) {
            std::vector<Address> s;
            for (int i = 0; i < 4; ++i) s.push_back(run.sample_address(d, rng));
            int anchored = 0, ok = 0;
            for (int j = 2; j <= d; ++j) {
                const LimitStage& st = run.stage(j);
                if (!st.witness_root) continue;
                const ExtensionAxiom& ax = run.axioms()[st.axiom];
                bool over = true;
                for (int i = 0; i < ax.arity && over; ++i)
                    over = truncate_address(s[i], st.anchor[i].size()) == st.anchor[i];
                if (!over) continue;
                std::vector<Address> t(s.begin(), s.begin() + ax.arity);
                t.push_back(run.first_descendant(*st.witness_root, d));
                bool distinct = true;
                for (std::size_t a = 0; a < t.size(); ++a)
                    for (std::size_t b = 0; b < a; ++b) distinct = distinct && t[a] != t[b];
                ++anchored;
                if (distinct && run.level_explicit_type(t).key() == ax.ext.key()) ++ok;
            }
            return std::make_pair(anchored, ok);
        });
        std::uint64_t anchored = 0, ok = 0;
        for (const auto& [k, v] : hist) {
            anchored += static_cast<std::uint64_t>(k.first) * v;
            ok += static_cast<std::uint64_t>(k.second) * v;
        }
        double frac = anchored ? static_cast<double>(ok) / static_cast<double>(anchored) : 1.0;
        rows.push_back({run_id, d, "as_model_proxy", std::to_string(anchored) + " anchored", frac, 0, prev,
                        frac >= prev});
        prev = frac;
    }
    return rows;
}

}  // namespace invforge
