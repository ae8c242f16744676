#pragma once

#include "invforge/qftype.hpp"
#include "invforge/rational.hpp"

namespace invforge {

struct Density {
    BigInt numerator;
    BigInt denominator;
    Rational value() const { return Rational(numerator, denominator); }
};

// Counts maps V(f) -> V(g) under which every atom of f, positive or negative,
// agrees with its image in g. Collapsed vertices survive only if f relates
// them exactly as g relates a vertex to itself.
inline Density full_hom_density(const FinStructure& f, const FinStructure& g) {
    if (g.size() == 0) throw Error(ErrorKind::EmptyTarget, "target structure has no elements");
    if (!(f.signature() == g.signature())) throw Error(ErrorKind::SignatureMismatch, "density needs one signature");
    int k = static_cast<int>(f.size());
    int n = static_cast<int>(g.size());
    std::vector<int> id(k);
    for (int i = 0; i < k; ++i) id[i] = i;
    const auto target = qf_type_of_idx(f, id).raw_atoms();

    Density d;
    d.numerator = 0;
    d.denominator = 1;
    for (int i = 0; i < k; ++i) d.denominator *= n;
    std::vector<int> h(k, 0);
    while (true) {
        if (qf_type_of_idx(g, h).raw_atoms() == target) d.numerator += 1;
        int i = k - 1;
        while (i >= 0 && ++h[i] == n) h[i--] = 0;
        if (i < 0) break;
    }
    return d;
}

}  // namespace invforge
