#pragma once
// Brute-force reference computations kept apart from the library code paths.

#include <vector>

#include "invforge/rational.hpp"
#include "invforge/structure.hpp"

namespace oracle {

struct Graph {
    int n = 0;
    std::vector<std::vector<bool>> a;
    bool adj(int i, int j) const { return a[i][j]; }
};

inline std::vector<Graph> all_graphs(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
    std::vector<Graph> out;
    for (unsigned mask = 0; mask < (1u << pairs.size()); ++mask) {
        Graph g;
        g.n = n;
        g.a.assign(n, std::vector<bool>(n, false));
        for (std::size_t p = 0; p < pairs.size(); ++p)
            if (mask & (1u << p)) g.a[pairs[p].first][pairs[p].second] = g.a[pairs[p].second][pairs[p].first] = true;
        out.push_back(g);
    }
    return out;
}

inline invforge::FinStructure to_structure(const Graph& g) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.a[i][j]) e.push_back({i, j});
    return invforge::make_graph(g.n, e);
}

// Fraction of maps h: V(f) -> V(g) with f.adj(i,j) == [h(i) != h(j) and g.adj(h(i),h(j))].
inline invforge::Rational tind(const Graph& f, const Graph& g) {
    long long good = 0, total = 0;
    std::vector<int> h(f.n, 0);
    while (true) {
        ++total;
        bool ok = true;
        for (int i = 0; i < f.n && ok; ++i)
            for (int j = i + 1; j < f.n && ok; ++j) {
                bool img = h[i] != h[j] && g.adj(h[i], h[j]);
                ok = img == f.adj(i, j);
            }
        good += ok;
        int i = f.n - 1;
        while (i >= 0 && ++h[i] == g.n) h[i--] = 0;
        if (i < 0) break;
    }
    return invforge::Rational(good, total);
}

// Collision probability of n balls in L boxes, by counting injective placements.
inline invforge::Rational birthday(int n, int L) {
    invforge::BigInt inj = 1, all = 1;
    for (int i = 0; i < n; ++i) {
        inj *= (L - i);
        all *= L;
    }
    return invforge::Rational(all - inj, all);
}

}  // namespace oracle
