#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <utility>
#include <vector>

// Canonical-orbit bookkeeping for polyspectra grids. Estimated spectra are
// exactly equal (or exactly conjugate) on symmetry-related grid cells:
//   S2(w) = S2(-w)
//   S3 invariant under the six permutations of (w1, w2, -w1-w2), conjugate
//      under global sign flip
//   S4 cut (w1, w2, -w1, -w2) invariant under swap and per-argument sign flip
// so cumulants are accumulated once per orbit and mirrored into the full
// grid. Fits weight each orbit once (duplicated cells at 1/multiplicity).

namespace pspec {

struct GridIndexing {
    std::vector<int> axis; // comb indices in stride units, ascending

    // S2: per axis position -> slot; slot u holds |j| = s2_unique[u].
    std::vector<int> s2_unique;
    std::vector<int> s2_slot;
    std::vector<int> s2_mult;

    // S3: canonical ordered pair per cell (row-major cell = i * n + j).
    struct Pair {
        int p, q;
    };
    std::vector<Pair> s3_unique;
    std::vector<int> s3_slot;
    std::vector<char> s3_conj;
    std::vector<int> s3_mult;

    // S4 cut: canonical (u <= v) absolute pair per cell.
    std::vector<Pair> s4_unique;
    std::vector<int> s4_slot;
    std::vector<int> s4_mult;

    int n() const { return static_cast<int>(axis.size()); }
    int cell(int i, int j) const { return i * n() + j; }

    /// Largest |comb index| (stride units) any accumulated quantity touches.
    int max_index() const;

    static GridIndexing build(const std::vector<int>& axis_j);
};

inline int GridIndexing::max_index() const {
    int m = 0;
    for (const auto& p : s3_unique)
        m = std::max({m, std::abs(p.p), std::abs(p.q), std::abs(p.p + p.q)});
    for (const auto& p : s4_unique) m = std::max({m, p.p, p.q});
    for (int u : s2_unique) m = std::max(m, u);
    return m;
}

inline GridIndexing GridIndexing::build(const std::vector<int>& axis_j) {
    GridIndexing g;
    g.axis = axis_j;
    const int n = g.n();

    std::map<int, int> slot2;
    g.s2_slot.resize(n);
    for (int i = 0; i < n; ++i) {
        int a = std::abs(axis_j[i]);
        auto it = slot2.find(a);
        if (it == slot2.end()) {
            it = slot2.emplace(a, static_cast<int>(g.s2_unique.size())).first;
            g.s2_unique.push_back(a);
            g.s2_mult.push_back(0);
        }
        g.s2_slot[i] = it->second;
        g.s2_mult[it->second]++;
    }

    std::map<std::pair<int, int>, int> slot3;
    g.s3_slot.resize(n * n);
    g.s3_conj.resize(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int t[3] = {axis_j[i], axis_j[j], -axis_j[i] - axis_j[j]};
            int bp = 0, bq = 0;
            char bc = 0;
            bool first = true;
            for (int s = 0; s < 2; ++s) {
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        if (a == b) continue;
                        int p = s ? -t[a] : t[a];
                        int q = s ? -t[b] : t[b];
                        if (first || p < bp || (p == bp && (q < bq || (q == bq && s < bc)))) {
                            bp = p;
                            bq = q;
                            bc = static_cast<char>(s);
                            first = false;
                        }
                    }
                }
            }
            auto key = std::make_pair(bp, bq);
            auto it = slot3.find(key);
            if (it == slot3.end()) {
                it = slot3.emplace(key, static_cast<int>(g.s3_unique.size())).first;
                g.s3_unique.push_back({bp, bq});
                g.s3_mult.push_back(0);
            }
            g.s3_slot[g.cell(i, j)] = it->second;
            g.s3_conj[g.cell(i, j)] = bc;
            g.s3_mult[it->second]++;
        }
    }

    std::map<std::pair<int, int>, int> slot4;
    g.s4_slot.resize(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int u = std::abs(axis_j[i]), v = std::abs(axis_j[j]);
            if (u > v) std::swap(u, v);
            auto key = std::make_pair(u, v);
            auto it = slot4.find(key);
            if (it == slot4.end()) {
                it = slot4.emplace(key, static_cast<int>(g.s4_unique.size())).first;
                g.s4_unique.push_back({u, v});
                g.s4_mult.push_back(0);
            }
            g.s4_slot[g.cell(i, j)] = it->second;
            g.s4_mult[it->second]++;
        }
    }
    return g;
}

} // namespace pspec
