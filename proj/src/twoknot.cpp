#include "oddkh/twoknot.hpp"

#include "oddkh/intmatrix.hpp"

#include <numeric>
#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }

// loop count of a full smoothing state, independent of the complex machinery;
// u_i = 1 selects the (s1-s4)(s2-s3) pairing
int state_loops(const Diagram& d, std::uint32_t u) {
    auto arcs = d.arc_ids();
    std::map<int, int> idx;
    for (size_t i = 0; i < arcs.size(); ++i) idx[arcs[i]] = int(i);
    std::vector<int> parent(arcs.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto join = [&](int a, int b) { parent[find(a)] = find(b); };
    for (int c = 0; c < d.n_crossings(); ++c) {
        const int* s = d.crossings[c].slots;
        if ((u >> c) & 1) {
            join(idx.at(s[0]), idx.at(s[3]));
            join(idx.at(s[1]), idx.at(s[2]));
        } else {
            join(idx.at(s[0]), idx.at(s[1]));
            join(idx.at(s[2]), idx.at(s[3]));
        }
    }
    std::set<int> roots;
    for (size_t i = 0; i < arcs.size(); ++i) roots.insert(find(int(i)));
    return int(roots.size());
}

} // namespace

LaurentPoly kauffman_jones(const Diagram& d) {
    int n = d.n_crossings();
    if (n > 24) fail("kauffman_jones: state sum too large");
    auto [np, nm] = writhe_data(d);
    int w = np - nm;

    // bracket in A: sum over states of A^{#A - #B} delta^{loops},
    // delta = -A^2 - A^{-2}; then J = (-1)^{n+ + n + loops(0)} A^{-3w} <D>
    // evaluated at A^2 = q
    std::map<int, Int> bracket; // exponent of A -> coefficient
    int l0 = state_loops(d, 0);
    for (std::uint32_t u = 0; u < (1u << n); ++u) {
        int loops = state_loops(d, u);
        int base = n - 2 * __builtin_popcount(u);
        // delta^loops = sum_k binom(loops, k) (-1)^loops A^{2(2k - loops)}
        for (int k = 0; k <= loops; ++k) {
            Int binom = 1;
            for (int t = 0; t < k; ++t) binom = binom * (loops - t) / (t + 1);
            int e = base + 2 * (2 * k - loops);
            Int sgn = (loops % 2) ? -1 : 1;
            bracket[e] += sgn * binom;
        }
    }

    LaurentPoly j;
    int global = ((np + n + l0) % 2) ? -1 : 1;
    for (auto& [e, c] : bracket) {
        if (c == 0) continue;
        int ae = e - 3 * w;
        if (ae % 2 != 0) fail("kauffman_jones: odd A-exponent after writhe correction");
        j.add(ae / 2, global * c);
    }
    return j;
}

Int goeritz_det(const Diagram& d) {
    if (d.n_crossings() == 0) {
        if (d.free_loops.size() <= 1) return 1;
        fail("goeritz: disconnected checkerboard data (split unlink)");
    }
    if (!d.free_loops.empty()) fail("goeritz: disconnected checkerboard data (free circles)");

    // connectivity of the crossing graph
    {
        int n = d.n_crossings();
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        std::map<int, int> first_use;
        for (int c = 0; c < n; ++c)
            for (int s = 0; s < 4; ++s) {
                int a = d.crossings[c].slots[s];
                if (first_use.count(a)) parent[find(c)] = find(first_use[a]);
                else first_use[a] = c;
            }
        std::set<int> roots;
        for (int c = 0; c < n; ++c) roots.insert(find(c));
        if (roots.size() != 1) fail("goeritz: disconnected checkerboard data");
    }

    FaceData f = faces(d);
    if (!f.two_colorable) fail("goeritz: faces are not two-colorable");

    // white faces: the color class of face 0
    int white = f.color[0];
    std::vector<int> white_index(f.n_faces, -1);
    int nw = 0;
    for (int i = 0; i < f.n_faces; ++i)
        if (f.color[i] == white) white_index[i] = nw++;
    if (nw < 1) fail("goeritz: no white regions");

    IntMatrix G(nw, nw);
    for (int c = 0; c < d.n_crossings(); ++c) {
        int f0 = f.corner_face(c, 0), f1 = f.corner_face(c, 1);
        int f2 = f.corner_face(c, 2), f3 = f.corner_face(c, 3);
        if (f.color[f0] != f.color[f2] || f.color[f1] != f.color[f3] || f.color[f0] == f.color[f1])
            fail("goeritz: corner coloring inconsistent");
        int wa, wb, eta;
        if (f.color[f0] == white) {
            wa = white_index[f0];
            wb = white_index[f2];
            eta = 1;
        } else {
            wa = white_index[f1];
            wb = white_index[f3];
            eta = -1;
        }
        if (wa == wb) continue; // same white region on both corners
        G(wa, wb) -= eta;
        G(wb, wa) -= eta;
    }
    for (int i = 0; i < nw; ++i) {
        Int s = 0;
        for (int j = 0; j < nw; ++j)
            if (j != i) s += G(i, j);
        G(i, i) = -s;
    }

    // delete the row and column of white region 0
    IntMatrix M(nw - 1, nw - 1);
    for (int i = 1; i < nw; ++i)
        for (int j = 1; j < nw; ++j) M(i - 1, j - 1) = G(i, j);
    Int det = int_det(M);
    return det < 0 ? Int(-det) : det;
}

} // namespace oddkh
