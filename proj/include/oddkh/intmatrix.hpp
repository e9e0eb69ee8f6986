#pragma once

#include "oddkh/ints.hpp"

#include <map>
#include <utility>
#include <vector>

namespace oddkh {

// Dense exact integer matrix. Blocks handed to Smith reduction are the
// per-bigrading slices of a differential, which stay small; sparseness is
// exploited upstream, not here.
struct IntMatrix {
    int rows = 0, cols = 0;
    std::vector<Int> a; // row-major

    IntMatrix() = default;
    IntMatrix(int r, int c) : rows(r), cols(c), a(size_t(r) * c) {}

    static IntMatrix identity(int n) {
        IntMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    Int& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
    const Int& operator()(int i, int j) const { return a[size_t(i) * cols + j]; }

    bool operator==(const IntMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }

    bool is_zero() const {
        for (auto& x : a)
            if (x != 0) return false;
        return true;
    }

    IntMatrix operator*(const IntMatrix& o) const {
        IntMatrix r(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                const Int& v = (*this)(i, k);
                if (v == 0) continue;
                for (int j = 0; j < o.cols; ++j)
                    if (o(k, j) != 0) r(i, j) += v * o(k, j);
            }
        return r;
    }

    IntMatrix operator-(const IntMatrix& o) const {
        IntMatrix r(rows, cols);
        for (size_t i = 0; i < a.size(); ++i) r.a[i] = a[i] - o.a[i];
        return r;
    }
};

struct SmithForm {
    IntMatrix U, D, V; // U * M * V == D, U and V unimodular
    std::vector<Int> diag;
    int rank = 0;
};

// Smith normal form by repeated pivoting on a minimal nonzero |entry| with
// Euclidean row/column reductions, then the divisibility fix-up.
SmithForm smith_normal_form(const IntMatrix& m);

// Rank over Z (= rank over Q), via fraction-free elimination.
int int_rank(const IntMatrix& m);

// Integer kernel basis (columns of the result), via SNF.
IntMatrix int_kernel(const IntMatrix& m);

Int int_det(const IntMatrix& m);

// ---------------------------------------------------------------------------
// F2 parity constraint system: variables x_i in {0,1}, relations
// x_a + x_b = c and pins x_a = c. Union-find with parity; earliest variable
// in each class is the representative so defaults are deterministic.
struct ParitySolver {
    std::vector<int> parent, rank_;
    std::vector<unsigned char> par; // parity relative to parent
    std::vector<signed char> pin;   // -1 none, else pinned value of the root
    bool consistent = true;

    explicit ParitySolver(int n)
        : parent(n), rank_(n, 0), par(n, 0), pin(n, -1) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }

    std::pair<int, int> find(int x) {
        if (parent[x] == x) return {x, 0};
        auto [r, p] = find(parent[x]);
        parent[x] = r;
        par[x] ^= p;
        return {r, par[x]};
    }

    bool relate(int a, int b, int c) {
        auto [ra, pa] = find(a);
        auto [rb, pb] = find(b);
        if (ra == rb) {
            if (((pa ^ pb) & 1) != (c & 1)) consistent = false;
            return consistent;
        }
        if (rank_[ra] < rank_[rb]) {
            std::swap(ra, rb);
            std::swap(pa, pb);
        }
        parent[rb] = ra;
        par[rb] = (unsigned char)((pa ^ pb ^ c) & 1);
        if (rank_[ra] == rank_[rb]) rank_[ra]++;
        if (pin[rb] >= 0) {
            int want = pin[rb] ^ par[rb];
            if (pin[ra] >= 0 && pin[ra] != want) consistent = false;
            pin[ra] = (signed char)want;
        }
        return consistent;
    }

    bool set(int a, int c) {
        auto [r, p] = find(a);
        int want = (p ^ c) & 1;
        if (pin[r] >= 0 && pin[r] != want) consistent = false;
        else pin[r] = (signed char)want;
        return consistent;
    }

    // Value with free classes defaulting to 0.
    int value(int a) {
        auto [r, p] = find(a);
        int base = pin[r] >= 0 ? pin[r] : 0;
        return base ^ p;
    }
};

} // namespace oddkh
