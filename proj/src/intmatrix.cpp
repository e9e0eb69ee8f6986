#include "oddkh/intmatrix.hpp"

#include <stdexcept>

namespace oddkh {

namespace {

void swap_rows(IntMatrix& m, int i, int j) {
    for (int k = 0; k < m.cols; ++k) std::swap(m(i, k), m(j, k));
}
void swap_cols(IntMatrix& m, int i, int j) {
    for (int k = 0; k < m.rows; ++k) std::swap(m(k, i), m(k, j));
}
// row i -= q * row j
void row_op(IntMatrix& m, int i, int j, const Int& q) {
    if (q == 0) return;
    for (int k = 0; k < m.cols; ++k) m(i, k) -= q * m(j, k);
}
void col_op(IntMatrix& m, int i, int j, const Int& q) {
    if (q == 0) return;
    for (int k = 0; k < m.rows; ++k) m(k, i) -= q * m(k, j);
}
void negate_row(IntMatrix& m, int i) {
    for (int k = 0; k < m.cols; ++k) m(i, k) = -m(i, k);
}

} // namespace

SmithForm smith_normal_form(const IntMatrix& m) {
    SmithForm s;
    s.D = m;
    s.U = IntMatrix::identity(m.rows);
    s.V = IntMatrix::identity(m.cols);
    IntMatrix& D = s.D;
    int t = 0;
    int lim = std::min(m.rows, m.cols);

    while (t < lim) {
        // locate minimal nonzero |entry| in the trailing block
        int pi = -1, pj = -1;
        Int best;
        for (int i = t; i < D.rows; ++i)
            for (int j = t; j < D.cols; ++j)
                if (D(i, j) != 0) {
                    Int v = abs_int(D(i, j));
                    if (pi < 0 || v < best) {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
        if (pi < 0) break; // trailing block zero
        swap_rows(D, t, pi);
        swap_rows(s.U, t, pi);
        swap_cols(D, t, pj);
        swap_cols(s.V, t, pj);

        bool clean = true;
        for (int i = t + 1; i < D.rows; ++i)
            if (D(i, t) != 0) {
                Int q = D(i, t) / D(t, t);
                row_op(D, i, t, q);
                row_op(s.U, i, t, q);
                if (D(i, t) != 0) clean = false;
            }
        for (int j = t + 1; j < D.cols; ++j)
            if (D(t, j) != 0) {
                Int q = D(t, j) / D(t, t);
                col_op(D, j, t, q);
                col_op(s.V, j, t, q);
                if (D(t, j) != 0) clean = false;
            }
        if (!clean) continue; // smaller remainders appeared, re-pivot

        // divisibility fix-up: pivot must divide the trailing block
        bool fixed = false;
        for (int i = t + 1; i < D.rows && !fixed; ++i)
            for (int j = t + 1; j < D.cols && !fixed; ++j)
                if (D(i, j) % D(t, t) != 0) {
                    // add row i to row t, then re-reduce
                    row_op(D, t, i, Int(-1));
                    row_op(s.U, t, i, Int(-1));
                    fixed = true;
                }
        if (fixed) continue;

        if (D(t, t) < 0) {
            negate_row(D, t);
            negate_row(s.U, t);
        }
        ++t;
    }
    s.rank = t;
    for (int i = 0; i < t; ++i) s.diag.push_back(D(i, i));
    return s;
}

int int_rank(const IntMatrix& m) {
    IntMatrix w = m;
    int r = 0;
    for (int col = 0; col < w.cols && r < w.rows; ++col) {
        int piv = -1;
        Int best;
        for (int i = r; i < w.rows; ++i)
            if (w(i, col) != 0) {
                Int v = abs_int(w(i, col));
                if (piv < 0 || v < best) {
                    best = v;
                    piv = i;
                }
            }
        if (piv < 0) continue;
        swap_rows(w, r, piv);
        // clear below with Euclidean steps (stay over Z)
        bool again = true;
        while (again) {
            again = false;
            for (int i = r + 1; i < w.rows; ++i)
                if (w(i, col) != 0) {
                    Int q = w(i, col) / w(r, col);
                    row_op(w, i, r, q);
                    if (w(i, col) != 0) {
                        swap_rows(w, r, i);
                        again = true;
                    }
                }
        }
        ++r;
    }
    return r;
}

IntMatrix int_kernel(const IntMatrix& m) {
    SmithForm s = smith_normal_form(m);
    int k = m.cols - s.rank;
    IntMatrix ker(m.cols, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < m.cols; ++i) ker(i, j) = s.V(i, s.rank + j);
    return ker;
}

Int int_det(const IntMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("int_det: square matrices only");
    if (m.rows == 0) return 1;
    IntMatrix w = m;
    Int sign = 1;
    int n = w.rows;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int i = col; i < n; ++i)
            if (w(i, col) != 0) {
                if (piv < 0 || abs_int(w(i, col)) < abs_int(w(piv, col))) piv = i;
            }
        if (piv < 0) return 0;
        if (piv != col) {
            swap_rows(w, col, piv);
            sign = -sign;
        }
        bool again = true;
        while (again) {
            again = false;
            for (int i = col + 1; i < n; ++i)
                if (w(i, col) != 0) {
                    Int q = w(i, col) / w(col, col);
                    row_op(w, i, col, q);
                    if (w(i, col) != 0) {
                        swap_rows(w, col, i);
                        sign = -sign;
                        again = true;
                    }
                }
        }
    }
    Int d = sign;
    for (int i = 0; i < n; ++i) d *= w(i, i);
    return d;
}

} // namespace oddkh
