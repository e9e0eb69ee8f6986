#include "oddkh/chainmap.hpp"

#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }

Int coeff_mod(const Int& c, Coeffs k) {
    if (k == Coeffs::Z) return c;
    Int r = c % 2;
    return r < 0 ? r + 2 : r;
}

void add_terms(Vec& acc, const GenImage& img, const Int& scale) {
    for (auto& [g, c] : img) acc[g] += scale * c;
}

void clean(Vec& v, Coeffs k) {
    for (auto it = v.begin(); it != v.end();) {
        it->second = coeff_mod(it->second, k);
        it = (it->second == 0) ? v.erase(it) : std::next(it);
    }
}

} // namespace

Vec ChainMap::apply(const Vec& x) const {
    Vec out;
    for (auto& [g, c] : x) add_terms(out, apply_gen(g), c);
    clean(out, tgt->coeffs);
    return out;
}

void ChainMap::verify() const {
    for (std::uint64_t g = 0; g < src->total; ++g) {
        GenImage fg = apply_gen(g);
        for (auto& [t, c] : fg) {
            if (c == 0) continue;
            if (tgt->hdeg(t) != src->hdeg(g) + dh || tgt->qdeg(t) != src->qdeg(g) + dq)
                fail("ChainMap: degree violation at " + src->gen_str(g) + " -> " + tgt->gen_str(t));
        }
        // f(d g) - chain_sign * d(f g) = 0
        Vec acc;
        for (auto& [t, c] : src->diff(g)) add_terms(acc, apply_gen(t), c);
        for (auto& [t, c] : fg) add_terms(acc, tgt->diff(t), -chain_sign * c);
        clean(acc, tgt->coeffs);
        if (!acc.empty())
            fail("ChainMap: chain condition fails at " + src->gen_str(g));
    }
}

IntMatrix ChainMap::block(int h, int q) const {
    std::vector<std::uint64_t> sg, tg;
    std::map<std::uint64_t, int> tpos;
    for (std::uint64_t g = 0; g < src->total; ++g)
        if (src->hdeg(g) == h && src->qdeg(g) == q) sg.push_back(g);
    for (std::uint64_t g = 0; g < tgt->total; ++g)
        if (tgt->hdeg(g) == h + dh && tgt->qdeg(g) == q + dq) {
            tpos[g] = int(tg.size());
            tg.push_back(g);
        }
    IntMatrix m(int(tg.size()), int(sg.size()));
    for (int j = 0; j < int(sg.size()); ++j)
        for (auto& [t, c] : apply_gen(sg[j])) {
            auto it = tpos.find(t);
            if (it == tpos.end()) fail("ChainMap::block: image outside expected bigrading");
            m(it->second, j) = c;
        }
    return m;
}

ChainMap identity_map(ComplexPtr c) {
    ChainMap f;
    f.src = f.tgt = c;
    f.apply_gen = [](std::uint64_t g) { return GenImage{{g, Int(1)}}; };
    return f;
}

ChainMap compose2(const ChainMap& second, const ChainMap& first) {
    if (second.src != first.tgt) fail("compose: mismatched interfaces");
    ChainMap f;
    f.src = first.src;
    f.tgt = second.tgt;
    f.dh = first.dh + second.dh;
    f.dq = first.dq + second.dq;
    f.chain_sign = first.chain_sign * second.chain_sign;
    auto a = first.apply_gen, b = second.apply_gen;
    Coeffs k = second.tgt->coeffs;
    f.apply_gen = [a, b, k](std::uint64_t g) {
        Vec acc;
        for (auto& [t, c] : a(g))
            for (auto& [u, c2] : b(t)) acc[u] += c * c2;
        GenImage out;
        for (auto& [u, c] : acc) {
            Int cc = coeff_mod(c, k);
            if (cc != 0) out.push_back({u, cc});
        }
        return out;
    };
    return f;
}

ChainMap compose(std::vector<ChainMap> maps) {
    if (maps.empty()) fail("compose: empty list needs a complex; use identity_map");
    ChainMap f = maps.front();
    for (size_t i = 1; i < maps.size(); ++i) f = compose2(maps[i], f);
    return f;
}

// ---------------------------------------------------------------------------
// quasi-isomorphism via cone acyclicity

bool is_quasi_iso(const ChainMap& f) {
    if (f.dh != 0) return false;
    const Complex& S = *f.src;
    const Complex& T = *f.tgt;
    if (S.coeffs != T.coeffs) fail("is_quasi_iso: coefficient mismatch");

    // cone generators: source (shifted down by 1 in h so that the f-component
    // raises the cone degree) then target
    auto hdeg = [&](std::uint64_t g) { return g < S.total ? S.hdeg(g) - 1 : T.hdeg(g - S.total); };
    auto qdeg = [&](std::uint64_t g) { return g < S.total ? S.qdeg(g) + f.dq : T.qdeg(g - S.total); };
    auto cdiff = [&](std::uint64_t g) {
        GenImage out;
        if (g < S.total) {
            for (auto& [t, c] : S.diff(g)) out.push_back({t, -f.chain_sign * c});
            for (auto& [t, c] : f.apply_gen(g)) out.push_back({t + S.total, c});
        } else {
            for (auto& [t, c] : T.diff(g - S.total)) out.push_back({t + S.total, c});
        }
        return out;
    };

    std::uint64_t total = S.total + T.total;
    std::map<std::pair<int, int>, std::vector<std::uint64_t>> blocks;
    std::map<std::uint64_t, int> pos;
    for (std::uint64_t g = 0; g < total; ++g) {
        auto& b = blocks[{hdeg(g), qdeg(g)}];
        pos[g] = int(b.size());
        b.push_back(g);
    }
    auto matrix = [&](int h, int q) {
        auto its = blocks.find({h, q});
        auto itt = blocks.find({h + 1, q});
        int rows = itt == blocks.end() ? 0 : int(itt->second.size());
        int cols = its == blocks.end() ? 0 : int(its->second.size());
        IntMatrix m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (auto& [t, c] : cdiff(its->second[j])) m(pos[t], j) = c;
        return m;
    };

    for (auto& [key, gens] : blocks) {
        auto [h, q] = key;
        IntMatrix dout = matrix(h, q), din = matrix(h - 1, q);
        if (S.coeffs == Coeffs::F2) {
            auto so = smith_normal_form(dout);
            auto si = smith_normal_form(din);
            int ro = 0, ri = 0;
            for (auto& x : so.diag)
                if (x % 2 != 0) ++ro;
            for (auto& x : si.diag)
                if (x % 2 != 0) ++ri;
            if (int(gens.size()) != ro + ri) return false;
        } else {
            auto si = smith_normal_form(din);
            int ro = int_rank(dout);
            if (int(gens.size()) != ro + si.rank) return false;
            for (auto& x : si.diag)
                if (x != 1) return false; // torsion in the cone
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// induced map on homology

namespace {

struct BlockData {
    std::vector<std::uint64_t> gens;
    std::map<std::uint64_t, int> pos;
};

std::map<std::pair<int, int>, BlockData> block_index(const Complex& c) {
    std::map<std::pair<int, int>, BlockData> blocks;
    for (std::uint64_t g = 0; g < c.total; ++g) {
        auto& b = blocks[{c.hdeg(g), c.qdeg(g)}];
        b.pos[g] = int(b.gens.size());
        b.gens.push_back(g);
    }
    return blocks;
}

IntMatrix diff_block(const Complex& c, const std::map<std::pair<int, int>, BlockData>& blocks, int h, int q) {
    auto its = blocks.find({h, q});
    auto itt = blocks.find({h + 1, q});
    int rows = itt == blocks.end() ? 0 : int(itt->second.gens.size());
    int cols = its == blocks.end() ? 0 : int(its->second.gens.size());
    IntMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (auto& [t, coeff] : c.diff(its->second.gens[j])) m(itt->second.pos.at(t), j) = coeff;
    return m;
}

// solve A x = b exactly over Z via the SNF of A; throws if unsolvable
IntMatrix int_solve(const IntMatrix& A, const IntMatrix& B, const SmithForm& s) {
    // A = U^{-1} D V^{-1}; x = V D^+ U B with exact division
    IntMatrix ub = s.U * B;
    IntMatrix y(A.cols, B.cols);
    for (int i = 0; i < std::min(A.rows, A.cols); ++i)
        for (int j = 0; j < B.cols; ++j) {
            if (i < int(s.diag.size()) && s.diag[i] != 0) {
                if (ub(i, j) % s.diag[i] != 0) fail("int_solve: no integral solution");
                y(i, j) = ub(i, j) / s.diag[i];
            } else if (ub(i, j) != 0) {
                fail("int_solve: inconsistent system");
            }
        }
    for (int i = int(s.diag.size()); i < A.rows; ++i)
        for (int j = 0; j < B.cols; ++j)
            if (ub(i, j) != 0) fail("int_solve: inconsistent system");
    return s.V * y;
}

// free part of H at (h, q): cycle representatives (columns) and the data to
// project a cycle onto free coordinates
struct FreePart {
    IntMatrix reps;         // gens x rank, cycle representatives
    IntMatrix kernel;       // gens x k
    SmithForm kernel_snf;   // of the kernel matrix
    IntMatrix u_quo;        // change of basis in kernel coordinates
    int quot_rank = 0;      // rank of im(d_in) inside the kernel
    int free_rank = 0;
    std::vector<Int> torsion;

    // coordinates of a cycle vector in the free basis
    std::vector<Int> project(const IntMatrix& z) const {
        IntMatrix y = int_solve(kernel, z, kernel_snf);
        IntMatrix uy = u_quo * y;
        std::vector<Int> out;
        for (int i = quot_rank; i < uy.rows; ++i) out.push_back(uy(i, 0));
        return out;
    }
};

FreePart free_part(const IntMatrix& dout, const IntMatrix& din) {
    FreePart fp;
    fp.kernel = int_kernel(dout);
    fp.kernel_snf = smith_normal_form(fp.kernel);
    int k = fp.kernel.cols;
    // express the image of din in kernel coordinates
    IntMatrix X = int_solve(fp.kernel, din, fp.kernel_snf);
    SmithForm sx = smith_normal_form(X);
    fp.quot_rank = sx.rank;
    fp.free_rank = k - sx.rank;
    for (auto& d : sx.diag)
        if (d > 1) fp.torsion.push_back(d);
    fp.u_quo = sx.U;
    // representatives: columns of kernel * U^{-1} at indices quot_rank..k; to
    // avoid inverting U, solve U^T ... instead compute kernel * Uinv via SNF
    // of U. U is unimodular so the solve is exact.
    SmithForm su = smith_normal_form(sx.U);
    IntMatrix id = IntMatrix::identity(k);
    IntMatrix uinv = int_solve(sx.U, id, su);
    IntMatrix basis = fp.kernel * uinv;
    fp.reps = IntMatrix(fp.kernel.rows, fp.free_rank);
    for (int j = 0; j < fp.free_rank; ++j)
        for (int i = 0; i < fp.kernel.rows; ++i) fp.reps(i, j) = basis(i, fp.quot_rank + j);
    return fp;
}

} // namespace

InducedMap induced_homology_map(const ChainMap& f) {
    if (f.src->coeffs != Coeffs::Z || f.tgt->coeffs != Coeffs::Z)
        fail("induced_homology_map: integral complexes only");
    InducedMap out;
    out.dh = f.dh;
    out.dq = f.dq;
    auto sblocks = block_index(*f.src);
    auto tblocks = block_index(*f.tgt);

    for (auto& [key, sb] : sblocks) {
        auto [h, q] = key;
        IntMatrix s_out = diff_block(*f.src, sblocks, h, q);
        IntMatrix s_in = diff_block(*f.src, sblocks, h - 1, q);
        FreePart fs = free_part(s_out, s_in);

        auto tkey = std::make_pair(h + f.dh, q + f.dq);
        auto itt = tblocks.find(tkey);
        int t_dim = itt == tblocks.end() ? 0 : int(itt->second.gens.size());
        IntMatrix t_out = diff_block(*f.tgt, tblocks, tkey.first, tkey.second);
        IntMatrix t_in = diff_block(*f.tgt, tblocks, tkey.first - 1, tkey.second);
        FreePart ft = free_part(t_out, t_in);

        if (fs.free_rank == 0 && fs.torsion.empty() && ft.free_rank == 0 && ft.torsion.empty()) continue;

        IntMatrix m(ft.free_rank, fs.free_rank);
        for (int j = 0; j < fs.free_rank; ++j) {
            // push the j-th representative through f
            IntMatrix z(t_dim, 1);
            for (int i = 0; i < fs.reps.rows; ++i) {
                if (fs.reps(i, j) == 0) continue;
                for (auto& [t, c] : f.apply_gen(sb.gens[i])) z(itt->second.pos.at(t), 0) += fs.reps(i, j) * c;
            }
            if (ft.free_rank > 0) {
                auto coords = ft.project(z);
                for (int i = 0; i < ft.free_rank; ++i) m(i, j) = coords[i];
            }
        }
        out.blocks[key] = m;
        out.src_torsion[key] = fs.torsion;
        out.tgt_torsion[key] = ft.torsion;
    }
    return out;
}

} // namespace oddkh
