#include "oddkh/complex.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }

Int reduce_coeff(const Int& c, Coeffs k) {
    if (k == Coeffs::Z) return c;
    Int r = c % 2;
    return r < 0 ? r + 2 : r;
}

} // namespace

std::uint32_t Complex::vertex_of(std::uint64_t g) const {
    std::uint32_t lo = 0, hi = std::uint32_t(offset.size()) - 1;
    while (lo < hi) {
        std::uint32_t mid = (lo + hi + 1) / 2;
        if (offset[mid] <= g) lo = mid;
        else hi = mid - 1;
    }
    return lo;
}

int Complex::qdeg(std::uint32_t v, Mono m) const {
    // reduced generators are normalized so the reduced unknot sits at q = 0;
    // the basepoint circle then contributes nothing to the grading
    int gr = res[v].count() - (reduced ? 1 : 0) - 2 * mono_len(m);
    return gr + __builtin_popcount(v) + nminus - 2 * nplus;
}

EdgeCircles edge_circles(const Diagram& d, const Resolution& rv, const Resolution& rw, int crossing) {
    EdgeCircles ec;
    ec.cmap.assign(rv.count(), -1);
    for (int j = 0; j < rv.count(); ++j) {
        int t = rw.circle_of_arc.at(rv.circles[j][0]);
        bool splits = false;
        for (int a : rv.circles[j])
            if (rw.circle_of_arc.at(a) != t) splits = true;
        if (splits) ec.split_src = j;
        ec.cmap[j] = t;
    }
    if (rw.count() == rv.count() - 1) {
        ec.is_merge = true;
        std::map<int, std::vector<int>> pre;
        for (int j = 0; j < rv.count(); ++j) pre[ec.cmap[j]].push_back(j);
        for (auto& [t, js] : pre)
            if (js.size() == 2) {
                ec.merge_a = js[0];
                ec.merge_b = js[1];
                ec.merge_to = t;
            }
        if (ec.merge_to < 0) fail("edge_circles: merge without a merged pair");
    } else if (rw.count() == rv.count() + 1) {
        if (ec.split_src < 0) fail("edge_circles: split without a splitting circle");
        // the arrow-positive child carries the (slots0-slots1) fragment of the
        // 1-smoothing, i.e. the circle through slots[0]
        const Crossing& cr = d.crossings[crossing];
        int pa = rw.circle_of_arc.at(cr.slots[0]);
        int pb = rw.circle_of_arc.at(cr.slots[2]);
        if (pa == pb) fail("edge_circles: split children coincide");
        ec.split_a = cr.arrow > 0 ? pa : pb;
        ec.split_b = cr.arrow > 0 ? pb : pa;
        ec.cmap[ec.split_src] = ec.split_a; // either lift works under the wedge prefactor
    } else {
        fail("edge_circles: circle count changed by more than one");
    }
    return ec;
}

std::optional<std::pair<Mono, int>> push_monomial(Mono m, const std::vector<int>& cmap) {
    Mono out = 0;
    int sign = 1;
    for (Mono t = m; t; t &= t - 1) {
        int j = __builtin_ctz(t);
        Mono bit = Mono(1) << cmap[j];
        if (out & bit) return std::nullopt;
        int above = __builtin_popcount(out >> (cmap[j] + 1));
        if (above & 1) sign = -sign;
        out |= bit;
    }
    return std::make_pair(out, sign);
}

MonoImage Complex::edge_image_raw(std::uint32_t v, int i, Mono m) const {
    std::uint32_t w = v | (1u << i);
    EdgeCircles ec = edge_circles(diag, res[v], res[w], i);
    MonoImage out;

    if (even_tqft) {
        if (ec.is_merge) {
            bool both = (m & (Mono(1) << ec.merge_a)) && (m & (Mono(1) << ec.merge_b));
            if (both) return out; // x^2 = 0
            auto p = push_monomial(m, ec.cmap);
            if (p) out.push_back({p->first, 1});
        } else {
            bool marked = m & (Mono(1) << ec.split_src);
            auto p = push_monomial(m & ~(Mono(1) << ec.split_src), ec.cmap);
            if (!p) return out;
            Mono base = p->first;
            Mono ba = Mono(1) << ec.split_a, bb = Mono(1) << ec.split_b;
            if (marked) {
                out.push_back({Mono(base | ba | bb), 1});
            } else {
                out.push_back({Mono(base | ba), 1});
                out.push_back({Mono(base | bb), 1});
            }
        }
        return out;
    }

    if (ec.is_merge) {
        auto p = push_monomial(m, ec.cmap);
        if (p) out.push_back({p->first, Int(p->second)});
        return out;
    }

    // split: (a_P - a_Q) ^ image(m)
    auto p = push_monomial(m, ec.cmap);
    if (!p) return out;
    Mono base = p->first;
    int s = p->second;
    Mono ba = Mono(1) << ec.split_a, bb = Mono(1) << ec.split_b;
    if (!(base & ba)) out.push_back({Mono(base | ba), Int(s * wedge_sign(ba, base))});
    if (!(base & bb)) out.push_back({Mono(base | bb), Int(-s * wedge_sign(bb, base))});
    return out;
}

GenImage Complex::diff(std::uint64_t g) const {
    std::uint32_t v = vertex_of(g);
    Mono m = mask_of(g, v);
    std::map<std::uint64_t, Int> acc;

    for (int i = 0; i < n; ++i) {
        if ((v >> i) & 1) continue;
        std::uint32_t w = v | (1u << i);
        int es = edge_sign(v, i);
        if (!reduced) {
            for (auto& [tm, c] : edge_image_raw(v, i, m)) acc[gen_index(w, tm)] += es * c;
        } else {
            std::map<Mono, Int> img;
            for (auto& [sm, sc] : red_basis[v][m])
                for (auto& [tm, c] : edge_image_raw(v, i, sm)) img[tm] += sc * c * es;
            int cw = res[w].count();
            Mono basebit = Mono(1) << (cw - 1);
            for (auto& [tm, c] : img)
                if (c != 0 && !(tm & basebit)) acc[gen_index(w, tm)] += c;
        }
    }
    GenImage out;
    for (auto& [t, c] : acc) {
        Int cc = reduce_coeff(c, coeffs);
        if (cc != 0) out.push_back({t, cc});
    }
    return out;
}

bool Complex::d_squared_zero() const {
    for (std::uint64_t g = 0; g < total; ++g) {
        std::map<std::uint64_t, Int> acc;
        for (auto& [t, c] : diff(g))
            for (auto& [t2, c2] : diff(t)) acc[t2] += c * c2;
        for (auto& [t, c] : acc)
            if (reduce_coeff(c, coeffs) != 0) return false;
    }
    return true;
}

std::string Complex::gen_str(std::uint64_t g) const {
    std::uint32_t v = vertex_of(g);
    std::ostringstream os;
    os << "v=";
    for (int i = 0; i < n; ++i) os << ((v >> i) & 1);
    os << " " << mono_str(mask_of(g, v));
    return os.str();
}

// ---------------------------------------------------------------------------
// construction

namespace {

struct Builder {
    Complex c;

    void base(const Diagram& d) {
        c.diag = d;
        c.n = d.n_crossings();
        if (c.n > 28) fail("build_complex: too many crossings");
        c.nplus = d.n_plus();
        c.nminus = d.n_minus();
        std::uint32_t nv = 1u << c.n;
        c.res.reserve(nv);
        for (std::uint32_t v = 0; v < nv; ++v) c.res.push_back(resolve(d, v));
    }

    void index() {
        std::uint32_t nv = 1u << c.n;
        c.slots.resize(nv);
        c.offset.resize(nv);
        std::uint64_t off = 0;
        for (std::uint32_t v = 0; v < nv; ++v) {
            int circles = c.res[v].count();
            int s = c.reduced ? circles - 1 : circles;
            if (s < 0 || s >= kMaxGenerators) fail("build_complex: resolution circle count out of range");
            c.slots[v] = std::uint8_t(s);
            c.offset[v] = off;
            off += std::uint64_t(1) << s;
        }
        c.total = off;
    }

    // unsigned face comparison: +1 commutes, -1 anticommutes, 0 both zero
    int face_type(std::uint32_t v, int i, int j) {
        std::uint32_t vi = v | (1u << i), vj = v | (1u << j);
        int cnt = c.res[v].count();
        int state = 0;
        for (Mono m = 0; m < (Mono(1) << cnt); ++m) {
            std::map<Mono, Int> p1, p2;
            for (auto& [tm, cc] : c.edge_image_raw(v, i, m))
                for (auto& [um, c2] : c.edge_image_raw(vi, j, tm)) p1[um] += cc * c2;
            for (auto& [tm, cc] : c.edge_image_raw(v, j, m))
                for (auto& [um, c2] : c.edge_image_raw(vj, i, tm)) p2[um] += cc * c2;
            auto clean = [](std::map<Mono, Int>& mp) {
                for (auto it = mp.begin(); it != mp.end();)
                    it = it->second == 0 ? mp.erase(it) : std::next(it);
            };
            clean(p1);
            clean(p2);
            if (p1.empty() && p2.empty()) continue;
            bool eq = true, neq = true;
            if (p1.size() != p2.size()) eq = neq = false;
            else
                for (auto& [k, val] : p1) {
                    auto it = p2.find(k);
                    if (it == p2.end()) {
                        eq = neq = false;
                        break;
                    }
                    if (it->second != val) eq = false;
                    if (it->second != -val) neq = false;
                }
            int t;
            if (eq && !neq) t = 1;
            else if (neq && !eq) t = -1;
            else
                fail("edge assignment: face neither commutes nor anticommutes (crossings " + std::to_string(i + 1) +
                     "," + std::to_string(j + 1) + ")");
            if (state == 0) state = t;
            else if (state != t)
                fail("edge assignment: face classification inconsistent across monomials");
        }
        return state;
    }

    void assign_signs() {
        std::uint32_t nv = 1u << c.n;
        c.esign.assign(std::uint64_t(nv) * std::max(c.n, 1), 0);
        if (c.n < 2) return;
        std::vector<std::uint32_t> order(nv);
        for (std::uint32_t v = 0; v < nv; ++v) order[v] = v;
        std::sort(order.begin(), order.end(), [](std::uint32_t a, std::uint32_t b) {
            int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
            return pa != pb ? pa < pb : a < b;
        });

        for (std::uint32_t t : order) {
            int k = __builtin_popcount(t);
            if (k < 2) continue;
            std::vector<int> bits;
            for (int i = 0; i < c.n; ++i)
                if ((t >> i) & 1) bits.push_back(i);
            // parity variables: x-th variable is the sign of edge (t - e_{bits[x]}, bits[x])
            ParitySolver ps(int(bits.size()));
            for (size_t x = 0; x < bits.size(); ++x)
                for (size_t y = x + 1; y < bits.size(); ++y) {
                    int i = bits[x], j = bits[y];
                    std::uint32_t w = t & ~(1u << i) & ~(1u << j);
                    int ft = face_type(w, i, j);
                    if (ft == 0) continue;
                    // anticommutation: sum of the four edge signs = 1 when the
                    // unsigned face commutes, 0 when it anticommutes
                    int rhs = (ft == 1) ? 1 : 0;
                    int lower = c.esign[std::uint64_t(w) * c.n + i] ^ c.esign[std::uint64_t(w) * c.n + j];
                    // vars: edge (t-e_i, i) is variable x (upper edge from w+e_j),
                    // edge (t-e_j, j) is variable y
                    if (!ps.relate(int(x), int(y), (rhs ^ lower) & 1))
                        fail("edge assignment: inconsistent parity system (face classification bug)");
                }
            for (size_t x = 0; x < bits.size(); ++x) {
                int i = bits[x];
                std::uint32_t src = t & ~(1u << i);
                c.esign[std::uint64_t(src) * c.n + i] = std::uint8_t(ps.value(int(x)));
            }
        }
    }

    void reduced_basis() {
        std::uint32_t nv = 1u << c.n;
        c.red_basis.resize(nv);
        for (std::uint32_t v = 0; v < nv; ++v) {
            int circles = c.res[v].count();
            int s = circles - 1;
            c.red_basis[v].resize(std::uint64_t(1) << s);
            for (Mono S = 0; S < (Mono(1) << s); ++S) {
                ExtElt e = ExtElt::unit(circles);
                for (int i = s - 1; i >= 0; --i)
                    if ((S >> i) & 1) {
                        ExtElt diff = ExtElt::generator(circles, i) - ExtElt::generator(circles, circles - 1);
                        e = wedge(diff, e);
                    }
                MonoImage mi;
                for (auto& [m, coef] : e.terms) mi.push_back({m, coef});
                c.red_basis[v][S] = std::move(mi);
            }
        }
    }

    void verify_reduced_closed() {
        for (std::uint32_t v = 0; v < (1u << c.n); ++v) {
            for (Mono S = 0; S < (Mono(1) << c.slots[v]); ++S) {
                for (int i = 0; i < c.n; ++i) {
                    if ((v >> i) & 1) continue;
                    std::uint32_t w = v | (1u << i);
                    std::map<Mono, Int> img;
                    for (auto& [sm, sc] : c.red_basis[v][S])
                        for (auto& [tm, cc] : c.edge_image_raw(v, i, sm)) img[tm] += sc * cc;
                    std::map<Mono, Int> rebuilt;
                    int cw = c.res[w].count();
                    Mono basebit = Mono(1) << (cw - 1);
                    for (auto& [tm, cc] : img) {
                        if (cc == 0 || (tm & basebit)) continue;
                        for (auto& [em, ec] : c.red_basis[w][tm]) rebuilt[em] += cc * ec;
                    }
                    auto get = [](const std::map<Mono, Int>& mp, Mono k) {
                        auto it = mp.find(k);
                        return it == mp.end() ? Int(0) : it->second;
                    };
                    for (auto& [tm, cc] : img)
                        if (cc != get(rebuilt, tm))
                            fail("reduced complex: differential leaks out of the subalgebra");
                    for (auto& [tm, cc] : rebuilt)
                        if (cc != get(img, tm)) fail("reduced complex: extraction mismatch");
                }
            }
        }
    }
};

} // namespace

ComplexPtr build_complex(const Diagram& d, bool reduced, Coeffs coeffs) {
    Builder b;
    b.c.reduced = reduced;
    b.c.coeffs = coeffs;
    b.base(d);
    b.index();
    b.assign_signs();
    if (reduced) {
        b.reduced_basis();
        b.verify_reduced_closed();
    }
    return std::make_shared<Complex>(std::move(b.c));
}

ComplexPtr even_f2_complex(const Diagram& d) {
    Builder b;
    b.c.even_tqft = true;
    b.c.coeffs = Coeffs::F2;
    b.base(d);
    b.index();
    b.c.esign.assign((std::uint64_t(1) << b.c.n) * std::max(b.c.n, 1), 0);
    return std::make_shared<Complex>(std::move(b.c));
}

ComplexPtr build_complex_alt_signs(const Diagram& d) {
    Builder b;
    b.base(d);
    b.index();
    b.assign_signs();
    // twist by the coboundary of the vertex set {bit0 = 1}: flip every edge
    // that changes bit 0, plus edges out of that set along other crossings
    if (b.c.n > 0) {
        std::uint32_t nv = 1u << b.c.n;
        for (std::uint32_t v = 0; v < nv; ++v)
            for (int i = 0; i < b.c.n; ++i) {
                if ((v >> i) & 1) continue;
                std::uint32_t w = v | (1u << i);
                bool ev = v & 1, ew = w & 1;
                if (ev != ew) b.c.esign[std::uint64_t(v) * b.c.n + i] ^= 1;
            }
    }
    return std::make_shared<Complex>(std::move(b.c));
}

// ---------------------------------------------------------------------------
// homology

HomologyTable homology(const Complex& c) {
    struct Block {
        std::vector<std::uint64_t> gens;
        std::map<std::uint64_t, int> pos;
    };
    std::map<std::pair<int, int>, Block> blocks;
    for (std::uint64_t g = 0; g < c.total; ++g) {
        auto key = std::make_pair(c.hdeg(g), c.qdeg(g));
        auto& b = blocks[key];
        b.pos[g] = int(b.gens.size());
        b.gens.push_back(g);
    }

    auto block_matrix = [&](int h, int q) -> IntMatrix {
        auto its = blocks.find({h, q});
        auto itt = blocks.find({h + 1, q});
        int rows = itt == blocks.end() ? 0 : int(itt->second.gens.size());
        int cols = its == blocks.end() ? 0 : int(its->second.gens.size());
        IntMatrix m(rows, cols);
        if (rows == 0 || cols == 0) return m;
        for (int j = 0; j < cols; ++j)
            for (auto& [t, coeff] : c.diff(its->second.gens[j])) {
                auto p = itt->second.pos.find(t);
                if (p == itt->second.pos.end()) fail("homology: differential left its (h+1,q) block");
                m(p->second, j) = coeff;
            }
        return m;
    };

    HomologyTable table;
    for (auto& [key, b] : blocks) {
        auto [h, q] = key;
        IntMatrix dout = block_matrix(h, q);
        IntMatrix din = block_matrix(h - 1, q);
        int dim = int(b.gens.size());
        int rank_out, rank_in;
        std::vector<Int> torsion;
        if (c.coeffs == Coeffs::F2) {
            // mod-2 rank: count odd invariant factors
            auto so = smith_normal_form(dout);
            auto si = smith_normal_form(din);
            rank_out = rank_in = 0;
            for (auto& x : so.diag)
                if (x % 2 != 0) ++rank_out;
            for (auto& x : si.diag)
                if (x % 2 != 0) ++rank_in;
        } else {
            rank_out = int_rank(dout);
            auto si = smith_normal_form(din);
            rank_in = si.rank;
            for (auto& x : si.diag)
                if (x > 1) torsion.push_back(x);
        }
        int free_rank = dim - rank_out - rank_in;
        if (free_rank < 0) fail("homology: negative free rank (block bug)");
        if (free_rank > 0 || !torsion.empty()) table.entries[{h, q}] = {free_rank, torsion};
    }
    return table;
}

LaurentPoly graded_euler(const Complex& c) {
    LaurentPoly p;
    for (std::uint64_t g = 0; g < c.total; ++g) p.add(c.qdeg(g), (c.hdeg(g) & 1) ? -1 : 1);
    return p;
}

} // namespace oddkh
