#include "oddkh/moves.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <cstdlib>
#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }

using ImgMap = std::map<Mono, Int>; // image of one monomial inside a vertex algebra

void accumulate(ImgMap& acc, const MonoImage& img, const Int& c) {
    for (auto& [m, k] : img) {
        acc[m] += c * k;
    }
}
void clean(ImgMap& m) {
    for (auto it = m.begin(); it != m.end();)
        it = (it->second == 0) ? m.erase(it) : std::next(it);
}

enum class Rel { BothZero, Eq, Neg, Mismatch };

constexpr int kAutoDeg = INT_MIN;

Rel compare(const std::vector<ImgMap>& a, const std::vector<ImgMap>& b) {
    bool eq = true, neg = true, seen = false;
    for (size_t i = 0; i < a.size(); ++i) {
        for (auto& [m, c] : a[i]) {
            auto it = b[i].find(m);
            Int other = it == b[i].end() ? Int(0) : it->second;
            if (c != 0 || other != 0) seen = true;
            if (c != other) eq = false;
            if (c != -other) neg = false;
        }
        for (auto& [m, c] : b[i]) {
            if (a[i].count(m)) continue;
            if (c != 0) seen = true, eq = false;
            if (c != 0 && c != 0) neg = neg; // a-side zero: need c == -0 -> c == 0
            if (c != 0) neg = false;
        }
    }
    if (!seen) return Rel::BothZero;
    if (eq && !neg) return Rel::Eq;
    if (neg && !eq) return Rel::Neg;
    if (eq && neg) return Rel::BothZero;
    return Rel::Mismatch;
}

// ---------------------------------------------------------------------------
// circle correspondences through arc provenance

// relation: target arc -> source arcs it came from
using ArcRel = std::map<int, std::set<int>>;

ArcRel invert_rel(const ArcRel& r) {
    ArcRel out;
    for (auto& [t, ss] : r)
        for (int s : ss) out[s].insert(t);
    return out;
}

// For each target circle, the set of source circles its arcs came from.
std::vector<std::set<int>> circle_sources(const Resolution& rt, const Resolution& rs, const ArcRel& t2s) {
    std::vector<std::set<int>> out(rt.count());
    for (int t = 0; t < rt.count(); ++t)
        for (int a : rt.circles[t]) {
            auto it = t2s.find(a);
            if (it == t2s.end()) continue;
            for (int sa : it->second) {
                auto f = rs.circle_of_arc.find(sa);
                if (f != rs.circle_of_arc.end()) out[t].insert(f->second);
            }
        }
    return out;
}

// bijective matching source circle -> target circle; circles listed in
// `skip_target` are left out (they must then be unmatched) and every other
// target circle must correspond to exactly one source circle
std::vector<int> match_bijective(const Resolution& rs, const Resolution& rt, const ArcRel& t2s,
                                 const std::set<int>& skip_target = {}) {
    auto srcs = circle_sources(rt, rs, t2s);
    std::vector<int> s2t(rs.count(), -1);
    for (int t = 0; t < rt.count(); ++t) {
        if (skip_target.count(t)) continue;
        if (srcs[t].size() != 1) {
            std::string msg = "circle matching: target circle {";
            for (int a : rt.circles[t]) msg += std::to_string(a) + ",";
            msg += "} sourced by " + std::to_string(srcs[t].size()) + " circles";
            fail(msg);
        }
        int s = *srcs[t].begin();
        if (s2t[s] != -1) fail("circle matching: source circle matched twice");
        s2t[s] = t;
    }
    for (int s = 0; s < rs.count(); ++s)
        if (s2t[s] < 0) fail("circle matching: source circle unmatched");
    return s2t;
}

// ---------------------------------------------------------------------------
// family-based construction with F2 sign solving

struct Family {
    std::vector<std::uint32_t> domain;            // source vertices
    std::map<std::uint32_t, std::uint32_t> vmap;  // source vertex -> target vertex
    std::map<std::uint32_t, std::vector<ImgMap>> raw; // per vertex, image of each monomial
    std::map<std::uint32_t, int> vidx;
};

struct MoveBuilder {
    ComplexPtr S, T;
    std::vector<Family> fams;
    std::vector<int> base;
    int nvars = 0;
    // deferred parity relations, replayed per chain-sign attempt:
    //   {a, b, bit, flips_with_chain_sign}
    struct RelEntry {
        int a, b, bit;
        bool flip;
    };
    std::vector<RelEntry> rels;
    struct PinEntry {
        int a, bit;
    };
    std::vector<PinEntry> pins;

    int add_family(Family f) {
        int idx = 0;
        for (auto v : f.domain) f.vidx[v] = idx++;
        base.push_back(nvars);
        nvars += idx;
        fams.push_back(std::move(f));
        return int(fams.size()) - 1;
    }
    int var(int fam, std::uint32_t v) const { return base[fam] + fams[fam].vidx.at(v); }

    // image of monomial m under the signed target edge (w, j)
    std::vector<ImgMap> edge_then(const Family& f, std::uint32_t v, int j_tgt) const {
        std::uint32_t tv = f.vmap.at(v);
        int es = T->edge_sign(tv, j_tgt);
        int cnt = 1 << S->slots[v];
        std::vector<ImgMap> out(cnt);
        for (int m = 0; m < cnt; ++m) {
            for (auto& [tm, c] : f.raw.at(v)[m])
                accumulate(out[m], T->edge_image_raw(tv, j_tgt, tm), c * es);
            clean(out[m]);
        }
        return out;
    }
    std::vector<ImgMap> then_edge(const Family& f, std::uint32_t v, int i_src) const {
        std::uint32_t w = v | (1u << i_src);
        int es = S->edge_sign(v, i_src);
        int cnt = 1 << S->slots[v];
        std::vector<ImgMap> out(cnt);
        for (int m = 0; m < cnt; ++m) {
            for (auto& [tm, c] : S->edge_image_raw(v, i_src, Mono(m)))
                for (auto& [um, c2] : f.raw.at(w)[tm]) out[m][um] += Int(es) * c * c2;
            clean(out[m]);
        }
        return out;
    }

    // chain-commutation across one edge of the family: f(d_src) vs d_tgt(f)
    void edge_flow(int fam, std::uint32_t v, int i_src, int j_tgt) {
        const Family& f = fams[fam];
        std::uint32_t w = v | (1u << i_src);
        auto M1 = edge_then(f, v, j_tgt);  // d_tgt . f_v  (target-edge side)
        auto M2 = then_edge(f, v, i_src);  // f_w . d_src
        Rel r = compare(M2, M1);
        if (r == Rel::BothZero) return;
        if (r == Rel::Mismatch) {
            std::string msg = "move: edge commutation mismatch at family " + std::to_string(fam) +
                              " vertex " + std::to_string(v) + " edge " + std::to_string(i_src) + "->" +
                              std::to_string(j_tgt);
            if (std::getenv("ODDKH_DEBUG")) {
                for (size_t m = 0; m < M1.size(); ++m) {
                    msg += "\n  m=" + std::to_string(m) + " fd:";
                    for (auto& [k, cc] : M2[m]) msg += " " + cc.str() + "*M" + std::to_string(k);
                    msg += "  df:";
                    for (auto& [k, cc] : M1[m]) msg += " " + cc.str() + "*M" + std::to_string(k);
                }
            }
            fail(msg);
        }
        // (-1)^{x_w} M2 = chain_sign (-1)^{x_v} M1
        int bit = (r == Rel::Eq) ? 0 : 1; // x_v + x_w = bit when chain_sign = +1
        rels.push_back({var(fam, w), var(fam, v), bit, true});
    }

    // two families feeding the same target vertex through target edges must
    // cancel: (-1)^a E_a(f_a) + (-1)^b E_b(f_b) = 0
    void cancel_pair(int fam_a, int j_a, int fam_b, int j_b, std::uint32_t v) {
        auto Ma = edge_then(fams[fam_a], v, j_a);
        auto Mb = edge_then(fams[fam_b], v, j_b);
        Rel r = compare(Ma, Mb);
        if (r == Rel::BothZero) return;
        if (r == Rel::Mismatch) fail("move: cross-component cancellation mismatch");
        int bit = (r == Rel::Eq) ? 1 : 0;
        rels.push_back({var(fam_a, v), var(fam_b, v), bit, false});
    }

    void assert_edge_zero(int fam, std::uint32_t v, int i_src) {
        auto M = then_edge(fams[fam], v, i_src);
        for (auto& im : M)
            if (!im.empty()) fail("move: expected vanishing composite is nonzero");
    }
    void assert_edge_then_zero(int fam, std::uint32_t v, int j_tgt) {
        auto M = edge_then(fams[fam], v, j_tgt);
        for (auto& im : M)
            if (!im.empty()) fail("move: expected vanishing composite is nonzero");
    }

    ChainMap solve(int dh, int dq, bool check = true) {
        for (int cs : {1, -1}) {
            ParitySolver ps(nvars);
            bool ok = true;
            for (auto& r : rels) {
                int bit = r.bit ^ (r.flip && cs < 0 ? 1 : 0);
                if (!ps.relate(r.a, r.b, bit)) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                for (auto& p : pins)
                    if (!ps.set(p.a, p.bit)) {
                        ok = false;
                        break;
                    }
            if (!ok) continue;
            return emit(ps, cs, dh, dq, check);
        }
        fail("move: sign system inconsistent for both chain signs (invalid move)");
    }

    ChainMap emit(ParitySolver& ps, int cs, int dh, int dq, bool check = true) {
        // bake signs into dense per-generator images
        struct Baked {
            std::uint64_t tgt_off;
            std::vector<MonoImage> img;
        };
        auto baked = std::make_shared<std::map<std::uint64_t, std::vector<Baked>>>();
        for (size_t fi = 0; fi < fams.size(); ++fi) {
            auto& f = fams[fi];
            for (auto v : f.domain) {
                int sgn = ps.value(var(int(fi), v)) ? -1 : 1;
                Baked b;
                b.tgt_off = T->offset[f.vmap.at(v)];
                auto& rawv = f.raw.at(v);
                b.img.resize(rawv.size());
                for (size_t m = 0; m < rawv.size(); ++m)
                    for (auto& [tm, c] : rawv[m])
                        if (c != 0) b.img[m].push_back({tm, c * sgn});
                (*baked)[S->offset[v]].push_back(std::move(b));
            }
        }
        ChainMap out;
        out.src = S;
        out.tgt = T;
        out.chain_sign = cs;
        if (dh == kAutoDeg) {
            // lenient internal diagrams carry arbitrary global shifts; read
            // the degree off the first nonzero entry
            dh = dq = 0;
            bool found = false;
            for (auto& [off, bs] : *baked) {
                for (auto& b : bs)
                    for (size_t m = 0; m < b.img.size() && !found; ++m)
                        if (!b.img[m].empty()) {
                            std::uint64_t g = off + m;
                            std::uint64_t t = b.tgt_off + b.img[m][0].first;
                            dh = T->hdeg(t) - S->hdeg(g);
                            dq = T->qdeg(t) - S->qdeg(g);
                            found = true;
                        }
                if (found) break;
            }
        }
        out.dh = dh;
        out.dq = dq;
        ComplexPtr Sp = S;
        out.apply_gen = [baked, Sp](std::uint64_t g) {
            GenImage img;
            std::uint32_t v = Sp->vertex_of(g);
            auto it = baked->find(Sp->offset[v]);
            if (it == baked->end()) return img;
            Mono m = Mono(g - Sp->offset[v]);
            std::map<std::uint64_t, Int> acc;
            for (auto& b : it->second)
                for (auto& [tm, c] : b.img[m]) acc[b.tgt_off + tm] += c;
            for (auto& [t, c] : acc)
                if (c != 0) img.push_back({t, c});
            return img;
        };
        if (check) out.verify();
        return out;
    }
};

std::vector<std::uint32_t> all_vertices(const Complex& c) {
    std::vector<std::uint32_t> v(std::uint64_t(1) << c.n);
    for (std::uint32_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

// identity-shaped family: bijective circle matching per vertex
Family bijective_family(const Complex& S, const Complex& T, const ArcRel& t2s,
                        std::function<std::uint32_t(std::uint32_t)> vmap,
                        const std::vector<std::uint32_t>& domain) {
    Family f;
    f.domain = domain;
    for (auto v : domain) {
        std::uint32_t tv = vmap(v);
        f.vmap[v] = tv;
        auto s2t = match_bijective(S.res[v], T.res[tv], t2s);
        int cnt = 1 << S.slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s2t);
            if (!p) fail("bijective family: collision");
            raws[m][p->first] = p->second;
        }
        f.raw[v] = std::move(raws);
    }
    return f;
}

ArcRel rel_of(const Rewrite& rw) {
    ArcRel r;
    for (auto& [t, ss] : rw.arc_sources) r[t] = ss;
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Morse moves

ChainMap birth_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw) {
    ArcRel t2s = rel_of(rw);
    MoveBuilder mb{src, tgt};
    Family f;
    f.domain = all_vertices(*src);
    for (auto v : f.domain) {
        f.vmap[v] = v;
        // match all target circles except the newborn one
        int newc = tgt->res[v].circle_of_arc.at(rw.new_arc_loop);
        auto s2t = match_bijective(src->res[v], tgt->res[v], t2s, {newc});
        int cnt = 1 << src->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s2t);
            if (!p) fail("birth: collision");
            raws[m][p->first] = p->second;
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : all_vertices(*src))
        for (int i = 0; i < src->n; ++i)
            if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
    return mb.solve(0, +1);
}

ChainMap death_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int loop_arc) {
    ArcRel t2s = rel_of(rw);
    MoveBuilder mb{src, tgt};
    Family f;
    f.domain = all_vertices(*src);
    for (auto v : f.domain) {
        f.vmap[v] = v;
        int dying = src->res[v].circle_of_arc.at(loop_arc);
        // target circles all match source circles other than the dying one
        auto srcs = circle_sources(tgt->res[v], src->res[v], t2s);
        std::vector<int> s2t(src->res[v].count(), -1);
        for (int t = 0; t < tgt->res[v].count(); ++t) {
            if (srcs[t].size() != 1) fail("death: ambiguous circle matching");
            s2t[*srcs[t].begin()] = t;
        }
        Mono dbit = Mono(1) << dying;
        int cnt = 1 << src->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            if (!(Mono(m) & dbit)) continue; // contraction kills circle-free monomials
            int fs = front_sign(Mono(m), dying);
            auto p = push_monomial(Mono(m) & ~dbit, s2t);
            if (!p) fail("death: collision");
            raws[m][p->first] = Int(fs * p->second);
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : all_vertices(*src))
        for (int i = 0; i < src->n; ++i)
            if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
    return mb.solve(0, +1);
}

ChainMap saddle_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int arc_a, int arc_b, int arrow) {
    ArcRel t2s = rel_of(rw);
    MoveBuilder mb{src, tgt};
    Family f;
    f.domain = all_vertices(*src);
    for (auto v : f.domain) {
        f.vmap[v] = v;
        const Resolution& rs = src->res[v];
        const Resolution& rt = tgt->res[v];
        int cnt = 1 << src->slots[v];
        std::vector<ImgMap> raws(cnt);

        if (rt.count() == rs.count() - 1) {
            // merge
            auto srcs = circle_sources(rt, rs, t2s);
            std::vector<int> s2t(rs.count(), -1);
            for (int t = 0; t < rt.count(); ++t)
                for (int s : srcs[t]) {
                    if (s2t[s] != -1 && s2t[s] != t) fail("saddle: inconsistent merge matching");
                    s2t[s] = t;
                }
            for (int s = 0; s < rs.count(); ++s)
                if (s2t[s] < 0) fail("saddle: unmatched source circle");
            for (int m = 0; m < cnt; ++m) {
                auto p = push_monomial(Mono(m), s2t);
                if (p) raws[m][p->first] = p->second;
            }
        } else if (rt.count() == rs.count() + 1) {
            // split: a side and b side of the band name the children
            int arc_p = arc_a, arc_q = arc_b;
            if (arc_a == arc_b) arc_q = rw.new_arc_loop;
            if (!rt.circle_of_arc.count(arc_p) || !rt.circle_of_arc.count(arc_q))
                fail("saddle: band arc missing in the new frame");
            int tp = rt.circle_of_arc.at(arc_p), tq = rt.circle_of_arc.at(arc_q);
            if (tp == tq) fail("saddle: split children coincide");
            if (arrow < 0) std::swap(tp, tq);

            auto srcs = circle_sources(rt, rs, t2s);
            std::vector<int> s2t(rs.count(), -1);
            int split_src = -1;
            for (int t = 0; t < rt.count(); ++t) {
                if (srcs[t].size() != 1) fail("saddle: ambiguous split matching");
                int s = *srcs[t].begin();
                if (s2t[s] != -1) split_src = s; // hit twice: the splitting circle
                s2t[s] = t;
            }
            if (split_src < 0) fail("saddle: no splitting circle found");
            s2t[split_src] = tp; // route through the arrow-positive child
            Mono ba = Mono(1) << tp, bb = Mono(1) << tq;
            for (int m = 0; m < cnt; ++m) {
                auto p = push_monomial(Mono(m), s2t);
                if (!p) continue;
                Mono basem = p->first;
                int s0 = p->second;
                if (!(basem & ba)) raws[m][basem | ba] += Int(s0 * wedge_sign(ba, basem));
                if (!(basem & bb)) raws[m][basem | bb] += Int(-s0 * wedge_sign(bb, basem));
                clean(raws[m]);
            }
        } else {
            fail("saddle: circle count changed by more than one at a vertex");
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : all_vertices(*src))
        for (int i = 0; i < src->n; ++i)
            if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
    return mb.solve(0, -1);
}

ChainMap relabel_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw) {
    MoveBuilder mb{src, tgt};
    Family f = bijective_family(*src, *tgt, rel_of(rw), [](std::uint32_t v) { return v; }, all_vertices(*src));
    int fi = mb.add_family(std::move(f));
    for (auto v : all_vertices(*src))
        for (int i = 0; i < src->n; ++i)
            if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
    return mb.solve(0, 0);
}

MoveResult apply_birth(ComplexPtr src) {
    Rewrite rw = birth(src->diag);
    MoveResult r;
    r.frame = rw.diagram;
    r.target = build_complex(rw.diagram);
    r.map = birth_map(src, r.target, rw);
    return r;
}
MoveResult apply_death(ComplexPtr src, int loop_arc) {
    Rewrite rw = death(src->diag, loop_arc);
    MoveResult r;
    r.frame = rw.diagram;
    r.target = build_complex(rw.diagram);
    r.map = death_map(src, r.target, rw, loop_arc);
    return r;
}
MoveResult apply_saddle(ComplexPtr src, int arc_a, int arc_b, int arrow) {
    Rewrite rw = saddle_rewrite(src->diag, arc_a, arc_b);
    MoveResult r;
    r.frame = rw.diagram;
    r.target = build_complex(rw.diagram);
    r.map = saddle_map(src, r.target, rw, arc_a, arc_b, arrow);
    return r;
}

// ---------------------------------------------------------------------------
// Reidemeister I

ChainMap r1_add_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int kink_sign) {
    ArcRel t2s = rel_of(rw);
    int nc = rw.new_crossing_a;
    if (nc != tgt->n - 1) fail("r1+: kink crossing must be the last");
    // the subcube carrying the kink circle: bit 1 for a positive kink
    std::uint32_t bit = kink_sign > 0 ? (1u << nc) : 0u;

    MoveBuilder mb{src, tgt};
    Family f;
    f.domain = all_vertices(*src);
    for (auto v : f.domain) {
        std::uint32_t tv = v | bit;
        f.vmap[v] = tv;
        const Resolution& rt = tgt->res[tv];
        int kc = rt.circle_of_arc.at(rw.new_arc_loop);
        auto s2t = match_bijective(src->res[v], rt, t2s, {kc});
        int cnt = 1 << src->slots[v];
        std::vector<ImgMap> raws(cnt);
        if (kink_sign > 0) {
            // cup: include not using the kink circle
            for (int m = 0; m < cnt; ++m) {
                auto p = push_monomial(Mono(m), s2t);
                if (!p) fail("r1+: collision");
                raws[m][p->first] = p->second;
            }
        } else {
            // split: (a_through - a_kink) ^ x
            int through = s2t[src->res[v].circle_of_arc.at(
                *rw.arc_sources.at(rw.new_arc_loop).begin())];
            Mono bt = Mono(1) << through, bk = Mono(1) << kc;
            for (int m = 0; m < cnt; ++m) {
                auto p = push_monomial(Mono(m), s2t);
                if (!p) fail("r1-add: collision");
                Mono basem = p->first;
                int s0 = p->second;
                if (!(basem & bt)) raws[m][basem | bt] += Int(s0 * wedge_sign(bt, basem));
                if (!(basem & bk)) raws[m][basem | bk] += Int(-s0 * wedge_sign(bk, basem));
                clean(raws[m]);
            }
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : all_vertices(*src))
        for (int i = 0; i < src->n; ++i)
            if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
    if (kink_sign < 0) {
        // the cone edge out of the kink=0 subcube must kill the image
        for (auto v : all_vertices(*src)) mb.assert_edge_then_zero(fi, v, nc);
    }
    return mb.solve(0, 0);
}

ChainMap r1_remove_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int kc) {
    ArcRel t2s = rel_of(rw);
    const Crossing& cr = src->diag.crossings[kc];
    int loop_arc = -1;
    for (int s = 0; s < 4; ++s)
        if (cr.slots[s] == cr.slots[(s + 1) % 4]) loop_arc = cr.slots[s];
    if (loop_arc < 0) fail("r1-: not a kink");
    int ksign = cr.sign;
    std::uint32_t bit = ksign > 0 ? (1u << kc) : 0u;

    auto compact = [&](std::uint32_t v) {
        std::uint32_t low = v & ((1u << kc) - 1);
        std::uint32_t high = (v >> (kc + 1)) << kc;
        return low | high;
    };

    MoveBuilder mb{src, tgt};
    Family f;
    for (std::uint32_t v = 0; v < (1u << src->n); ++v)
        if ((v & (1u << kc)) == bit) f.domain.push_back(v);
    for (auto v : f.domain) {
        std::uint32_t tv = compact(v);
        f.vmap[v] = tv;
        const Resolution& rs = src->res[v];
        const Resolution& rt = tgt->res[tv];
        int kcirc = rs.circle_of_arc.at(loop_arc);
        int cnt = 1 << src->slots[v];
        std::vector<ImgMap> raws(cnt);

        // match target circles against source circles (kink circle merges
        // into the strand for a positive kink, dies for a negative one)
        auto srcs = circle_sources(rt, rs, t2s);
        std::vector<int> s2t(rs.count(), -1);
        for (int t = 0; t < rt.count(); ++t)
            for (int s : srcs[t]) {
                if (s2t[s] >= 0 && s2t[s] != t) fail("r1-: inconsistent matching");
                s2t[s] = t;
            }

        if (ksign > 0) {
            // merge the kink circle into the through strand
            for (int s = 0; s < int(rs.count()); ++s)
                if (s2t[s] < 0) fail("r1-: unmatched circle");
            for (int m = 0; m < cnt; ++m) {
                auto p = push_monomial(Mono(m), s2t);
                if (p) raws[m][p->first] = p->second;
            }
        } else {
            // contraction against the kink circle
            Mono kb = Mono(1) << kcirc;
            for (int m = 0; m < cnt; ++m) {
                if (!(Mono(m) & kb)) continue;
                int fs = front_sign(Mono(m), kcirc);
                auto p = push_monomial(Mono(m) & ~kb, s2t);
                if (!p) fail("r1-: collision");
                raws[m][p->first] = Int(fs * p->second);
            }
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : mb.fams[fi].domain)
        for (int i = 0; i < src->n; ++i) {
            if (i == kc || ((v >> i) & 1)) continue;
            int j = i > kc ? i - 1 : i;
            mb.edge_flow(fi, v, i, j);
        }
    if (ksign > 0) {
        // entering cone edges must die under the retraction: r(sigma x) = 0
        Family& fam = mb.fams[fi];
        for (std::uint32_t v = 0; v < (1u << src->n); ++v)
            if (!(v & (1u << kc))) {
                std::uint32_t w = v | (1u << kc);
                int cnt = 1 << src->slots[v];
                for (int m = 0; m < cnt; ++m) {
                    ImgMap acc;
                    for (auto& [tm, c] : src->edge_image_raw(v, kc, Mono(m)))
                        for (auto& [um, c2] : fam.raw.at(w)[tm]) acc[um] += c * c2;
                    clean(acc);
                    if (!acc.empty()) fail("r1-: cone edge does not vanish under the retraction");
                }
            }
    }
    return mb.solve(0, 0);
}


// ---------------------------------------------------------------------------
// Reidemeister II: shared corner geometry for a crossing pair

namespace {

struct PairCorners {
    int c1, c2;                 // pair crossings in the pair complex
    int over_arc, under_arc;    // bigon arcs
    std::uint32_t maskC, maskB; // corner bit patterns on {c1, c2}
    int xAB, yAC;               // crossing flipped A->B resp. A->C
};

PairCorners find_corners(const Complex& CH, int c1, int c2) {
    PairCorners pc;
    pc.c1 = c1;
    pc.c2 = c2;
    if (!r2_bigon(CH.diag, c1, c2, &pc.over_arc, &pc.under_arc))
        fail("rii: crossings do not bound a removable bigon");
    // the circle corner: the (b1, b2) smoothing closing the bigon arcs into
    // their own circle; independent of the other coordinates
    int found = -1;
    for (int b1 = 0; b1 < 2; ++b1)
        for (int b2 = 0; b2 < 2; ++b2) {
            std::uint32_t v = (b1 ? (1u << c1) : 0) | (b2 ? (1u << c2) : 0);
            const Resolution& r = CH.res[v];
            int ca = r.circle_of_arc.at(pc.over_arc);
            if (ca != r.circle_of_arc.at(pc.under_arc)) continue;
            std::set<int> arcs(r.circles[ca].begin(), r.circles[ca].end());
            if (arcs == std::set<int>{pc.over_arc, pc.under_arc}) {
                if (found >= 0) fail("rii: ambiguous bigon corner");
                found = b1 * 2 + b2;
            }
        }
    if (found < 0) fail("rii: no corner closes the bigon");
    int b1 = found / 2, b2 = found % 2;
    if (b1 + b2 != 1) fail("rii: bigon corner is not at cube level one");
    pc.maskC = (b1 ? (1u << c1) : 0) | (b2 ? (1u << c2) : 0);
    pc.maskB = ((1 - b1) ? (1u << c1) : 0) | ((1 - b2) ? (1u << c2) : 0);
    pc.xAB = (1 - b1) ? c1 : c2; // A->B flips the bit set in B
    pc.yAC = b1 ? c1 : c2;       // A->C flips the bit set in C
    return pc;
}

// the circle of the bigon at a C-corner vertex
int bigon_circle(const Complex& CH, std::uint32_t v, const PairCorners& pc) {
    return CH.res[v].circle_of_arc.at(pc.over_arc);
}

// inverse circle map from a C-corner vertex to its A-corner vertex: drops the
// bigon circle, undoes the A->C split
std::vector<int> c_to_a_circles(const Complex& CH, std::uint32_t vC, const PairCorners& pc) {
    std::uint32_t vA = vC & ~pc.maskC;
    EdgeCircles ec = edge_circles(CH.diag, CH.res[vA], CH.res[vC], pc.yAC);
    if (ec.is_merge) fail("rii: A->C edge is not a split");
    int ucirc = bigon_circle(CH, vC, pc);
    std::vector<int> inv(CH.res[vC].count(), -1);
    for (int j = 0; j < int(ec.cmap.size()); ++j) inv[ec.cmap[j]] = j;
    // both split children come from the splitting circle
    if (ec.split_src >= 0) {
        inv[ec.split_a] = ec.split_src;
        inv[ec.split_b] = ec.split_src;
    }
    inv[ucirc] = -1; // contracted before the relabel
    return inv;
}

// section of the C->D merge: target circle -> C-circle avoiding the bigon
std::vector<int> d_to_c_circles(const Complex& CH, std::uint32_t vC, const PairCorners& pc) {
    std::uint32_t vD = vC | pc.maskB; // flips xAB up
    EdgeCircles ec = edge_circles(CH.diag, CH.res[vC], CH.res[vD], pc.xAB);
    if (!ec.is_merge) fail("rii: C->D edge is not a merge");
    int ucirc = bigon_circle(CH, vC, pc);
    std::vector<int> s(CH.res[vD].count(), -1);
    for (int j = 0; j < int(ec.cmap.size()); ++j)
        if (j != ucirc) s[ec.cmap[j]] = j;
    for (int t = 0; t < int(s.size()); ++t)
        if (s[t] < 0) fail("rii: merge section incomplete");
    return s;
}

// contraction against circle k followed by a circle relabel (entries of inv
// must cover every circle except k)
ImgMap contract_relabel(Mono m, int k, const std::vector<int>& inv) {
    ImgMap out;
    Mono kb = Mono(1) << k;
    if (!(m & kb)) return out;
    int fs = front_sign(m, k);
    auto p = push_monomial(m & ~kb, inv);
    if (!p) return out;
    out[p->first] = Int(fs * p->second);
    return out;
}

// split-style wedge: (a_p - a_q) ^ relabel(m)
void wedge_diff_into(ImgMap& out, Mono base, int s0, int p, int q) {
    Mono bp = Mono(1) << p, bq = Mono(1) << q;
    if (!(base & bp)) out[base | bp] += Int(s0 * wedge_sign(bp, base));
    if (!(base & bq)) out[base | bq] += Int(-s0 * wedge_sign(bq, base));
}

// vertices of the subcube of CH with the {c1,c2} bits fixed to `corner`
std::vector<std::uint32_t> corner_vertices(const Complex& CH, const PairCorners& pc, std::uint32_t corner) {
    std::vector<std::uint32_t> out;
    std::uint32_t pairmask = (1u << pc.c1) | (1u << pc.c2);
    for (std::uint32_t v = 0; v < (1u << CH.n); ++v)
        if ((v & pairmask) == corner) out.push_back(v);
    return out;
}

// compact a vertex of the pair complex to a vertex of the pair-free complex
std::uint32_t drop_two_bits(std::uint32_t v, int c1, int c2) {
    int lo = std::min(c1, c2), hi = std::max(c1, c2);
    std::uint32_t low = v & ((1u << lo) - 1);
    std::uint32_t mid = (v >> (lo + 1)) & ((1u << (hi - lo - 1)) - 1);
    std::uint32_t high = v >> (hi + 1);
    return low | (mid << lo) | (high << (hi - 1));
}

int drop_two_index(int i, int c1, int c2) {
    int lo = std::min(c1, c2), hi = std::max(c1, c2);
    if (i == lo || i == hi) fail("drop_two_index: pair crossing");
    return i - (i > lo) - (i > hi);
}

// core of the RII addition map: CB (no pair) -> CH (with pair)
ChainMap rii_add_core(ComplexPtr CB, ComplexPtr CH, const ArcRel& t2s, const PairCorners& pc) {
    MoveBuilder mb{CB, CH};
    std::uint32_t pairmask = (1u << pc.c1) | (1u << pc.c2);
    (void)pairmask;

    auto lift = [&](std::uint32_t v, std::uint32_t corner) {
        // inverse of drop_two_bits with the two pair bits set to `corner`
        int lo = std::min(pc.c1, pc.c2), hi = std::max(pc.c1, pc.c2);
        std::uint32_t low = v & ((1u << lo) - 1);
        std::uint32_t mid = (v >> lo) & ((1u << (hi - lo - 1)) - 1);
        std::uint32_t high = v >> (hi - 1);
        return low | (mid << (lo + 1)) | (high << (hi + 1)) | corner;
    };

    // iota into the parallel corner
    Family fi;
    fi.domain = all_vertices(*CB);
    std::map<std::uint32_t, std::vector<int>> iota_match; // per source vertex: CB circle -> CH circle
    for (auto v : fi.domain) {
        std::uint32_t tv = lift(v, pc.maskB);
        fi.vmap[v] = tv;
        // exclude nothing: every CH circle at the parallel corner matches a
        // CB circle through the provenance, bigon arcs filtered out
        ArcRel filtered = t2s;
        filtered.erase(pc.over_arc);
        filtered.erase(pc.under_arc);
        auto s2t = match_bijective(CB->res[v], CH->res[tv], filtered);
        iota_match[v] = s2t;
        int cnt = 1 << CB->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s2t);
            if (!p) fail("rii add: iota collision");
            raws[m][p->first] = p->second;
        }
        fi.raw[v] = std::move(raws);
    }
    int fam_i = mb.add_family(std::move(fi));

    // kappa into the circle corner: the B->D edge map (merge or split)
    // followed by the section of the C->D merge
    Family fk;
    fk.domain = all_vertices(*CB);
    for (auto v : fk.domain) {
        std::uint32_t tB = lift(v, pc.maskB);
        std::uint32_t tC = lift(v, pc.maskC);
        fk.vmap[v] = tC;
        auto s = d_to_c_circles(*CH, tC, pc);
        auto& s2B = iota_match.at(v);
        int cnt = 1 << CB->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto pb = push_monomial(Mono(m), s2B);
            if (!pb) fail("rii add: kappa collision");
            for (auto& [dm, dc] : CH->edge_image_raw(tB, pc.yAC, pb->first)) {
                auto ps = push_monomial(dm, s);
                if (ps) raws[m][ps->first] += Int(pb->second) * dc * ps->second;
            }
            clean(raws[m]);
        }
        fk.raw[v] = std::move(raws);
    }
    int fam_k = mb.add_family(std::move(fk));

    for (auto v : all_vertices(*CB))
        for (int i = 0; i < CB->n; ++i) {
            if ((v >> i) & 1) continue;
            int lo = std::min(pc.c1, pc.c2), hi = std::max(pc.c1, pc.c2);
            int j = i + (i >= lo) + (i + (i >= lo) >= hi);
            mb.edge_flow(fam_i, v, i, j);
            mb.edge_flow(fam_k, v, i, j);
        }
    // D-corner cancellation: iota through B->D against kappa through C->D
    for (auto v : all_vertices(*CB)) mb.cancel_pair(fam_i, pc.yAC, fam_k, pc.xAB, v);
    return mb.solve(kAutoDeg, kAutoDeg);
}

// core of the RII removal map: CH -> CB
ChainMap rii_remove_core(ComplexPtr CH, ComplexPtr CB, const ArcRel& t2s_raw, const PairCorners& pc) {
    MoveBuilder mb{CH, CB};
    auto compact = [&](std::uint32_t v) { return drop_two_bits(v, pc.c1, pc.c2); };
    // the bigon arcs migrate between strands when the pair is undone; drop
    // them from the provenance so circle matching sees only stable arcs
    ArcRel t2s;
    for (auto& [k, vals] : t2s_raw) {
        std::set<int> f;
        for (int a : vals)
            if (a != pc.over_arc && a != pc.under_arc) f.insert(a);
        t2s[k] = f.empty() ? vals : f;
    }

    // rho_B: parallel corner, bijective match
    Family fb;
    fb.domain = corner_vertices(*CH, pc, pc.maskB);
    std::map<std::uint32_t, std::vector<int>> b_match;
    for (auto v : fb.domain) {
        std::uint32_t tv = compact(v);
        fb.vmap[v] = tv;
        auto s2t = match_bijective(CH->res[v], CB->res[tv], t2s);
        b_match[v] = s2t;
        int cnt = 1 << CH->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s2t);
            if (!p) fail("rii remove: collision");
            raws[m][p->first] = p->second;
        }
        fb.raw[v] = std::move(raws);
    }
    int fam_b = mb.add_family(std::move(fb));

    // rho_C: contract the bigon, undo the A->C split via the A->B split
    Family fc;
    fc.domain = corner_vertices(*CH, pc, pc.maskC);
    for (auto v : fc.domain) {
        std::uint32_t vA = v & ~pc.maskC;
        std::uint32_t vB = vA | pc.maskB;
        std::uint32_t tv = compact(v);
        fc.vmap[v] = tv;
        int ucirc = bigon_circle(*CH, v, pc);
        auto inv = c_to_a_circles(*CH, v, pc);
        const auto& bm = b_match.at(vB);
        int cnt = 1 << CH->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            // contract u, land in A coordinates
            ImgMap at_a = contract_relabel(Mono(m), ucirc, inv);
            ImgMap out;
            for (auto& [am, ac] : at_a) {
                // A->B edge raw (split), then relabel B -> E
                for (auto& [bm2, bc] : CH->edge_image_raw(vA, pc.xAB, am)) {
                    auto p = push_monomial(bm2, bm);
                    if (p) out[p->first] += ac * bc * p->second;
                }
            }
            clean(out);
            raws[m] = std::move(out);
        }
        fc.raw[v] = std::move(raws);
    }
    int fam_c = mb.add_family(std::move(fc));

    for (auto v : mb.fams[fam_b].domain)
        for (int i = 0; i < CH->n; ++i) {
            if (i == pc.c1 || i == pc.c2 || ((v >> i) & 1)) continue;
            mb.edge_flow(fam_b, v, i, drop_two_index(i, pc.c1, pc.c2));
        }
    for (auto v : mb.fams[fam_c].domain)
        for (int i = 0; i < CH->n; ++i) {
            if (i == pc.c1 || i == pc.c2 || ((v >> i) & 1)) continue;
            mb.edge_flow(fam_c, v, i, drop_two_index(i, pc.c1, pc.c2));
        }
    // A-corner: the two exits must cancel after the retraction
    for (auto vA : corner_vertices(*CH, pc, 0)) {
        // source-edge composites: rho_B . alpha and rho_C . beta
        auto M1 = mb.then_edge(mb.fams[fam_b], vA, pc.xAB);
        auto M2 = mb.then_edge(mb.fams[fam_c], vA, pc.yAC);
        Rel r = compare(M1, M2);
        if (r == Rel::BothZero) continue;
        if (r == Rel::Mismatch) fail("rii remove: A-corner cancellation mismatch");
        int bit = (r == Rel::Eq) ? 1 : 0;
        mb.rels.push_back({mb.var(fam_b, vA | pc.maskB), mb.var(fam_c, vA | pc.maskC), bit, false});
    }
    return mb.solve(kAutoDeg, kAutoDeg);
}

} // namespace

ChainMap r2_add_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw) {
    PairCorners pc = find_corners(*tgt, rw.new_crossing_a, rw.new_crossing_b);
    return rii_add_core(src, tgt, rel_of(rw), pc);
}

ChainMap r2_remove_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int c1, int c2) {
    PairCorners pc = find_corners(*src, c1, c2);
    return rii_remove_core(src, tgt, rel_of(rw), pc);
}

// ---------------------------------------------------------------------------
// Reidemeister II homotopy and the Reidemeister III cone assembly

namespace {

// normalize R so that R . F is the identity on the nose; R F is +-identity
// vertexwise and the correction is itself a chain map
ChainMap normalize_retraction(const ChainMap& R, const ChainMap& F) {
    ComplexPtr CB = F.src;
    std::vector<int> eps(std::uint64_t(1) << CB->n, 0);
    for (std::uint64_t g = 0; g < CB->total; ++g) {
        std::map<std::uint64_t, Int> acc;
        for (auto& [t, c] : F.apply_gen(g))
            for (auto& [u, c2] : R.apply_gen(t)) acc[u] += c * c2;
        for (auto it = acc.begin(); it != acc.end();)
            it = (it->second == 0) ? acc.erase(it) : std::next(it);
        if (acc.size() != 1 || acc.begin()->first != g || (acc.begin()->second != 1 && acc.begin()->second != -1))
            fail("rii: retraction times section is not plus-minus identity");
        std::uint32_t v = CB->vertex_of(g);
        int e = acc.begin()->second == 1 ? 0 : 1;
        if (eps[v] == 0) eps[v] = e ? -1 : 1;
        else if (eps[v] != (e ? -1 : 1))
            fail("rii: retraction sign varies within a vertex");
    }
    ChainMap out = R;
    auto inner = R.apply_gen;
    ComplexPtr CH = R.src;
    auto eps_shared = std::make_shared<std::vector<int>>(std::move(eps));
    ComplexPtr CBp = CB;
    out.apply_gen = [inner, eps_shared, CBp](std::uint64_t g) {
        GenImage img = inner(g);
        for (auto& [t, c] : img) {
            int e = (*eps_shared)[CBp->vertex_of(t)];
            if (e < 0) c = -c;
        }
        return img;
    };
    (void)CH;
    out.verify();
    return out;
}

// homotopy h on CH with d h + h d = Id - F R (degree -1); not a chain map,
// returned unverified with the identity checked against P directly
ChainMap rii_homotopy(ComplexPtr CH, const PairCorners& pc, const ChainMap& F, const ChainMap& R) {
    MoveBuilder mb{CH, CH};

    // h_CA: circle corner -> source corner, contraction against the bigon
    Family fa;
    fa.domain = corner_vertices(*CH, pc, pc.maskC);
    for (auto v : fa.domain) {
        std::uint32_t vA = v & ~pc.maskC;
        fa.vmap[v] = vA;
        int ucirc = bigon_circle(*CH, v, pc);
        auto inv = c_to_a_circles(*CH, v, pc);
        int cnt = 1 << CH->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) raws[m] = contract_relabel(Mono(m), ucirc, inv);
        fa.raw[v] = std::move(raws);
    }
    int fam_a = mb.add_family(std::move(fa));

    // h_DC: sink corner -> circle corner, section of the merge
    Family fd;
    fd.domain = corner_vertices(*CH, pc, pc.maskB | pc.maskC);
    for (auto v : fd.domain) {
        std::uint32_t vC = v & ~pc.maskB;
        fd.vmap[v] = vC;
        auto s = d_to_c_circles(*CH, vC, pc);
        int cnt = 1 << CH->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s);
            if (!p) fail("rii homotopy: section collision");
            raws[m][p->first] = p->second;
        }
        fd.raw[v] = std::move(raws);
    }
    int fam_d = mb.add_family(std::move(fd));

    // P = Id - F R as vertex blocks where needed
    auto fr_block = [&](std::uint64_t g) {
        std::map<std::uint64_t, Int> acc;
        for (auto& [t, c] : R.apply_gen(g))
            for (auto& [u, c2] : F.apply_gen(t)) acc[u] += c * c2;
        return acc;
    };

    // pins from the diagonal identities
    // (A,A): h_CA . beta = Id_A
    for (auto vA : corner_vertices(*CH, pc, 0)) {
        auto M = mb.then_edge(mb.fams[fam_a], vA, pc.yAC);
        bool is_id = true, is_neg = true;
        for (int m = 0; m < (1 << CH->slots[vA]); ++m) {
            ImgMap want{{Mono(m), Int(1)}};
            auto r = compare({M[m]}, {want});
            if (r != Rel::Eq) is_id = false;
            if (r != Rel::Neg) is_neg = false;
        }
        if (is_id) mb.pins.push_back({mb.var(fam_a, vA | pc.maskC), 0});
        else if (is_neg) mb.pins.push_back({mb.var(fam_a, vA | pc.maskC), 1});
        else fail("rii homotopy: (A,A) identity fails");
    }
    // (D,D): delta . h_DC = Id_D
    for (auto vD : corner_vertices(*CH, pc, pc.maskB | pc.maskC)) {
        auto M = mb.edge_then(mb.fams[fam_d], vD, pc.xAB);
        bool is_id = true, is_neg = true;
        for (int m = 0; m < (1 << CH->slots[vD]); ++m) {
            ImgMap want{{Mono(m), Int(1)}};
            auto r = compare({M[m]}, {want});
            if (r != Rel::Eq) is_id = false;
            if (r != Rel::Neg) is_neg = false;
        }
        if (is_id) mb.pins.push_back({mb.var(fam_d, vD), 0});
        else if (is_neg) mb.pins.push_back({mb.var(fam_d, vD), 1});
        else fail("rii homotopy: (D,D) identity fails");
    }
    // (C,B): alpha . h_CA = -(F R)_{C->B}
    for (auto vC : mb.fams[fam_a].domain) {
        std::uint32_t vB = (vC & ~pc.maskC) | pc.maskB;
        auto M = mb.edge_then(mb.fams[fam_a], vC, pc.xAB);
        std::vector<ImgMap> rhs(1 << CH->slots[vC]);
        for (int m = 0; m < (1 << CH->slots[vC]); ++m) {
            for (auto& [t, c] : fr_block(CH->gen_index(vC, Mono(m))))
                if (CH->vertex_of(t) == vB) rhs[m][CH->mask_of(t, vB)] -= c;
            clean(rhs[m]);
        }
        Rel r = compare(M, rhs);
        if (r == Rel::BothZero) continue;
        if (r == Rel::Mismatch) fail("rii homotopy: (C,B) identity fails");
        mb.pins.push_back({mb.var(fam_a, vC), r == Rel::Eq ? 0 : 1});
    }
    // (B,C): h_DC . gamma = -(F R)_{B->C}
    for (auto vB : corner_vertices(*CH, pc, pc.maskB)) {
        std::uint32_t vC = (vB & ~pc.maskB) | pc.maskC;
        std::uint32_t vD = vB | pc.maskC;
        auto M = mb.then_edge(mb.fams[fam_d], vB, pc.yAC);
        std::vector<ImgMap> rhs(1 << CH->slots[vB]);
        for (int m = 0; m < (1 << CH->slots[vB]); ++m) {
            for (auto& [t, c] : fr_block(CH->gen_index(vB, Mono(m))))
                if (CH->vertex_of(t) == vC) rhs[m][CH->mask_of(t, vC)] -= c;
            clean(rhs[m]);
        }
        Rel r = compare(M, rhs);
        if (r == Rel::BothZero) continue;
        if (r == Rel::Mismatch) fail("rii homotopy: (B,C) identity fails");
        mb.pins.push_back({mb.var(fam_d, vD), r == Rel::Eq ? 0 : 1});
    }
    // (C,C): beta . h_CA + h_DC . delta = Id - (F R)_{C->C}
    for (auto vC : mb.fams[fam_a].domain) {
        auto M1 = mb.edge_then(mb.fams[fam_a], vC, pc.yAC);
        auto M2 = mb.then_edge(mb.fams[fam_d], vC, pc.xAB);
        int cnt = 1 << CH->slots[vC];
        std::vector<ImgMap> rhs(cnt);
        for (int m = 0; m < cnt; ++m) {
            rhs[m][Mono(m)] = 1;
            for (auto& [t, c] : fr_block(CH->gen_index(vC, Mono(m))))
                if (CH->vertex_of(t) == vC) rhs[m][CH->mask_of(t, vC)] -= c;
            clean(rhs[m]);
        }
        bool done = false;
        for (int e1 = 0; e1 < 2 && !done; ++e1)
            for (int e2 = 0; e2 < 2 && !done; ++e2) {
                bool match = true;
                for (int m = 0; m < cnt && match; ++m) {
                    ImgMap sum;
                    for (auto& [k, c] : M1[m]) sum[k] += (e1 ? -c : c);
                    for (auto& [k, c] : M2[m]) sum[k] += (e2 ? -c : c);
                    clean(sum);
                    if (!(sum == rhs[m])) match = false;
                }
                if (match) {
                    mb.pins.push_back({mb.var(fam_a, vC), e1});
                    mb.pins.push_back({mb.var(fam_d, vC | pc.maskB), e2});
                    done = true;
                }
            }
        if (!done) fail("rii homotopy: (C,C) identity fails");
    }
    // internal anticommutation within each family
    for (auto v : mb.fams[fam_a].domain)
        for (int i = 0; i < CH->n; ++i) {
            if (i == pc.c1 || i == pc.c2 || ((v >> i) & 1)) continue;
            auto M1 = mb.edge_then(mb.fams[fam_a], v, i);
            auto M2 = mb.then_edge(mb.fams[fam_a], v, i);
            Rel r = compare(M2, M1);
            if (r == Rel::BothZero) continue;
            if (r == Rel::Mismatch) fail("rii homotopy: internal flow mismatch");
            mb.rels.push_back({mb.var(fam_a, v | (1u << i)), mb.var(fam_a, v), r == Rel::Eq ? 1 : 0, false});
        }
    for (auto v : mb.fams[fam_d].domain)
        for (int i = 0; i < CH->n; ++i) {
            if (i == pc.c1 || i == pc.c2 || ((v >> i) & 1)) continue;
            auto M1 = mb.edge_then(mb.fams[fam_d], v, i);
            auto M2 = mb.then_edge(mb.fams[fam_d], v, i);
            Rel r = compare(M2, M1);
            if (r == Rel::BothZero) continue;
            if (r == Rel::Mismatch) fail("rii homotopy: internal flow mismatch");
            mb.rels.push_back({mb.var(fam_d, v | (1u << i)), mb.var(fam_d, v), r == Rel::Eq ? 1 : 0, false});
        }

    ChainMap h = mb.solve(kAutoDeg, kAutoDeg, /*check=*/false);
    h.chain_sign = 1;

    // exact verification of d h + h d = Id - F R
    for (std::uint64_t g = 0; g < CH->total; ++g) {
        std::map<std::uint64_t, Int> acc;
        for (auto& [t, c] : CH->diff(g))
            for (auto& [u, c2] : h.apply_gen(t)) acc[u] += c * c2;
        for (auto& [t, c] : h.apply_gen(g))
            for (auto& [u, c2] : CH->diff(t)) acc[u] += c * c2;
        acc[g] -= 1;
        for (auto& [t, c] : fr_block(g)) acc[t] += c;
        for (auto& [t, c] : acc)
            if (c != 0) fail("rii homotopy: identity d h + h d = Id - F R fails");
    }
    return h;
}

// solved identification between the rho-subcube of `full` and the standalone
// complex `part` of the fixed diagram; returned as index translations
struct SubIso {
    ComplexPtr full, part;
    int crossing, rho;
    std::vector<std::pair<std::uint64_t, Int>> down; // full gen (subcube) -> part gen with sign; size full->total
    std::vector<std::pair<std::uint64_t, Int>> up;   // part gen -> full gen with sign
};

SubIso subcube_iso(ComplexPtr full, ComplexPtr part, const Rewrite& fix, int crossing, int rho) {
    MoveBuilder mb{full, part};
    auto compact = [&](std::uint32_t v) {
        std::uint32_t low = v & ((1u << crossing) - 1);
        std::uint32_t high = (v >> (crossing + 1)) << crossing;
        return low | high;
    };
    Family f;
    std::uint32_t bit = rho ? (1u << crossing) : 0;
    for (std::uint32_t v = 0; v < (1u << full->n); ++v)
        if ((v & (1u << crossing)) == bit) f.domain.push_back(v);
    ArcRel t2s = rel_of(fix);
    for (auto v : f.domain) {
        std::uint32_t tv = compact(v);
        f.vmap[v] = tv;
        auto s2t = match_bijective(full->res[v], part->res[tv], t2s);
        int cnt = 1 << full->slots[v];
        std::vector<ImgMap> raws(cnt);
        for (int m = 0; m < cnt; ++m) {
            auto p = push_monomial(Mono(m), s2t);
            if (!p) fail("subcube iso: collision");
            raws[m][p->first] = p->second;
        }
        f.raw[v] = std::move(raws);
    }
    int fi = mb.add_family(std::move(f));
    for (auto v : mb.fams[fi].domain)
        for (int i = 0; i < full->n; ++i) {
            if (i == crossing || ((v >> i) & 1)) continue;
            mb.edge_flow(fi, v, i, i > crossing ? i - 1 : i);
        }
    ChainMap down = mb.solve(kAutoDeg, kAutoDeg, /*check=*/false);

    SubIso iso;
    iso.full = full;
    iso.part = part;
    iso.crossing = crossing;
    iso.rho = rho;
    iso.down.assign(full->total, {0, Int(0)});
    iso.up.assign(part->total, {0, Int(0)});
    for (auto v : mb.fams[fi].domain) {
        std::uint64_t off = full->offset[v];
        for (int m = 0; m < (1 << full->slots[v]); ++m) {
            GenImage img = down.apply_gen(off + m);
            if (img.size() != 1) fail("subcube iso: non-bijective");
            iso.down[off + m] = {img[0].gen, img[0].coeff};
            iso.up[img[0].gen] = {off + m, img[0].coeff}; // signs are +-1, self-inverse
        }
    }
    return iso;
}

} // namespace

ChainMap r3_map(ComplexPtr src, ComplexPtr tgt, int central, int c1, int c2) {
    const Diagram& D = src->diag;
    const Diagram& Dp = tgt->diag;
    if (src->n != tgt->n) fail("r3: crossing counts differ");

    // which resolution of the central crossing carries the removable pair
    auto pair_side = [&](const Diagram& d) -> std::pair<int, Rewrite> {
        int lo1 = c1 > central ? c1 - 1 : c1;
        int lo2 = c2 > central ? c2 - 1 : c2;
        for (int rho = 0; rho < 2; ++rho) {
            try {
                Rewrite fx = fix_crossing(d, central, rho, /*lenient=*/true);
                if (r2_bigon(fx.diagram, lo1, lo2, nullptr, nullptr)) return {rho, fx};
            } catch (const std::exception&) {
                continue;
            }
        }
        fail("r3: no resolution of the central crossing yields a removable pair");
    };
    auto [rhoH, fixH] = pair_side(D);
    auto [rhoHp, fixHp] = pair_side(Dp);
    if (rhoH != rhoHp) fail("r3: pair resolutions disagree between the frames");
    int rhoV = 1 - rhoH;
    Rewrite fixV = fix_crossing(D, central, rhoV, /*lenient=*/true);
    Rewrite fixVp = fix_crossing(Dp, central, rhoV, /*lenient=*/true);

    ComplexPtr CHs = build_complex(fixH.diagram);
    ComplexPtr CHp = build_complex(fixHp.diagram);

    int lo1 = c1 > central ? c1 - 1 : c1;
    int lo2 = c2 > central ? c2 - 1 : c2;
    Rewrite remH = r2_remove(fixH.diagram, lo1, lo2, /*lenient=*/true);
    Rewrite remHp = r2_remove(fixHp.diagram, lo1, lo2, /*lenient=*/true);
    ComplexPtr CBs = build_complex(remH.diagram);
    ComplexPtr CBp = build_complex(remHp.diagram);

    PairCorners pcH = find_corners(*CHs, lo1, lo2);
    PairCorners pcHp = find_corners(*CHp, lo1, lo2);

    ChainMap omega = rii_remove_core(CHs, CBs, rel_of(remH), pcH);    // CH -> CB
    ChainMap omegap = rii_remove_core(CHp, CBp, rel_of(remHp), pcHp); // CH' -> CB'
    ChainMap Fp = rii_add_core(CBp, CHp, invert_rel(rel_of(remHp)), pcHp); // CB' -> CH'
    ChainMap Fs = rii_add_core(CBs, CHs, invert_rel(rel_of(remH)), pcH);   // CB -> CH
    ChainMap Rp = normalize_retraction(omegap, Fp);
    ChainMap Rs = normalize_retraction(omega, Fs);

    // psi: CB -> CB' through an explicit crossingwise arc bijection (the two
    // diagrams are the same picture with relabeled arcs)
    ChainMap psi = [&] {
        auto sigma = diagram_bijection(CBs->diag, CBp->diag);
        if (!sigma) fail("r3: pair-free diagrams are not isomorphic");
        ArcRel relB;
        for (auto& [x, y] : *sigma) relB[y] = {x};
        MoveBuilder mb{CBs, CBp};
        Family f = bijective_family(*CBs, *CBp, relB, [](std::uint32_t v) { return v; }, all_vertices(*CBs));
        int fi = mb.add_family(std::move(f));
        for (auto v : all_vertices(*CBs))
            for (int i = 0; i < CBs->n; ++i)
                if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
        return mb.solve(kAutoDeg, kAutoDeg, /*check=*/false);
    }();

    // homotopy on the appropriate side
    ChainMap hH = rhoH == 1 ? rii_homotopy(CHp, pcHp, Fp, Rp) : rii_homotopy(CHs, pcH, Fs, Rs);

    // subcube identifications
    SubIso chiH = subcube_iso(src, CHs, fixH, central, rhoH);
    SubIso chiHp = subcube_iso(tgt, CHp, fixHp, central, rhoH);
    SubIso chiV = subcube_iso(src, build_complex(fixV.diagram), fixV, central, rhoV);
    SubIso chiVp = subcube_iso(tgt, build_complex(fixVp.diagram), fixVp, central, rhoV);

    // V-identification: CV -> CV' through an explicit crossingwise arc
    // bijection realizing the slide isotopy on the resolved diagrams
    ChainMap phiV_part = [&] {
        auto sigma = diagram_bijection(chiV.part->diag, chiVp.part->diag);
        if (!sigma) fail("r3: resolved central-crossing diagrams are not isomorphic");
        ArcRel relV;
        for (auto& [x, y] : *sigma) relV[y] = {x};
        MoveBuilder mb{chiV.part, chiVp.part};
        Family f =
            bijective_family(*chiV.part, *chiVp.part, relV, [](std::uint32_t v) { return v; }, all_vertices(*chiV.part));
        int fi = mb.add_family(std::move(f));
        for (auto v : all_vertices(*chiV.part))
            for (int i = 0; i < chiV.part->n; ++i)
                if (!((v >> i) & 1)) mb.edge_flow(fi, v, i, i);
        return mb.solve(kAutoDeg, kAutoDeg, /*check=*/false);
    }();

    // Lemma-8 check: omega . chi_H . e  =  +- psi^{-1}-free form:
    //   M_L := psi(omega(chi_H(e(x)))) vs M_R := omega'(chi_H'(e'(phiV(x))))
    // for x in the V-part of C(D); both land in CB'.
    auto apply_chain = [&](const ChainMap& f, const Vec& x) { return f.apply(x); };
    // the central-crossing component of the differential: edges run from the
    // 0-side to the 1-side of the central coordinate
    auto central_edge = [&](ComplexPtr C, const Vec& x) {
        Vec out;
        for (auto& [g, c] : x) {
            std::uint32_t v = C->vertex_of(g);
            if ((v >> central) & 1) continue;
            std::uint32_t w = v | (1u << central);
            int es = C->edge_sign(v, central);
            for (auto& [tm, cc] : C->edge_image_raw(v, central, C->mask_of(g, v)))
                out[C->gen_index(w, tm)] += c * cc * es;
        }
        for (auto it = out.begin(); it != out.end();)
            it = (it->second == 0) ? out.erase(it) : std::next(it);
        return out;
    };

    auto down_vec = [&](const SubIso& iso, const Vec& x) {
        Vec out;
        for (auto& [g, c] : x) {
            auto [pg, s] = iso.down[g];
            if (s == 0) fail("r3: vector leaves the subcube");
            out[pg] += c * s;
        }
        return out;
    };
    auto up_vec = [&](const SubIso& iso, const Vec& x) {
        Vec out;
        for (auto& [g, c] : x) {
            auto [fg, s] = iso.up[g];
            if (s == 0) fail("r3: vector not in the subcube image");
            out[fg] += c * s;
        }
        return out;
    };

    // cone comparison (the Lemma 8 self-check): the two composites through
    // the pair-free complex agree up to one global sign
    {
        bool all_eq = true, all_neg = true;
        if (rhoH == 1) {
            // V emits: compare psi R chi_H e  with  R' chi_H' e' phi_V on V-part
            for (std::uint64_t pg = 0; pg < chiV.part->total; ++pg) {
                Vec x = up_vec(chiV, Vec{{pg, Int(1)}});
                Vec ml = apply_chain(psi, apply_chain(Rs, down_vec(chiH, central_edge(src, x))));
                Vec xv = up_vec(chiVp, apply_chain(phiV_part, Vec{{pg, Int(1)}}));
                Vec mr = apply_chain(Rp, down_vec(chiHp, central_edge(tgt, xv)));
                if (!(ml == mr)) all_eq = false;
                Vec neg = mr;
                for (auto& [k, c] : neg) c = -c;
                if (!(ml == neg)) all_neg = false;
            }
        } else {
            // H emits: compare phi_V e F  with  e' F' psi on CB
            for (std::uint64_t bg = 0; bg < CBs->total; ++bg) {
                Vec hx = up_vec(chiH, apply_chain(Fs, Vec{{bg, Int(1)}}));
                Vec mlv = central_edge(src, hx);
                Vec ml;
                for (auto& [gg, c] : mlv) {
                    auto [pg2, s2] = chiV.down[gg];
                    if (s2 == 0) fail("r3: central edge left the V-part");
                    Vec t = up_vec(chiVp, apply_chain(phiV_part, Vec{{pg2, s2}}));
                    for (auto& [u, c2] : t) ml[u] += c * c2;
                }
                for (auto it = ml.begin(); it != ml.end();)
                    it = (it->second == 0) ? ml.erase(it) : std::next(it);
                Vec hpx = up_vec(chiHp, apply_chain(Fp, apply_chain(psi, Vec{{bg, Int(1)}})));
                Vec mr = central_edge(tgt, hpx);
                if (!(ml == mr)) all_eq = false;
                Vec neg = mr;
                for (auto& [k, c] : neg) c = -c;
                if (!(ml == neg)) all_neg = false;
            }
        }
        if (!all_eq && !all_neg) fail("r3: cone comparison (Lemma 8) fails; not a valid slide");
    }

    // assemble: Phi_V on the V-part, Phi_H = up' . F' . psi . R . down on the
    // H-part, diagonal Ebar . d' after Phi_V (rhoH = 1) or Phi_V . d . Ebar
    // (rhoH = 0); blocks are baked into explicit columns, then global signs
    // are searched with exact verification picking the winner
    auto phiV_gen = [&](std::uint64_t g) -> Vec {
        auto [pg, s] = chiV.down[g];
        if (s == 0) return {};
        Vec y = apply_chain(phiV_part, Vec{{pg, s}});
        return up_vec(chiVp, y);
    };
    auto phiH_gen = [&](std::uint64_t g) -> Vec {
        auto [pg, s] = chiH.down[g];
        if (s == 0) return {};
        Vec y = apply_chain(Fp, apply_chain(psi, apply_chain(Rs, Vec{{pg, s}})));
        return up_vec(chiHp, y);
    };
    auto diag_gen = [&](std::uint64_t g) -> Vec {
        if (rhoH == 1) {
            // V-part -> H'-part: Ebar' . e' . Phi_V
            Vec y = central_edge(tgt, phiV_gen(g));
            if (y.empty()) return {};
            Vec z = apply_chain(hH, down_vec(chiHp, y));
            return up_vec(chiHp, z);
        }
        // rhoH == 0: H-part -> V'-part: Phi_V . e . Ebar
        auto [pg, s] = chiH.down[g];
        if (s == 0) return {};
        Vec z = apply_chain(hH, Vec{{pg, s}});
        Vec w = central_edge(src, up_vec(chiH, z));
        Vec out;
        for (auto& [gg, c] : w) {
            for (auto& [u, c2] : phiV_gen(gg)) out[u] += c * c2;
        }
        return out;
    };

    struct BakedCols {
        std::vector<GenImage> v, h, k;
    };
    auto baked = std::make_shared<BakedCols>();
    baked->v.resize(src->total);
    baked->h.resize(src->total);
    baked->k.resize(src->total);
    auto to_img = [](const Vec& x) {
        GenImage img;
        for (auto& [t, c] : x)
            if (c != 0) img.push_back({t, c});
        return img;
    };
    for (std::uint64_t g = 0; g < src->total; ++g) {
        baked->v[g] = to_img(phiV_gen(g));
        baked->h[g] = to_img(phiH_gen(g));
        baked->k[g] = to_img(diag_gen(g));
    }

    for (int sH = 1; sH >= -1; sH -= 2)
        for (int sK = 1; sK >= -1; sK -= 2)
            for (int cs = 1; cs >= -1; cs -= 2) {
                ChainMap cand;
                cand.src = src;
                cand.tgt = tgt;
                cand.dh = 0;
                cand.dq = 0;
                cand.chain_sign = cs;
                cand.apply_gen = [baked, sH, sK](std::uint64_t g) {
                    Vec acc;
                    for (auto& [t, c] : baked->v[g]) acc[t] += c;
                    for (auto& [t, c] : baked->h[g]) acc[t] += sH * c;
                    for (auto& [t, c] : baked->k[g]) acc[t] += sK * c;
                    GenImage img;
                    for (auto& [t, c] : acc)
                        if (c != 0) img.push_back({t, c});
                    return img;
                };
                try {
                    cand.verify();
                    return cand;
                } catch (const std::exception&) {
                    continue;
                }
            }
    fail("r3: no sign combination assembles a chain map (self-check failure)");
}

} // namespace oddkh
