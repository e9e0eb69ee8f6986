#include "oddkh/diagram.hpp"

#include "oddkh/intmatrix.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

struct ArcUse {
    int crossing = -1, slot = -1; // crossing use
    bool loop = false;            // free-loop marker
};

// all uses of each arc id (must be exactly two, or one loop marker)
std::map<int, std::vector<ArcUse>> arc_uses(const Diagram& d) {
    std::map<int, std::vector<ArcUse>> uses;
    for (int c = 0; c < d.n_crossings(); ++c)
        for (int s = 0; s < 4; ++s) uses[d.crossings[c].slots[s]].push_back({c, s, false});
    for (int a : d.free_loops) uses[a].push_back({-1, -1, true});
    return uses;
}

struct UF {
    std::vector<int> p;
    explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void join(int a, int b) { p[find(a)] = find(b); }
};

} // namespace

std::vector<int> Diagram::arc_ids() const {
    std::set<int> s(free_loops.begin(), free_loops.end());
    for (auto& c : crossings)
        for (int k = 0; k < 4; ++k) s.insert(c.slots[k]);
    return std::vector<int>(s.begin(), s.end());
}

int Diagram::max_arc_id() const {
    int m = 0;
    for (int a : arc_ids()) m = std::max(m, a);
    return m;
}

int Diagram::n_plus() const {
    int n = 0;
    for (auto& c : crossings) n += c.sign > 0;
    return n;
}
int Diagram::n_minus() const {
    int n = 0;
    for (auto& c : crossings) n += c.sign < 0;
    return n;
}

bool Diagram::operator==(const Diagram& o) const {
    if (free_loops.size() != o.free_loops.size() || crossings.size() != o.crossings.size()) return false;
    std::vector<int> fa = free_loops, fb = o.free_loops;
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return false;
    // crossings as unordered multiset of (slots, sign, arrow)
    auto key = [](const Crossing& c) {
        return std::array<int, 6>{c.slots[0], c.slots[1], c.slots[2], c.slots[3], c.sign, c.arrow};
    };
    std::vector<std::array<int, 6>> ka, kb;
    for (auto& c : crossings) ka.push_back(key(c));
    for (auto& c : o.crossings) kb.push_back(key(c));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

void Diagram::finalize(bool lenient) {
    oriented = true;
    auto failo = [&](const std::string& m) {
        if (lenient) oriented = false;
        else fail(m);
    };
    auto uses = arc_uses(*this);
    for (auto& [a, u] : uses) {
        if (u.size() == 1 && u[0].loop) continue;
        if (u.size() != 2 || u[0].loop || u[1].loop)
            fail("arc " + std::to_string(a) + " used " + std::to_string(u.size()) +
                 " time(s); every arc must appear exactly twice");
    }

    // Orientation inference. One parity variable per crossing: x_c = 1 iff
    // the over-strand enters at slots[3] (positive crossing). Roles:
    // incoming(slot0)=1, incoming(slot2)=0, incoming(slot1)=1+x, incoming(slot3)=x.
    int n = n_crossings();
    ParitySolver ps(n);
    auto role = [](int slot) -> std::pair<int, int> { // (const, coeff of x)
        switch (slot) {
            case 0: return {1, 0};
            case 1: return {1, 1};
            case 2: return {0, 0};
            default: return {0, 1};
        }
    };
    for (auto& [a, u] : uses) {
        if (u[0].loop) continue;
        auto [k1, m1] = role(u[0].slot);
        auto [k2, m2] = role(u[1].slot);
        // incoming1 + incoming2 = 1  (one head, one tail)
        int cst = (k1 + k2 + 1) & 1;
        int ca = u[0].crossing, cb = u[1].crossing;
        if (ca == cb) {
            int coeff = (m1 + m2) & 1;
            if (coeff == 0) {
                if (cst != 0) failo("arc " + std::to_string(a) + ": inconsistent orientation at crossing " +
                                    std::to_string(ca + 1));
            } else if (!ps.set(ca, cst))
                failo("arc " + std::to_string(a) + ": inconsistent orientation at crossing " + std::to_string(ca + 1));
        } else if (m1 == 0 && m2 == 0) {
            if (cst != 0) failo("arc " + std::to_string(a) + ": both ends incoming/outgoing under-strands");
        } else if (m1 == 1 && m2 == 1) {
            if (!ps.relate(ca, cb, cst))
                failo("arc " + std::to_string(a) + ": inconsistent orientation between crossings " +
                      std::to_string(ca + 1) + " and " + std::to_string(cb + 1));
        } else {
            int c_over = m1 ? ca : cb;
            if (!ps.set(c_over, cst))
                failo("arc " + std::to_string(a) + ": inconsistent orientation at crossing " +
                      std::to_string(c_over + 1));
        }
    }

    incoming.assign(n, {true, false, false, false});
    for (int c = 0; c < n; ++c) {
        int x = ps.value(c);
        crossings[c].sign = x ? 1 : -1;
        incoming[c][0] = true;
        incoming[c][2] = false;
        incoming[c][1] = (x == 0);
        incoming[c][3] = (x == 1);
    }

    // planar consistency: chi = 2 on every connected component with crossings
    if (n > 0) {
        FaceData f = faces(*this);
        UF comp(n);
        auto us = arc_uses(*this);
        for (auto& [a, u] : us)
            if (!u[0].loop && u.size() == 2 && u[0].crossing != u[1].crossing)
                comp.join(u[0].crossing, u[1].crossing);
        std::map<int, int> vcount, ecount, fcount;
        for (int c = 0; c < n; ++c) vcount[comp.find(c)]++;
        for (auto& [a, u] : us)
            if (!u[0].loop) ecount[comp.find(u[0].crossing)]++;
        std::vector<int> seen(f.n_faces, 0);
        for (int dptr = 0; dptr < 4 * n; ++dptr) {
            int fc = f.face_of_dart[dptr];
            if (!seen[fc]) {
                seen[fc] = 1;
                fcount[comp.find(dptr / 4)]++;
            }
        }
        for (auto& [root, v] : vcount) {
            int chi = v - ecount[root] + fcount[root];
            if (chi != 2)
                fail("non-planar-consistent slot data near crossing " + std::to_string(root + 1) +
                     " (Euler characteristic " + std::to_string(chi) + ")");
        }
    }
}

Diagram parse_pd(const std::string& text) {
    // strip comments, tokenize on whitespace and around X(...)
    std::string clean;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto h = line.find('#');
        clean += line.substr(0, h);
        clean += '\n';
    }

    Diagram d;
    size_t i = 0;
    auto skip_ws = [&] { while (i < clean.size() && std::isspace((unsigned char)clean[i])) ++i; };
    auto expect = [&](char c) {
        skip_ws();
        if (i >= clean.size() || clean[i] != c)
            fail(std::string("malformed token: expected '") + c + "' in PD input");
        ++i;
    };
    auto read_int = [&]() -> int {
        skip_ws();
        size_t j = i;
        if (j < clean.size() && (clean[j] == '-' || clean[j] == '+')) ++j;
        while (j < clean.size() && std::isdigit((unsigned char)clean[j])) ++j;
        if (j == i) fail("malformed token: expected integer in PD input");
        int v = std::stoi(clean.substr(i, j - i));
        i = j;
        return v;
    };

    int next_free_arc_base = -1;
    std::vector<std::pair<int, int>> arrow_overrides;
    int declared_circles = 0;
    while (true) {
        skip_ws();
        if (i >= clean.size()) break;
        if (clean.compare(i, 8, "circles=") == 0) {
            i += 8;
            declared_circles = read_int();
            if (declared_circles < 0) fail("malformed token: circles= must be nonnegative");
        } else if (clean[i] == 'X') {
            ++i;
            expect('(');
            Crossing c;
            c.slots[0] = read_int();
            for (int k = 1; k < 4; ++k) {
                expect(',');
                c.slots[k] = read_int();
            }
            expect(')');
            d.crossings.push_back(c);
        } else if (clean.compare(i, 5, "arrow") == 0) {
            i += 5;
            skip_ws();
            if (i < clean.size() && clean[i] == 'c') ++i;
            int idx = read_int();
            expect('=');
            skip_ws();
            if (i >= clean.size() || (clean[i] != '+' && clean[i] != '-'))
                fail("malformed token: arrow override needs + or -");
            arrow_overrides.push_back({idx, clean[i] == '+' ? 1 : -1});
            ++i;
        } else {
            fail("malformed token at '" + clean.substr(i, 12) + "'");
        }
    }

    next_free_arc_base = d.max_arc_id();
    for (int k = 0; k < declared_circles; ++k) d.free_loops.push_back(next_free_arc_base + 1 + k);

    for (auto [idx, s] : arrow_overrides) {
        if (idx < 1 || idx > d.n_crossings()) fail("arrow override: no crossing " + std::to_string(idx));
        d.crossings[idx - 1].arrow = s;
    }

    d.finalize();
    return d;
}

std::string to_pd(const Diagram& d) {
    std::ostringstream os;
    if (!d.free_loops.empty()) os << "circles=" << d.free_loops.size() << " ";
    for (auto& c : d.crossings)
        os << "X(" << c.slots[0] << "," << c.slots[1] << "," << c.slots[2] << "," << c.slots[3] << ") ";
    for (int i = 0; i < d.n_crossings(); ++i)
        if (d.crossings[i].arrow < 0) os << "arrow c" << (i + 1) << "=- ";
    return os.str();
}

Resolution resolve(const Diagram& d, uint32_t state) {
    int n = d.n_crossings();
    if (n > 31) fail("resolve: too many crossings");
    if (n < 31 && (state >> n) != 0) fail("resolve: state vector length mismatch");
    std::vector<int> arcs = d.arc_ids();
    std::map<int, int> aidx;
    for (size_t k = 0; k < arcs.size(); ++k) aidx[arcs[k]] = int(k);

    UF uf(int(arcs.size()));
    for (int c = 0; c < n; ++c) {
        int pr[2][2];
        smoothing_pairs(d.crossings[c], (state >> c) & 1, pr);
        uf.join(aidx[pr[0][0]], aidx[pr[0][1]]);
        uf.join(aidx[pr[1][0]], aidx[pr[1][1]]);
    }

    std::map<int, std::vector<int>> classes; // root -> arcs
    for (size_t k = 0; k < arcs.size(); ++k) classes[uf.find(int(k))].push_back(arcs[k]);

    Resolution r;
    std::vector<std::pair<int, std::vector<int>>> ordered;
    for (auto& [root, as] : classes) {
        std::vector<int> sorted_arcs = as;
        std::sort(sorted_arcs.begin(), sorted_arcs.end());
        ordered.push_back({sorted_arcs[0], sorted_arcs});
    }
    std::sort(ordered.begin(), ordered.end());
    for (auto& [mn, as] : ordered) {
        int ci = int(r.circles.size());
        for (int a : as) r.circle_of_arc[a] = ci;
        r.circles.push_back(as);
    }
    for (int c = 0; c < n; ++c) {
        int pr[2][2];
        smoothing_pairs(d.crossings[c], (state >> c) & 1, pr);
        r.incidence.push_back({r.circle_of_arc.at(pr[0][0]), r.circle_of_arc.at(pr[1][0])});
    }
    return r;
}

std::pair<int, int> writhe_data(const Diagram& d) { return {d.n_plus(), d.n_minus()}; }

FaceData faces(const Diagram& d) {
    int n = d.n_crossings();
    FaceData f;
    f.face_of_dart.assign(4 * n, -1);
    if (n == 0) {
        f.two_colorable = true;
        return f;
    }

    // alpha: dart at one use of an arc -> dart at the other use
    auto uses = arc_uses(d);
    std::vector<int> alpha(4 * n, -1);
    for (auto& [a, u] : uses) {
        if (u[0].loop) continue;
        int d1 = 4 * u[0].crossing + u[0].slot;
        int d2 = 4 * u[1].crossing + u[1].slot;
        alpha[d1] = d2;
        alpha[d2] = d1;
    }

    // phi = sigma . alpha: follow the arc, then rotate one slot counterclockwise
    auto phi = [&](int dart) {
        int other = alpha[dart];
        int c = other / 4, s = other % 4;
        return 4 * c + (s + 1) % 4;
    };

    for (int start = 0; start < 4 * n; ++start) {
        if (f.face_of_dart[start] >= 0) continue;
        int id = f.n_faces++;
        f.face_darts.push_back({});
        int dart = start;
        do {
            f.face_of_dart[dart] = id;
            f.face_darts[id].push_back(dart);
            dart = phi(dart);
        } while (dart != start);
    }

    // checkerboard: faces adjacent across an arc get opposite colors; the two
    // faces along arc (d1, d2) are face(d1) vs face(sigma(d2))-side, i.e. the
    // orbits containing d1 and alpha(d1) rotated; adjacency across each dart:
    // face(dart) and face(alpha(dart)+rotate^{-1}) share the arc. Use the two
    // dart orbits on either side: face(dart) vs face at the reversed dart's
    // other rotation.
    f.color.assign(f.n_faces, -1);
    f.two_colorable = true;
    // sides of arc (d1,d2): orbit(d1's face) and orbit of sigma^{-1}(d2)?? The
    // two faces bounded by the arc are face(d1) and face(prev) where
    // prev = 4c + (s+3)%4 for (c,s) = d2's crossing/slot rotated back. Simpler:
    // darts d1 and d2 are the two directions of the arc; face(d1) and
    // face(d2) are the faces on its two sides for phi = sigma.alpha.
    std::vector<int> stack;
    for (int s0 = 0; s0 < 4 * n; ++s0) {
        int fa = f.face_of_dart[s0];
        if (f.color[fa] >= 0) continue;
        f.color[fa] = 0;
        stack.push_back(s0);
        std::vector<int> comp_faces{fa};
        while (!stack.empty()) {
            int dart = stack.back();
            stack.pop_back();
            int cur = f.face_of_dart[dart];
            for (int dd : f.face_darts[cur]) {
                int opp = alpha[dd];
                int fo = f.face_of_dart[opp];
                if (f.color[fo] < 0) {
                    f.color[fo] = 1 - f.color[cur];
                    stack.push_back(opp);
                } else if (f.color[fo] == f.color[cur]) {
                    f.two_colorable = false;
                }
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// rewrites

namespace {

Rewrite plain(const Diagram& d) {
    Rewrite r;
    r.diagram = d;
    for (int a : d.arc_ids()) r.arc_sources[a] = {a};
    return r;
}

// replace the arc at one specific use (crossing slot)
void replace_use(Diagram& d, int crossing, int slot, int new_arc) { d.crossings[crossing].slots[slot] = new_arc; }

struct UsePair {
    ArcUse head, tail; // head: incoming end; tail: outgoing end
};

// locate head/tail uses of an arc (requires finalized diagram)
UsePair locate(const Diagram& d, int arc) {
    UsePair up;
    bool have_head = false, have_tail = false;
    for (int c = 0; c < d.n_crossings(); ++c)
        for (int s = 0; s < 4; ++s)
            if (d.crossings[c].slots[s] == arc) {
                if (d.incoming[c][s] && !have_head) {
                    up.head = {c, s, false};
                    have_head = true;
                } else {
                    up.tail = {c, s, false};
                    have_tail = true;
                }
            }
    if (!have_head || !have_tail) fail("arc " + std::to_string(arc) + " is not a crossing arc");
    return up;
}

bool is_loop_arc(const Diagram& d, int arc) {
    return std::find(d.free_loops.begin(), d.free_loops.end(), arc) != d.free_loops.end();
}

} // namespace

Rewrite birth(const Diagram& d) {
    Rewrite r = plain(d);
    int id = d.max_arc_id() + 1;
    r.diagram.free_loops.push_back(id);
    r.arc_sources[id] = {};
    r.new_arc_loop = id;
    r.diagram.finalize();
    return r;
}

Rewrite death(const Diagram& d, int loop_arc) {
    if (!is_loop_arc(d, loop_arc))
        fail("death: arc " + std::to_string(loop_arc) + " is not a crossingless circle");
    Rewrite r = plain(d);
    auto& fl = r.diagram.free_loops;
    fl.erase(std::find(fl.begin(), fl.end(), loop_arc));
    r.arc_sources.erase(loop_arc);
    r.diagram.finalize();
    return r;
}

Rewrite saddle_rewrite(const Diagram& d, int a, int b) {
    bool la = is_loop_arc(d, a), lb = is_loop_arc(d, b);
    auto all = d.arc_ids();
    if (std::find(all.begin(), all.end(), a) == all.end() || std::find(all.begin(), all.end(), b) == all.end())
        fail("saddle: unknown arc id");
    Rewrite r = plain(d);
    Diagram& nd = r.diagram;
    if (a == b) {
        // split: the strand keeps its arc, a fresh circle appears
        int id = d.max_arc_id() + 1;
        nd.free_loops.push_back(id);
        r.arc_sources[id] = {a};
        r.new_arc_loop = id;
        r.new_arc_through = a;
    } else if (la && lb) {
        int keep = std::min(a, b), drop = std::max(a, b);
        auto& fl = nd.free_loops;
        fl.erase(std::find(fl.begin(), fl.end(), drop));
        r.arc_sources.erase(drop);
        r.arc_sources[keep] = {a, b};
        r.new_arc_through = keep;
    } else if (la != lb) {
        // a free circle is absorbed into the strand
        int loop = la ? a : b, strand = la ? b : a;
        auto& fl = nd.free_loops;
        fl.erase(std::find(fl.begin(), fl.end(), loop));
        r.arc_sources.erase(loop);
        r.arc_sources[strand] = {a, b};
        r.new_arc_through = strand;
    } else {
        // both crossing arcs: swap heads
        UsePair ua = locate(d, a), ub = locate(d, b);
        replace_use(nd, ub.head.crossing, ub.head.slot, a);
        replace_use(nd, ua.head.crossing, ua.head.slot, b);
        r.arc_sources[a] = {a, b};
        r.arc_sources[b] = {a, b};
    }
    nd.finalize();
    return r;
}

Rewrite add_kink(const Diagram& d, int arc, int kink_sign) {
    auto all = d.arc_ids();
    if (std::find(all.begin(), all.end(), arc) == all.end()) fail("r1+: unknown arc id");
    Rewrite r = plain(d);
    Diagram& nd = r.diagram;
    int a2 = d.max_arc_id() + 1; // loop arc
    int a3 = a2 + 1;             // continuation

    Crossing c;
    c.arrow = 1;
    if (kink_sign > 0) {
        // positive kink: under in (arc), under out = loop, over in = loop at
        // slot 3, over out = continuation at slot 1
        c.slots[0] = arc;
        c.slots[1] = a3;
        c.slots[2] = a2;
        c.slots[3] = a2;
    } else {
        // negative kink: over enters at slot 1
        c.slots[0] = arc;
        c.slots[1] = a2;
        c.slots[2] = a2;
        c.slots[3] = a3;
    }

    if (is_loop_arc(d, arc)) {
        // kink on a crossingless circle: arc becomes the 2-arc 1-crossing circle
        auto& fl = nd.free_loops;
        fl.erase(std::find(fl.begin(), fl.end(), arc));
        // close up: continuation arc is the same as the entering arc
        if (kink_sign > 0) c.slots[1] = arc;
        else c.slots[3] = arc;
        nd.crossings.push_back(c);
        r.arc_sources[a2] = {arc};
        r.new_arc_loop = a2;
    } else {
        UsePair up = locate(d, arc);
        replace_use(nd, up.head.crossing, up.head.slot, a3);
        nd.crossings.push_back(c);
        r.arc_sources[a2] = {arc};
        r.arc_sources[a3] = {arc};
        r.new_arc_loop = a2;
    }
    r.new_crossing_a = nd.n_crossings() - 1;
    nd.finalize();
    if (nd.crossings[r.new_crossing_a].sign != kink_sign) fail("r1+: kink sign mismatch after rewrite");
    return r;
}

Rewrite fix_crossing(const Diagram& d, int cidx, int rho, bool lenient) {
    if (cidx < 0 || cidx >= d.n_crossings()) fail("fix_crossing: bad crossing index");
    Rewrite r;
    Diagram nd;
    nd.free_loops = d.free_loops;
    for (int c = 0; c < d.n_crossings(); ++c)
        if (c != cidx) nd.crossings.push_back(d.crossings[c]);

    // fuse the two smoothing pairs with a union-find over arc ids
    int pr[2][2];
    smoothing_pairs(d.crossings[cidx], rho, pr);
    std::map<int, int> rep; // arc -> representative
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) rep[pr[k][l]] = pr[k][l];
    auto find = [&](int x) {
        while (rep.count(x) && rep[x] != x) x = rep[x];
        return x;
    };
    auto join = [&](int x, int y) {
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (x > y) std::swap(x, y);
        rep[y] = x;
    };
    join(pr[0][0], pr[0][1]);
    join(pr[1][0], pr[1][1]);

    std::map<int, std::set<int>> classes;
    for (auto& [a, _] : rep) classes[find(a)].insert(a);

    for (auto& c : nd.crossings)
        for (int s = 0; s < 4; ++s)
            if (rep.count(c.slots[s])) c.slots[s] = find(c.slots[s]);

    r.arc_sources.clear();
    for (int a : nd.arc_ids()) r.arc_sources[a] = {a};
    for (auto& [root, cls] : classes) r.arc_sources[root] = cls;

    // a fused class with no remaining crossing use closed up into a circle
    std::set<int> used;
    for (auto& c : nd.crossings)
        for (int s = 0; s < 4; ++s) used.insert(c.slots[s]);
    for (auto& [root, cls] : classes)
        if (!used.count(root)) {
            nd.free_loops.push_back(root);
            r.new_arc_loop = root;
        }

    nd.finalize(lenient);
    r.diagram = std::move(nd);
    return r;
}

Rewrite remove_kink(const Diagram& d, int cidx) {
    if (cidx < 0 || cidx >= d.n_crossings()) fail("r1-: bad crossing id");
    const Crossing& c = d.crossings[cidx];
    bool kink = false;
    for (int s = 0; s < 4; ++s)
        if (c.slots[s] == c.slots[(s + 1) % 4]) kink = true;
    if (!kink) fail("r1-: crossing " + std::to_string(cidx + 1) + " is not a kink");
    // smoothing that erases the loop: the one joining the loop arc to itself
    // is the resolution containing the kink circle; we want the through-strand,
    // which is the other one. fix_crossing with the through smoothing fuses
    // the strand; with the circle smoothing it would leave a loop + strand.
    int rho_through;
    if (c.slots[0] == c.slots[1] || c.slots[2] == c.slots[3]) rho_through = 0;
    else rho_through = 1;
    // the through-smoothing creates a circle only when the kinked strand was
    // the whole 1-crossing unknot, which is a legitimate removal
    return fix_crossing(d, cidx, rho_through);
}

Rewrite r2_add(const Diagram& d, int arc_over, int arc_under) {
    auto all = d.arc_ids();
    if (std::find(all.begin(), all.end(), arc_over) == all.end() ||
        std::find(all.begin(), all.end(), arc_under) == all.end())
        fail("r2+: unknown arc id");
    if (arc_over == arc_under) {
        // fold: the strand doubles back over itself. Along the strand:
        // a -> c1(under) -> u -> c2(under) -> s(turnaround) -> c2(over) -> p
        //   -> c1(over) -> a2 -> old head of a
        Rewrite r = plain(d);
        Diagram& nd = r.diagram;
        int base = d.max_arc_id();
        int p = base + 1, u = base + 2, s = base + 3, a2 = base + 4;
        Crossing c1, c2;
        c1.slots[0] = arc_over; c1.slots[1] = p; c1.slots[2] = u; c1.slots[3] = a2;
        c2.slots[0] = u; c2.slots[1] = p; c2.slots[2] = s; c2.slots[3] = s;
        if (is_loop_arc(d, arc_over)) {
            auto& fl = nd.free_loops;
            fl.erase(std::find(fl.begin(), fl.end(), arc_over));
            c1.slots[3] = arc_over; // the strand closes back up
            for (int x : {p, u, s}) r.arc_sources[x] = {arc_over};
        } else {
            UsePair up = locate(d, arc_over);
            replace_use(nd, up.head.crossing, up.head.slot, a2);
            for (int x : {p, u, s, a2}) r.arc_sources[x] = {arc_over};
        }
        nd.crossings.push_back(c1);
        nd.crossings.push_back(c2);
        r.new_crossing_a = nd.n_crossings() - 2;
        r.new_crossing_b = nd.n_crossings() - 1;
        nd.finalize();
        return r;
    }

    Rewrite r = plain(d);
    Diagram& nd = r.diagram;
    int base = d.max_arc_id();
    int p = base + 1, q = base + 2; // over-strand middle and continuation
    int u = base + 3, s = base + 4; // under-strand middle and continuation

    bool lo = is_loop_arc(d, arc_over), lu = is_loop_arc(d, arc_under);

    // c1: over-strand crosses left to right (positive), c2 back (negative)
    Crossing c1, c2;
    c1.slots[0] = arc_under; c1.slots[1] = p; c1.slots[2] = u; c1.slots[3] = arc_over;
    c2.slots[0] = u;         c2.slots[1] = p; c2.slots[2] = s; c2.slots[3] = q;

    if (lo) {
        auto& fl = nd.free_loops;
        fl.erase(std::find(fl.begin(), fl.end(), arc_over));
        c2.slots[3] = arc_over; // q: loop closes back to itself
        r.arc_sources[p] = {arc_over};
    } else {
        UsePair up = locate(d, arc_over);
        replace_use(nd, up.head.crossing, up.head.slot, q);
        r.arc_sources[p] = {arc_over};
        r.arc_sources[q] = {arc_over};
    }
    if (lu) {
        auto& fl = nd.free_loops;
        fl.erase(std::find(fl.begin(), fl.end(), arc_under));
        c2.slots[2] = arc_under; // s: loop closes back
        r.arc_sources[u] = {arc_under};
    } else {
        UsePair upu = locate(d, arc_under);
        replace_use(nd, upu.head.crossing, upu.head.slot, s);
        r.arc_sources[u] = {arc_under};
        r.arc_sources[s] = {arc_under};
    }

    nd.crossings.push_back(c1);
    nd.crossings.push_back(c2);
    r.new_crossing_a = nd.n_crossings() - 2;
    r.new_crossing_b = nd.n_crossings() - 1;
    nd.finalize();
    return r;
}

bool r2_bigon(const Diagram& d, int c1, int c2, int* over_arc, int* under_arc) {
    if (c1 == c2 || c1 < 0 || c2 < 0 || c1 >= d.n_crossings() || c2 >= d.n_crossings()) return false;
    const Crossing &A = d.crossings[c1], &B = d.crossings[c2];
    if (d.oriented && A.sign + B.sign != 0) return false; // one positive, one negative
    std::vector<int> overs, unders;
    for (int sa : {1, 3})
        for (int sb : {1, 3})
            if (A.slots[sa] == B.slots[sb]) overs.push_back(A.slots[sa]);
    for (int sa : {0, 2})
        for (int sb : {0, 2})
            if (A.slots[sa] == B.slots[sb]) unders.push_back(A.slots[sa]);
    // the genuine bigon pair closes into its own two-arc circle under one
    // combination of smoothings of the two crossings
    auto closes = [&](int o, int u) {
        for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2) {
                std::map<int, int> rep;
                auto find = [&](int x) {
                    while (rep.count(x) && rep[x] != x) x = rep[x];
                    return x;
                };
                auto join = [&](int x, int y) {
                    if (!rep.count(x)) rep[x] = x;
                    if (!rep.count(y)) rep[y] = y;
                    x = find(x);
                    y = find(y);
                    if (x != y) rep[y] = x;
                };
                int pr[2][2];
                smoothing_pairs(A, b1, pr);
                join(pr[0][0], pr[0][1]);
                join(pr[1][0], pr[1][1]);
                smoothing_pairs(B, b2, pr);
                join(pr[0][0], pr[0][1]);
                join(pr[1][0], pr[1][1]);
                if (find(o) != find(u)) continue;
                std::set<int> cls;
                for (auto& [a, _] : rep)
                    if (find(a) == find(o)) cls.insert(a);
                if (cls == std::set<int>{o, u}) return true;
            }
        return false;
    };
    for (int o : overs)
        for (int u : unders) {
            if (o == u) continue;
            if (!closes(o, u)) continue;
            if (over_arc) *over_arc = o;
            if (under_arc) *under_arc = u;
            return true;
        }
    return false;
}

Rewrite r2_remove(const Diagram& d, int c1, int c2, bool lenient) {
    int over = -1, under = -1;
    if (!r2_bigon(d, c1, c2, &over, &under))
        fail("r2-: crossings " + std::to_string(c1 + 1) + "," + std::to_string(c2 + 1) +
             " do not bound a removable bigon");

    // undo the move: at each of the two crossings both strands pass through,
    // so fuse the over-channel ends and the under-channel ends
    Rewrite r;
    Diagram nd;
    nd.free_loops = d.free_loops;
    for (int c = 0; c < d.n_crossings(); ++c)
        if (c != c1 && c != c2) nd.crossings.push_back(d.crossings[c]);

    std::map<int, int> rep;
    auto find = [&](int x) {
        while (rep.count(x) && rep[x] != x) x = rep[x];
        return x;
    };
    auto join = [&](int x, int y) {
        if (!rep.count(x)) rep[x] = x;
        if (!rep.count(y)) rep[y] = y;
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (x > y) std::swap(x, y);
        rep[y] = x;
    };
    for (int c : {c1, c2}) {
        const int* s = d.crossings[c].slots;
        join(s[1], s[3]); // over channel
        join(s[0], s[2]); // under channel
    }

    std::map<int, std::set<int>> classes;
    for (auto& [a, _] : rep) classes[find(a)].insert(a);

    for (auto& cr : nd.crossings)
        for (int s = 0; s < 4; ++s)
            if (rep.count(cr.slots[s])) cr.slots[s] = find(cr.slots[s]);

    for (int a : nd.arc_ids()) r.arc_sources[a] = {a};
    for (auto& [root, cls] : classes) r.arc_sources[root] = cls;

    std::set<int> used;
    for (auto& cr : nd.crossings)
        for (int s = 0; s < 4; ++s) used.insert(cr.slots[s]);
    for (auto& [root, cls] : classes)
        if (!used.count(root)) {
            nd.free_loops.push_back(root);
            r.new_arc_loop = root;
        }

    nd.finalize(lenient);
    r.diagram = std::move(nd);
    return r;
}

std::optional<std::map<int, int>> diagram_bijection(const Diagram& a, const Diagram& b) {
    if (a.n_crossings() != b.n_crossings() || a.free_loops.size() != b.free_loops.size()) return std::nullopt;
    int n = a.n_crossings();
    std::map<int, int> sigma, sigma_inv;
    auto bind = [&](int x, int y) {
        auto it = sigma.find(x);
        if (it != sigma.end()) return it->second == y;
        auto jt = sigma_inv.find(y);
        if (jt != sigma_inv.end()) return false;
        sigma[x] = y;
        sigma_inv[y] = x;
        return true;
    };
    std::function<bool(int)> go = [&](int k) -> bool {
        if (k == n) return true;
        const int* sa = a.crossings[k].slots;
        const int* sb = b.crossings[k].slots;
        for (int rot : {0, 2}) {
            auto save = sigma;
            auto save_inv = sigma_inv;
            bool ok = true;
            for (int s = 0; s < 4 && ok; ++s) ok = bind(sa[s], sb[(s + rot) % 4]);
            if (ok && go(k + 1)) return true;
            sigma = save;
            sigma_inv = save_inv;
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    std::vector<int> la = a.free_loops, lb = b.free_loops;
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    for (size_t i = 0; i < la.size(); ++i)
        if (!bind(la[i], lb[i])) return std::nullopt;
    return sigma;
}

Rewrite relabel(const Diagram& d, const std::map<int, int>& arc_perm) {
    // permutation on the mentioned ids; unmentioned arcs keep their id
    std::map<int, int> m = arc_perm;
    std::set<int> keys, vals;
    for (auto& [k, v] : m) {
        keys.insert(k);
        vals.insert(v);
    }
    if (keys != vals) fail("relabel: not a permutation of arc ids");
    Rewrite r;
    Diagram nd = d;
    auto map_arc = [&](int a) { return m.count(a) ? m.at(a) : a; };
    for (auto& c : nd.crossings)
        for (int s = 0; s < 4; ++s) c.slots[s] = map_arc(c.slots[s]);
    for (auto& a : nd.free_loops) a = map_arc(a);
    nd.finalize();
    r.diagram = std::move(nd);
    for (int a : d.arc_ids()) r.arc_sources[map_arc(a)] = {a};
    return r;
}

Rewrite r3_slide(const Diagram& d, int central, int c1, int c2) {
    int n = d.n_crossings();
    if (central < 0 || c1 < 0 || c2 < 0 || central >= n || c1 >= n || c2 >= n) fail("r3: bad crossing id");
    if (central == c1 || central == c2 || c1 == c2) fail("r3: crossing ids must be distinct");

    // find the triangle: a 3-dart face visiting exactly these crossings
    FaceData fd = faces(d);
    int u = -1, v = -1, w = -1;
    for (int fidx = 0; fidx < fd.n_faces && w < 0; ++fidx) {
        auto& darts = fd.face_darts[fidx];
        if (darts.size() != 3) continue;
        std::set<int> cr;
        for (int dart : darts) cr.insert(dart / 4);
        if (cr != std::set<int>{central, c1, c2}) continue;
        for (int dart : darts) {
            int ca = dart / 4, sa = dart % 4;
            int arc = d.crossings[ca].slots[sa];
            // the dart's arc joins ca to the arc's other endpoint
            int other = -1;
            for (int cb : {central, c1, c2})
                for (int sb = 0; sb < 4; ++sb)
                    if (d.crossings[cb].slots[sb] == arc && !(cb == ca && sb == sa)) other = cb;
            std::set<int> side{ca, other};
            if (side == std::set<int>{c1, c2}) w = arc;
            else if (side == std::set<int>{c1, central}) u = arc;
            else if (side == std::set<int>{c2, central}) v = arc;
        }
    }
    if (u < 0 || v < 0 || w < 0)
        fail("r3: crossings " + std::to_string(central + 1) + "," + std::to_string(c1 + 1) + "," +
             std::to_string(c2 + 1) + " do not bound a triangle");

    // the sliding strand must pass both wing crossings on the same level
    auto level_of = [&](int c, int arc) -> int { // 0 under, 1 over, -1 absent
        const Crossing& cr = d.crossings[c];
        if (cr.slots[0] == arc || cr.slots[2] == arc) return 0;
        if (cr.slots[1] == arc || cr.slots[3] == arc) return 1;
        return -1;
    };
    if (level_of(c1, w) != level_of(c2, w))
        fail("r3: the strand between the wing crossings is neither over both nor under both");

    // The slide reverses, along each of the three strands, the order of its
    // two triangle crossings. Combinatorially: with the middle arc flowing
    // P -> Q, swap the strand's in-slot contents of P and Q and likewise the
    // out-slot contents; the middle arc ends up between them the other way.
    Diagram nd = d;
    auto swap_along = [&](int P, int Q, int mid) {
        auto level_slots = [&](int c, int arc) -> std::pair<int, int> {
            const Crossing& cr = nd.crossings[c];
            for (auto pr : {std::array<int, 2>{0, 2}, std::array<int, 2>{1, 3}}) {
                if (cr.slots[pr[0]] == arc) return {pr[0], pr[1]};
                if (cr.slots[pr[1]] == arc) return {pr[1], pr[0]};
            }
            fail("r3: internal strand lookup failure");
            return {-1, -1};
        };
        auto [pm, pe] = level_slots(P, mid);
        auto [qm, qe] = level_slots(Q, mid);
        // in-slot of the strand at P is whichever of (pm, pe) is incoming
        int p_in = d.incoming[P][pm] ? pm : pe;
        int p_out = p_in == pm ? pe : pm;
        int q_in = d.incoming[Q][qm] ? qm : qe;
        int q_out = q_in == qm ? qe : qm;
        std::swap(nd.crossings[P].slots[p_in], nd.crossings[Q].slots[q_in]);
        std::swap(nd.crossings[P].slots[p_out], nd.crossings[Q].slots[q_out]);
    };

    swap_along(c1, central, u);
    swap_along(c2, central, v);
    swap_along(c1, c2, w);

    nd.finalize();
    for (int c = 0; c < n; ++c)
        if (nd.crossings[c].sign != d.crossings[c].sign) fail("r3: crossing sign changed; invalid slide");

    Rewrite r;
    r.diagram = std::move(nd);
    for (int a : d.arc_ids()) r.arc_sources[a] = {a};
    return r;
}

} // namespace oddkh
