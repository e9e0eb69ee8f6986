#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oddkh/diagram.hpp"

#include <random>

using namespace oddkh;

namespace {
const char* kTrefoil = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";
const char* kHopfPos = "X(2,4,1,3) X(4,2,3,1)";
const char* kFig8 = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";
} // namespace

TEST_CASE("parse crossingless unknot") {
    auto d = parse_pd("circles=1");
    CHECK(d.n_crossings() == 0);
    CHECK(d.free_loops.size() == 1);
    CHECK(d.is_crossingless_unknot());
}

TEST_CASE("parse trefoil") {
    auto d = parse_pd(kTrefoil);
    CHECK(d.n_crossings() == 3);
    CHECK(d.arc_ids().size() == 6);
    CHECK(d.free_loops.empty());
    // one component: arc traversal partitions into a single cycle
    auto r0 = resolve(d, 0);
    (void)r0;
}

TEST_CASE("parse hopf link, two components") {
    auto d = parse_pd(kHopfPos);
    CHECK(d.n_crossings() == 2);
    CHECK(d.arc_ids().size() == 4);
}

TEST_CASE("parse errors") {
    CHECK_THROWS(parse_pd("X(1,2,3)"));
    CHECK_THROWS(parse_pd("X(1,1,1,1) X(2,2,2,2) Y"));
    // arc used three times
    CHECK_THROWS(parse_pd("X(1,2,1,2) X(1,3,2,3)"));
}

TEST_CASE("writhe data") {
    CHECK(writhe_data(parse_pd("circles=1")) == std::pair<int, int>{0, 0});
    CHECK(writhe_data(parse_pd(kTrefoil)) == std::pair<int, int>{0, 3});
    CHECK(writhe_data(parse_pd(kHopfPos)) == std::pair<int, int>{2, 0});
}

TEST_CASE("resolve: frozen circle counts") {
    auto d0 = parse_pd("circles=1");
    CHECK(resolve(d0, 0).count() == 1);

    auto t = parse_pd(kTrefoil);
    CHECK(resolve(t, 0b000).count() == 2);
    CHECK(resolve(t, 0b111).count() == 3);

    CHECK_THROWS(resolve(t, 1u << 31));
}

TEST_CASE("resolve: state vector length guard") {
    auto t = parse_pd(kTrefoil);
    // states above 2^n are rejected upstream by the cli; resolve masks bits
    for (uint32_t v = 0; v < 8; ++v) CHECK(resolve(t, v).count() >= 1);
}

TEST_CASE("adjacent states change circle count by exactly one") {
    for (auto pd : {kTrefoil, kHopfPos, kFig8}) {
        auto d = parse_pd(pd);
        int n = d.n_crossings();
        for (uint32_t v = 0; v < (1u << n); ++v)
            for (int i = 0; i < n; ++i)
                if (!((v >> i) & 1)) {
                    int a = resolve(d, v).count();
                    int b = resolve(d, v | (1u << i)).count();
                    CHECK(std::abs(a - b) == 1);
                }
    }
}

TEST_CASE("fragment count: sum over circles of crossing strands = 2n") {
    for (auto pd : {kTrefoil, kHopfPos, kFig8}) {
        auto d = parse_pd(pd);
        int n = d.n_crossings();
        for (uint32_t v = 0; v < (1u << n); ++v) {
            auto r = resolve(d, v);
            int strands = 0;
            for (auto& [ca, cb] : r.incidence) {
                (void)ca;
                (void)cb;
                strands += 2;
            }
            CHECK(strands == 2 * n);
        }
    }
}

TEST_CASE("relabeled diagrams have equal circle profiles") {
    std::mt19937 rng(99);
    auto d = parse_pd(kFig8);
    auto arcs = d.arc_ids();
    std::vector<int> perm = arcs;
    for (int it = 0; it < 10; ++it) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::map<int, int> m;
        for (size_t i = 0; i < arcs.size(); ++i) m[arcs[i]] = perm[i];
        auto r = relabel(d, m);
        for (uint32_t v = 0; v < 16; ++v)
            CHECK(resolve(r.diagram, v).count() == resolve(d, v).count());
    }
}

TEST_CASE("faces: euler characteristic and two-coloring") {
    auto t = parse_pd(kTrefoil);
    auto f = faces(t);
    // V - E + F = 2 for the trefoil: 3 - 6 + F
    CHECK(f.n_faces == 5);
    CHECK(f.two_colorable);
    // opposite corners around any crossing share a color
    for (int c = 0; c < 3; ++c) {
        CHECK(f.color[f.corner_face(c, 0)] == f.color[f.corner_face(c, 2)]);
        CHECK(f.color[f.corner_face(c, 1)] == f.color[f.corner_face(c, 3)]);
        CHECK(f.color[f.corner_face(c, 0)] != f.color[f.corner_face(c, 1)]);
    }
}

TEST_CASE("kink add and remove round-trip") {
    auto d = parse_pd(kTrefoil);
    for (int sign : {1, -1}) {
        auto k = add_kink(d, 1, sign);
        CHECK(k.diagram.n_crossings() == 4);
        CHECK(k.diagram.crossings[k.new_crossing_a].sign == sign);
        auto back = remove_kink(k.diagram, k.new_crossing_a);
        CHECK(back.diagram.n_crossings() == 3);
        // same circle profile as the original
        for (uint32_t v = 0; v < 8; ++v) CHECK(resolve(back.diagram, v).count() == resolve(d, v).count());
    }
}

TEST_CASE("kink on the crossingless unknot") {
    auto d = parse_pd("circles=1");
    auto k = add_kink(d, d.free_loops[0], 1);
    CHECK(k.diagram.n_crossings() == 1);
    CHECK(k.diagram.free_loops.empty());
    CHECK(k.diagram.n_plus() == 1);
    // positive kink: circle appears in the 1-resolution
    CHECK(resolve(k.diagram, 0).count() == 1);
    CHECK(resolve(k.diagram, 1).count() == 2);

    auto m = add_kink(d, d.free_loops[0], -1);
    CHECK(m.diagram.n_minus() == 1);
    CHECK(resolve(m.diagram, 0).count() == 2);
    CHECK(resolve(m.diagram, 1).count() == 1);

    auto back = remove_kink(k.diagram, 0);
    CHECK(back.diagram.is_crossingless_unknot());
}

TEST_CASE("r2 add and remove round-trip") {
    auto d = parse_pd("circles=2");
    int a = d.free_loops[0], b = d.free_loops[1];
    auto r = r2_add(d, a, b);
    CHECK(r.diagram.n_crossings() == 2);
    CHECK(r.diagram.n_plus() == 1);
    CHECK(r.diagram.n_minus() == 1);
    int over = -1, under = -1;
    CHECK(r2_bigon(r.diagram, r.new_crossing_a, r.new_crossing_b, &over, &under));
    auto back = r2_remove(r.diagram, r.new_crossing_a, r.new_crossing_b);
    CHECK(back.diagram.n_crossings() == 0);
    CHECK(back.diagram.free_loops.size() == 2);
}

TEST_CASE("r2 add on a knotted diagram") {
    auto d = parse_pd(kTrefoil);
    auto r = r2_add(d, 1, 4);
    CHECK(r.diagram.n_crossings() == 5);
    auto back = r2_remove(r.diagram, r.new_crossing_a, r.new_crossing_b);
    CHECK(back.diagram.n_crossings() == 3);
    for (uint32_t v = 0; v < 8; ++v) CHECK(resolve(back.diagram, v).count() == resolve(d, v).count());
}

TEST_CASE("saddle rewrites") {
    auto d = parse_pd("circles=2");
    int a = d.free_loops[0], b = d.free_loops[1];
    auto merged = saddle_rewrite(d, a, b);
    CHECK(merged.diagram.free_loops.size() == 1);
    auto split = saddle_rewrite(merged.diagram, merged.diagram.free_loops[0], merged.diagram.free_loops[0]);
    CHECK(split.diagram.free_loops.size() == 2);
}

TEST_CASE("fix_crossing on a kink yields diagram plus circle or plain diagram") {
    auto d = parse_pd("circles=1");
    auto k = add_kink(d, d.free_loops[0], 1);
    // smoothing 1 closes the kink circle (positive kink), smoothing 0 is the strand
    auto f1 = fix_crossing(k.diagram, 0, 1);
    CHECK(f1.diagram.n_crossings() == 0);
    CHECK(f1.diagram.free_loops.size() == 2);
    auto f0 = fix_crossing(k.diagram, 0, 0);
    CHECK(f0.diagram.n_crossings() == 0);
    CHECK(f0.diagram.free_loops.size() == 1);
}

TEST_CASE("r3 slide rejected on the alternating trefoil") {
    // every triangle strand alternates over/under, so no slide applies
    auto d = parse_pd(kTrefoil);
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (c != a && c != b && a != b) CHECK_THROWS(r3_slide(d, c, a, b));
}

TEST_CASE("r3 slide on the sigma1 sigma2 sigma1 braid closure") {
    // crossings: A=X(6,1,5,4), B=X(2,2,3,1), C=X(3,6,4,5); all positive.
    // Triangle sides: arc 1 (A-B, over at both), arc 3 (B-C, under at both),
    // arc 5 (A-C, mixed). Valid slides: central C (slider arc 1) and
    // central A (slider arc 3); central B must be rejected.
    auto d = parse_pd("X(6,1,5,4) X(2,2,3,1) X(3,6,4,5)");
    CHECK(d.n_plus() == 3);

    int ok = 0, rejected = 0;
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (c == a || c == b || a == b) continue;
                try {
                    auto r = r3_slide(d, c, a, b);
                    ++ok;
                    CHECK(r.diagram.n_crossings() == 3);
                    CHECK(r.diagram.n_plus() == 3);
                } catch (const std::exception&) {
                    ++rejected;
                }
            }
    CHECK(ok == 4);
    CHECK(rejected == 2);

    // the slide is an involution on this diagram: sliding back returns a
    // diagram with the same resolved circle profile
    auto r = r3_slide(d, 2, 0, 1);
    auto back = r3_slide(r.diagram, 2, 0, 1);
    for (uint32_t v = 0; v < 8; ++v) CHECK(resolve(back.diagram, v).count() == resolve(d, v).count());
}
