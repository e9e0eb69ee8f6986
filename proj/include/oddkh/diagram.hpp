#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oddkh {

// PD slot convention: slots[0..3] counterclockwise, slots[0] = incoming
// under-strand, slots[2] = outgoing under-strand. The crossing is positive
// when the over-strand enters at slots[3] and leaves at slots[1].
struct Crossing {
    int slots[4] = {0, 0, 0, 0};
    int sign = 0;  // +1 / -1, computed from orientations
    int arrow = 1; // split decoration, +1 default, -1 flipped
};

// 0-smoothing joins (slots0-slots3)(slots1-slots2); 1-smoothing joins
// (slots0-slots1)(slots2-slots3).
inline void smoothing_pairs(const Crossing& c, int rho, int out[2][2]) {
    if (rho == 0) {
        out[0][0] = c.slots[0]; out[0][1] = c.slots[3];
        out[1][0] = c.slots[1]; out[1][1] = c.slots[2];
    } else {
        out[0][0] = c.slots[0]; out[0][1] = c.slots[1];
        out[1][0] = c.slots[2]; out[1][1] = c.slots[3];
    }
}

struct Resolution {
    // each circle is the sorted set of arcs it traverses; circles sorted by
    // their minimal arc id (the canonical generator order)
    std::vector<std::vector<int>> circles;
    std::map<int, int> circle_of_arc;
    // for each crossing, the circle indices met by its two smoothing arcs
    std::vector<std::pair<int, int>> incidence;

    int count() const { return int(circles.size()); }
};

struct Diagram {
    std::vector<Crossing> crossings;
    std::vector<int> free_loops; // arc ids of crossingless circles
    bool oriented = true;        // false when no consistent orientation exists

    // orientation: for every (crossing, slot), whether the arc there points
    // into the crossing; filled by finalize()
    std::vector<std::array<bool, 4>> incoming;

    int n_crossings() const { return int(crossings.size()); }
    std::vector<int> arc_ids() const; // all arcs, sorted (crossing arcs + loops)
    int max_arc_id() const;

    int n_plus() const;
    int n_minus() const;

    // validates the closed-1-manifold condition, infers orientations and
    // crossing signs, checks planar consistency (Euler characteristic 2 per
    // connected component). Throws std::runtime_error with a message carrying
    // the offending crossing index on failure. In lenient mode an
    // inconsistent orientation marks the diagram unoriented instead of
    // throwing (internal resolutions of oriented diagrams need this).
    void finalize(bool lenient = false);

    bool is_empty() const { return crossings.empty() && free_loops.empty(); }
    bool is_crossingless_unknot() const { return crossings.empty() && free_loops.size() == 1; }

    bool operator==(const Diagram& o) const;
};

Diagram parse_pd(const std::string& text);
std::string to_pd(const Diagram& d);

Resolution resolve(const Diagram& d, uint32_t state);

std::pair<int, int> writhe_data(const Diagram& d); // (n+, n-)

// ---------------------------------------------------------------------------
// Combinatorial map structure (faces), used for planarity validation and the
// Goeritz matrix. Darts are indexed 4*crossing + slot, pointing away from the
// crossing; free loops are excluded.
struct FaceData {
    int n_faces = 0;
    std::vector<int> face_of_dart;    // size 4 * n_crossings
    std::vector<int> color;           // per face, 0/1 checkerboard
    std::vector<std::vector<int>> face_darts;
    bool two_colorable = false;

    // face at the corner between slot k and slot k+1 of crossing c (the face
    // walk arrives at slot k and departs at slot k+1)
    int corner_face(int c, int k) const { return face_of_dart[4 * c + (k + 1) % 4]; }
};

FaceData faces(const Diagram& d);

// ---------------------------------------------------------------------------
// Frame rewrites for movie moves. Each returns the new diagram plus an arc
// provenance map new_arc -> set of old arcs it absorbed (identity when ids
// survive). Fresh arc and crossing ids are deterministic.

struct Rewrite {
    Diagram diagram;
    std::map<int, std::set<int>> arc_sources; // new arc -> old arcs fused into it
    int new_crossing_a = -1, new_crossing_b = -1;
    int new_arc_loop = -1, new_arc_through = -1;
};

Rewrite add_kink(const Diagram& d, int arc, int kink_sign);
Rewrite remove_kink(const Diagram& d, int crossing);
Rewrite r2_add(const Diagram& d, int arc_over, int arc_under);
Rewrite r2_remove(const Diagram& d, int c1, int c2, bool lenient = false);
Rewrite r3_slide(const Diagram& d, int central, int c1, int c2);
Rewrite birth(const Diagram& d);
Rewrite death(const Diagram& d, int loop_arc);
Rewrite saddle_rewrite(const Diagram& d, int arc_a, int arc_b);
Rewrite relabel(const Diagram& d, const std::map<int, int>& arc_perm);

// replace crossing `c` by its rho-smoothing; fused arc chains keep their
// minimal id, and a chain closing on itself becomes a free loop
Rewrite fix_crossing(const Diagram& d, int c, int rho, bool lenient = false);

// arc bijection identifying two diagrams crossing-by-crossing (crossing k of
// `a` must map onto crossing k of `b`, allowing the under-channel ends to be
// recorded in either order); empty when none exists
std::optional<std::map<int, int>> diagram_bijection(const Diagram& a, const Diagram& b);

// true when crossings c1, c2 are joined by a bigon whose two arcs carry the
// over-strand at both ends and the under-strand at both ends respectively
// (the removable Reidemeister II pattern); fills the bigon arcs
bool r2_bigon(const Diagram& d, int c1, int c2, int* over_arc, int* under_arc);

} // namespace oddkh
