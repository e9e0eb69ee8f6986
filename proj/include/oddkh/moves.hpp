#pragma once

#include "oddkh/chainmap.hpp"
#include "oddkh/diagram.hpp"

namespace oddkh {

// Elementary cobordism chain maps between cube complexes. Each builder
// produces an exact (anti-)chain map; vertexwise sign corrections are solved
// over F2 because source and target carry independent edge assignments. The
// construction throws when the parity system is inconsistent or a raw
// commutation square fails up to sign, which signals an invalid move.

ChainMap birth_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw);
ChainMap death_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int loop_arc);
ChainMap saddle_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int arc_a, int arc_b, int arrow);
ChainMap relabel_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw);

ChainMap r1_add_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int kink_sign);
ChainMap r1_remove_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int crossing);
ChainMap r2_add_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw);
ChainMap r2_remove_map(ComplexPtr src, ComplexPtr tgt, const Rewrite& rw, int c1, int c2);
ChainMap r3_map(ComplexPtr src, ComplexPtr tgt, int central, int c1, int c2);

// convenience forms matching the spec surface: build the target complex too
struct MoveResult {
    ChainMap map;
    ComplexPtr target;
    Diagram frame;
};
MoveResult apply_birth(ComplexPtr src);
MoveResult apply_death(ComplexPtr src, int loop_arc);
MoveResult apply_saddle(ComplexPtr src, int arc_a, int arc_b, int arrow);

} // namespace oddkh
