#pragma once

#include "oddkh/complex.hpp"

#include <functional>

namespace oddkh {

using Vec = std::map<std::uint64_t, Int>; // sparse chain vector

// A grading-homogeneous map of cube complexes. apply_gen produces the image
// of a single generator; blocks are materialized on demand. chain_sign -1
// marks an anti-chain map (f d = -d f).
struct ChainMap {
    ComplexPtr src, tgt;
    int dh = 0, dq = 0;
    int chain_sign = 1;
    std::function<GenImage(std::uint64_t)> apply_gen;

    Vec apply(const Vec& x) const;

    // exact blockwise verification of f d = chain_sign * d f and the degree;
    // throws on violation
    void verify() const;

    // the (h, q) block as a matrix from source generators at (h, q) to target
    // generators at (h + dh, q + dq), in generator-index order
    IntMatrix block(int h, int q) const;
};

ChainMap identity_map(ComplexPtr c);

// block-matrix composition: degrees add, chain signs multiply
ChainMap compose(std::vector<ChainMap> maps);
ChainMap compose2(const ChainMap& second, const ChainMap& first); // second . first

// mapping cone acyclicity (quasi-isomorphism test); exact over the complex's
// coefficients, integral homology for Z
bool is_quasi_iso(const ChainMap& f);

// induced map on homology free parts, in Smith-adapted bases
struct InducedMap {
    // key: source bigrading (h, q); the block maps its free part to the free
    // part at (h + dh, q + dq)
    std::map<std::pair<int, int>, IntMatrix> blocks;
    std::map<std::pair<int, int>, std::vector<Int>> src_torsion, tgt_torsion;
    int dh = 0, dq = 0;
};
InducedMap induced_homology_map(const ChainMap& f);

} // namespace oddkh
