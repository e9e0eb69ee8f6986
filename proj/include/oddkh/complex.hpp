#pragma once

#include "oddkh/diagram.hpp"
#include "oddkh/exterior.hpp"
#include "oddkh/intmatrix.hpp"
#include "oddkh/laurent.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace oddkh {

enum class Coeffs { Z, F2 };

// one term of an image vector: global generator index and coefficient
struct GenTerm {
    std::uint64_t gen;
    Int coeff;
};
using GenImage = std::vector<GenTerm>;

// terms living inside a single vertex algebra
using MonoImage = std::vector<std::pair<Mono, Int>>;

struct HomologyTable {
    // (h, q) -> (free rank, torsion orders in divisibility order)
    std::map<std::pair<int, int>, std::pair<int, std::vector<Int>>> entries;

    bool operator==(const HomologyTable& o) const { return entries == o.entries; }
};

// The cube complex of a diagram: unreduced or reduced odd Khovanov over Z or
// F2, or the even Khovanov complex over F2. Vertices are states in {0,1}^n;
// the generator with index offset[v] + mask is the wedge monomial (or reduced
// basis element, or circle subset) with the given bit pattern.
struct Complex {
    Diagram diag;
    int n = 0;
    bool reduced = false;
    bool even_tqft = false;
    Coeffs coeffs = Coeffs::Z;
    int nplus = 0, nminus = 0;

    std::vector<Resolution> res;     // per vertex
    std::vector<std::uint8_t> slots; // per vertex: number of generator bits
    std::vector<std::uint64_t> offset;
    std::uint64_t total = 0;
    std::vector<std::uint8_t> esign; // 0/1 exponent per edge, id = v * n + i

    // reduced-basis expansion cache, per vertex: column s -> monomial terms
    std::vector<std::vector<MonoImage>> red_basis;

    std::uint32_t vertex_of(std::uint64_t g) const;
    Mono mask_of(std::uint64_t g, std::uint32_t v) const { return Mono(g - offset[v]); }
    std::uint64_t gen_index(std::uint32_t v, Mono m) const { return offset[v] + m; }

    int hdeg_vertex(std::uint32_t v) const { return __builtin_popcount(v) - nplus; }
    int qdeg(std::uint32_t v, Mono m) const;
    int hdeg(std::uint64_t g) const { return hdeg_vertex(vertex_of(g)); }
    int qdeg(std::uint64_t g) const {
        auto v = vertex_of(g);
        return qdeg(v, mask_of(g, v));
    }

    int edge_sign(std::uint32_t v, int i) const { return esign[std::uint64_t(v) * n + i] ? -1 : 1; }

    // unsigned single-edge map applied to one monomial of vertex v
    MonoImage edge_image_raw(std::uint32_t v, int i, Mono m) const;
    // full differential of a generator (signed, all edges)
    GenImage diff(std::uint64_t g) const;

    // d(d(g)) accumulated; used by the d^2 = 0 checks
    bool d_squared_zero() const;

    std::string gen_str(std::uint64_t g) const;
};

using ComplexPtr = std::shared_ptr<const Complex>;

// Solves the edge assignment for the diagram and assembles the complex.
// Throws if a 2-face fails to commute or anticommute up to sign (a face
// classification bug) or the parity system is inconsistent.
ComplexPtr build_complex(const Diagram& d, bool reduced = false, Coeffs coeffs = Coeffs::Z);

// even Khovanov complex over F2 on the subset-of-circles basis
ComplexPtr even_f2_complex(const Diagram& d);

// variant used by the edge-assignment independence check: the lex solution
// twisted by the coboundary of {vertices with bit0 set}
ComplexPtr build_complex_alt_signs(const Diagram& d);

HomologyTable homology(const Complex& c);
LaurentPoly graded_euler(const Complex& c);

// circle mapping between the resolutions of adjacent vertices: cmap[j] is the
// target circle of source circle j; for a split the splitting circle maps to
// the child returned in split_a, the other child is split_b
struct EdgeCircles {
    bool is_merge = false;
    std::vector<int> cmap;
    int split_src = -1, split_a = -1, split_b = -1; // split: src circle -> children (a first per arrow)
    int merge_a = -1, merge_b = -1, merge_to = -1;
};
EdgeCircles edge_circles(const Diagram& d, const Resolution& rv, const Resolution& rw, int crossing);

// merge monomial bits through an index map with Koszul sign; nullopt when two
// bits collide (the wedge vanishes)
std::optional<std::pair<Mono, int>> push_monomial(Mono m, const std::vector<int>& cmap);

} // namespace oddkh
