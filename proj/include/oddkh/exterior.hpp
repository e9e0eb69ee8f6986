#pragma once

#include "oddkh/ints.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace oddkh {

// Wedge monomials over an ordered generator set are bitmasks: bit i set
// means generator a_i occurs. The normal form is strictly increasing
// indices, so a mask determines the monomial; signs come from sorting.
using Mono = std::uint32_t;

constexpr int kMaxGenerators = 32;

inline int mono_len(Mono m) { return __builtin_popcount(m); }

// Koszul sign of merging two disjoint sorted monomials: (-1)^{#inversions}.
// Returns 0 if the masks share a generator.
inline int wedge_sign(Mono a, Mono b) {
    if (a & b) return 0;
    int inv = 0;
    for (Mono t = b; t; t &= t - 1) {
        int i = __builtin_ctz(t);
        inv += __builtin_popcount(a >> (i + 1));
    }
    return (inv & 1) ? -1 : 1;
}

// Sign of moving generator g to the front of monomial m (g must be in m).
inline int front_sign(Mono m, int g) {
    int below = __builtin_popcount(m & ((Mono(1) << g) - 1));
    return (below & 1) ? -1 : 1;
}

// An integer linear combination of wedge monomials in Lambda*(Z^ngen).
struct ExtElt {
    int ngen = 0;
    std::map<Mono, Int> terms; // nonzero coefficients only

    ExtElt() = default;
    explicit ExtElt(int n) : ngen(n) {}

    static ExtElt unit(int n) {
        ExtElt e(n);
        e.terms[0] = 1;
        return e;
    }
    static ExtElt generator(int n, int i) {
        ExtElt e(n);
        e.terms[Mono(1) << i] = 1;
        return e;
    }
    static ExtElt monomial(int n, Mono m, Int c = 1) {
        ExtElt e(n);
        if (c != 0) e.terms[m] = std::move(c);
        return e;
    }

    bool is_zero() const { return terms.empty(); }

    void add_term(Mono m, const Int& c) {
        if (c == 0) return;
        auto it = terms.find(m);
        if (it == terms.end()) {
            terms.emplace(m, c);
        } else {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    ExtElt& operator+=(const ExtElt& o) {
        if (ngen != o.ngen) throw std::invalid_argument("ExtElt: ambient mismatch");
        for (auto& [m, c] : o.terms) add_term(m, c);
        return *this;
    }
    ExtElt& operator-=(const ExtElt& o) {
        if (ngen != o.ngen) throw std::invalid_argument("ExtElt: ambient mismatch");
        for (auto& [m, c] : o.terms) add_term(m, -c);
        return *this;
    }
    ExtElt operator-() const {
        ExtElt r(ngen);
        for (auto& [m, c] : terms) r.terms[m] = -c;
        return r;
    }
    ExtElt& operator*=(const Int& k) {
        if (k == 0) {
            terms.clear();
            return *this;
        }
        for (auto& [m, c] : terms) c *= k;
        return *this;
    }

    bool operator==(const ExtElt& o) const { return ngen == o.ngen && terms == o.terms; }
};

inline ExtElt operator+(ExtElt a, const ExtElt& b) { return a += b; }
inline ExtElt operator-(ExtElt a, const ExtElt& b) { return a -= b; }
inline ExtElt operator*(const Int& k, ExtElt a) { return a *= k; }

// Bilinear wedge product with Koszul signs; squares of 1-forms vanish.
inline ExtElt wedge(const ExtElt& x, const ExtElt& y) {
    if (x.ngen != y.ngen) throw std::invalid_argument("wedge: ambient mismatch");
    ExtElt r(x.ngen);
    for (auto& [mx, cx] : x.terms)
        for (auto& [my, cy] : y.terms) {
            int s = wedge_sign(mx, my);
            if (s) r.add_term(mx | my, s * cx * cy);
        }
    return r;
}

// Contraction iota_g. Monomials without g die; g is moved to the front and
// stripped. The ambient shrinks by one and indices above g shift down.
inline ExtElt contract(const ExtElt& x, int g) {
    if (g < 0 || g >= x.ngen) throw std::invalid_argument("contract: invalid generator index");
    ExtElt r(x.ngen - 1);
    Mono low = (Mono(1) << g) - 1;
    for (auto& [m, c] : x.terms) {
        if (!(m & (Mono(1) << g))) continue;
        Mono stripped = m & ~(Mono(1) << g);
        Mono renum = (stripped & low) | ((stripped & ~low) >> 1);
        r.add_term(renum, front_sign(m, g) * c);
    }
    return r;
}

inline std::string mono_str(Mono m) {
    if (m == 0) return "1";
    std::string s;
    for (int i = 0; i < kMaxGenerators; ++i)
        if (m & (Mono(1) << i)) {
            if (!s.empty()) s += "^";
            s += "a" + std::to_string(i + 1);
        }
    return s;
}

} // namespace oddkh
