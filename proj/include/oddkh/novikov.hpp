#pragma once

#include "oddkh/ints.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace oddkh {

// Truncated Novikov ring element: sum of a_i u^{q_i} with rational exponents,
// terms with exponent >= cutoff dropped. The cutoff is part of the value and
// must match across binary operations.
struct NovikovElt {
    Rat cutoff = 64;
    std::map<Rat, Int> terms; // exponent -> nonzero coefficient, exponent < cutoff

    NovikovElt() = default;
    explicit NovikovElt(Rat q) : cutoff(std::move(q)) {}

    static NovikovElt zero(Rat q = 64) { return NovikovElt(std::move(q)); }
    static NovikovElt monomial(Rat e, Int c = 1, Rat q = 64) {
        NovikovElt n(std::move(q));
        n.add(std::move(e), c);
        return n;
    }
    static NovikovElt one(Rat q = 64) { return monomial(0, 1, std::move(q)); }

    bool is_zero() const { return terms.empty(); }
    bool is_one() const { return terms.size() == 1 && terms.begin()->first == 0 && terms.begin()->second == 1; }

    void add(Rat e, const Int& c) {
        if (c == 0 || e >= cutoff) return;
        auto it = terms.find(e);
        if (it == terms.end()) terms.emplace(std::move(e), c);
        else {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    NovikovElt& operator+=(const NovikovElt& o) {
        check(o);
        for (auto& [e, c] : o.terms) add(e, c);
        return *this;
    }
    NovikovElt& operator-=(const NovikovElt& o) {
        check(o);
        for (auto& [e, c] : o.terms) add(e, -c);
        return *this;
    }
    NovikovElt operator-() const {
        NovikovElt r(cutoff);
        for (auto& [e, c] : terms) r.terms[e] = -c;
        return r;
    }
    bool operator==(const NovikovElt& o) const { return cutoff == o.cutoff && terms == o.terms; }

    void check(const NovikovElt& o) const {
        if (cutoff != o.cutoff) throw std::invalid_argument("NovikovElt: cutoff mismatch");
    }

    std::string str() const {
        if (terms.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [e, c] : terms) {
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            first = false;
            Int ac = abs_int(c);
            if (ac != 1 || e == 0) os << ac;
            if (e != 0) {
                os << "u^";
                if (denominator(e) == 1) os << numerator(e);
                else os << "(" << e << ")";
            }
        }
        return os.str();
    }
};

inline NovikovElt operator+(NovikovElt a, const NovikovElt& b) { return a += b; }
inline NovikovElt operator-(NovikovElt a, const NovikovElt& b) { return a -= b; }

// Cauchy product with truncation.
NovikovElt novikov_mul(const NovikovElt& a, const NovikovElt& b);

// Inverse up to the cutoff. Requires the lowest-exponent coefficient to be
// +-1; with allow_shift the leading monomial u^{q0} is factored out first
// (so the result may carry negative exponents).
NovikovElt novikov_invert(const NovikovElt& a, bool allow_shift = false);

// The §2.3 element in its one-sided truncated form u + 3u^9 + 5u^25 + ...,
// or the constant 1 when the trivial model is selected.
NovikovElt novikov_c_element(Rat cutoff = 64, bool trivial = true);

} // namespace oddkh
