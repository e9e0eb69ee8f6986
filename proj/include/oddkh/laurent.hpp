#pragma once

#include "oddkh/ints.hpp"

#include <map>
#include <sstream>
#include <string>

namespace oddkh {

// Integer Laurent polynomial in q.
struct LaurentPoly {
    std::map<int, Int> coeffs; // exponent -> nonzero coefficient

    LaurentPoly() = default;
    static LaurentPoly monomial(int e, Int c = 1) {
        LaurentPoly p;
        if (c != 0) p.coeffs[e] = std::move(c);
        return p;
    }

    bool is_zero() const { return coeffs.empty(); }

    void add(int e, const Int& c) {
        if (c == 0) return;
        auto it = coeffs.find(e);
        if (it == coeffs.end()) coeffs.emplace(e, c);
        else {
            it->second += c;
            if (it->second == 0) coeffs.erase(it);
        }
    }

    LaurentPoly& operator+=(const LaurentPoly& o) {
        for (auto& [e, c] : o.coeffs) add(e, c);
        return *this;
    }
    LaurentPoly& operator-=(const LaurentPoly& o) {
        for (auto& [e, c] : o.coeffs) add(e, -c);
        return *this;
    }
    LaurentPoly operator*(const LaurentPoly& o) const {
        LaurentPoly r;
        for (auto& [e1, c1] : coeffs)
            for (auto& [e2, c2] : o.coeffs) r.add(e1 + e2, c1 * c2);
        return r;
    }
    bool operator==(const LaurentPoly& o) const { return coeffs == o.coeffs; }

    std::string str(const std::string& var = "q") const {
        if (coeffs.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        // descending exponents read better in tables
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
            Int c = it->second;
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            first = false;
            Int ac = abs_int(c);
            int e = it->first;
            if (ac != 1 || e == 0) os << ac;
            if (e != 0) {
                os << var;
                if (e != 1) os << "^" << e;
            }
        }
        return os.str();
    }
};

inline LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
inline LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }

} // namespace oddkh
