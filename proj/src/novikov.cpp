#include "oddkh/novikov.hpp"

namespace oddkh {

NovikovElt novikov_mul(const NovikovElt& a, const NovikovElt& b) {
    a.check(b);
    NovikovElt r(a.cutoff);
    for (auto& [e1, c1] : a.terms)
        for (auto& [e2, c2] : b.terms) r.add(e1 + e2, c1 * c2);
    return r;
}

NovikovElt novikov_invert(const NovikovElt& a, bool allow_shift) {
    if (a.is_zero()) throw std::invalid_argument("novikov_invert: zero element");
    auto lead = a.terms.begin();
    Rat q0 = lead->first;
    Int c0 = lead->second;
    if (c0 != 1 && c0 != -1)
        throw std::invalid_argument("novikov_invert: leading coefficient " + c0.str() +
                                    " is not a unit over the integers");
    if (q0 != 0 && !allow_shift)
        throw std::invalid_argument("novikov_invert: leading exponent nonzero; enable monomial shift");

    // a = c0 u^{q0} (1 + t), inverse = c0 u^{-q0} (1 - t + t^2 - ...).
    // t has strictly positive exponents, so powers terminate. The series is
    // computed at cutoff + q0 so nothing valid is lost after the down-shift.
    Rat work_cutoff = a.cutoff + (q0 > 0 ? q0 : Rat(0));
    NovikovElt t(work_cutoff);
    for (auto it = std::next(a.terms.begin()); it != a.terms.end(); ++it)
        t.add(it->first - q0, c0 * it->second); // divide by c0 = multiply, c0^2 = 1

    NovikovElt series = NovikovElt::one(work_cutoff);
    NovikovElt power = NovikovElt::one(work_cutoff);
    int sign = -1;
    while (true) {
        power = novikov_mul(power, t);
        if (power.is_zero()) break;
        NovikovElt signed_power = sign > 0 ? power : -power;
        series += signed_power;
        sign = -sign;
    }

    // shift by u^{-q0}: only now can exponents be negative
    NovikovElt r(a.cutoff);
    for (auto& [e, c] : series.terms) {
        Rat shifted = e - q0;
        if (shifted < r.cutoff) r.terms[shifted] = c0 * c;
    }
    return r;
}

NovikovElt novikov_c_element(Rat cutoff, bool trivial) {
    if (trivial) return NovikovElt::one(std::move(cutoff));
    NovikovElt c(std::move(cutoff));
    for (Int k = 1;; k += 2) {
        Rat e(k * k);
        if (e >= c.cutoff) break;
        c.add(e, k);
    }
    return c;
}

} // namespace oddkh
