#include "oddkh/pfh.hpp"

#include "oddkh/moves.hpp"

#include <stdexcept>

namespace oddkh {

namespace {
[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }
}

ExtElt l_n(const ExtElt& x, int n) {
    if (x.ngen > n - 1) fail("l_n: generator index out of range");
    ExtElt out(n - 1);
    for (auto& [m, c] : x.terms) {
        int k = mono_len(m);
        int sign = ((k * (n - 1)) % 2) ? -1 : 1;
        out.add_term(m, sign * c);
    }
    return out;
}

PfhResult pfh_elementary_map(PfhMove kind, const UnlinkState& s, const FormalUnit& c) {
    PfhResult r;
    r.unit = NovikovElt::one(c.value.cutoff);
    switch (kind) {
        case PfhMove::Birth: {
            // U_n -> U_{n+1}: v-monomials persist (generator set grows)
            ExtElt out(s.n);
            for (auto& [m, coef] : s.elt.terms) out.add_term(m, coef);
            r.state = {s.n + 1, out};
            if (!c.trivial) r.unit = c.value;
            return r;
        }
        case PfhMove::Split: {
            // U_n -> U_{n+1}: x -> v_n ^ x
            ExtElt lifted(s.n);
            for (auto& [m, coef] : s.elt.terms) lifted.add_term(m, coef);
            r.state = {s.n + 1, wedge(ExtElt::generator(s.n, s.n - 1), lifted)};
            return r;
        }
        case PfhMove::Merge: {
            // U_{n+1} -> U_n: kill monomials containing v_n, restrict the rest
            if (s.n < 2) fail("pfh merge: need at least two components");
            ExtElt out(s.n - 2);
            Mono top = Mono(1) << (s.n - 2);
            for (auto& [m, coef] : s.elt.terms)
                if (!(m & top)) out.add_term(m, coef);
            r.state = {s.n - 1, out};
            return r;
        }
        case PfhMove::Death: {
            // U_{n+1} -> U_n: v_n ^ x -> x, x -> 0
            if (s.n < 2) fail("pfh death: need at least two components");
            r.state = {s.n - 1, contract(s.elt, s.n - 2)};
            if (!c.trivial) r.unit = c.value;
            return r;
        }
    }
    fail("unreachable");
}

UnlinkState pfh_permute(const UnlinkState& s, const std::vector<int>& pi) {
    int n = s.n;
    if (int(pi.size()) != n) fail("pfh_permute: permutation size mismatch");
    // v_i = e_i - e_{n-1} (0-indexed); image v_i -> e_{pi(i)} - e_{pi(n-1)}
    //   = v'_{pi(i)} - v'_{pi(n-1)}  with v'_{n-1} := 0
    auto image = [&](int i) {
        ExtElt e(n - 1);
        if (pi[i] != n - 1) e.add_term(Mono(1) << pi[i], 1);
        if (pi[n - 1] != n - 1) e.add_term(Mono(1) << pi[n - 1], -1);
        return e;
    };
    ExtElt out(n - 1);
    for (auto& [m, coef] : s.elt.terms) {
        ExtElt term = ExtElt::unit(n - 1);
        for (int i = n - 2; i >= 0; --i)
            if (m & (Mono(1) << i)) term = wedge(image(i), term);
        term *= coef;
        out += term;
    }
    return {n, out};
}

namespace {

// reduced matrix of an odd Khovanov cobordism map between crossingless
// unlinks, columns indexed by the reduced basis of the source
std::vector<std::map<Mono, Int>> reduced_matrix(const ChainMap& f, const Complex& rs, const Complex& rt) {
    // rs, rt: reduced complexes of the same diagrams (single vertex each)
    std::vector<std::map<Mono, Int>> cols;
    int cw = rt.res[0].count();
    Mono basebit = Mono(1) << (cw - 1);
    for (Mono S = 0; S < (Mono(1) << rs.slots[0]); ++S) {
        std::map<Mono, Int> img;
        for (auto& [sm, sc] : rs.red_basis[0][S])
            for (auto& [t, c] : f.apply_gen(std::uint64_t(sm))) img[Mono(t)] += sc * c;
        std::map<Mono, Int> out;
        for (auto& [tm, c] : img)
            if (c != 0 && !(tm & basebit)) out[tm] = c;
        cols.push_back(std::move(out));
    }
    return cols;
}

Diagram unlink(int n) {
    std::string pd = "circles=" + std::to_string(n);
    return parse_pd(n == 0 ? "" : pd);
}

} // namespace

CompareReport compare_with_kh(PfhMove kind, int n, const FormalUnit& c) {
    CompareReport rep;
    // frames; the standard cobordisms act next to the basepoint circle: the
    // birth inserts its circle just before the last component, the death
    // removes the second-to-last, splits and merges act on the last ones
    Diagram src = unlink(n);
    ComplexPtr cs = build_complex(src);
    ChainMap odd = [&]() -> ChainMap {
        switch (kind) {
            case PfhMove::Birth: {
                MoveResult b = apply_birth(cs);
                // swap the newborn arc with the old basepoint arc so the new
                // circle sits at position n
                std::map<int, int> swap_last{{n, n + 1}, {n + 1, n}};
                Rewrite rl = relabel(b.frame, swap_last);
                auto t2 = build_complex(rl.diagram);
                return compose({b.map, relabel_map(b.target, t2, rl)});
            }
            case PfhMove::Split: {
                MoveResult s = apply_saddle(cs, src.free_loops.back(), src.free_loops.back(), +1);
                return s.map;
            }
            case PfhMove::Merge: {
                if (n < 2) fail("compare_with_kh: merge needs two components");
                MoveResult s = apply_saddle(cs, src.free_loops[n - 2], src.free_loops[n - 1], +1);
                return s.map;
            }
            case PfhMove::Death: {
                if (n < 2) fail("compare_with_kh: death needs two components");
                MoveResult s = apply_death(cs, src.free_loops[n - 2]);
                return s.map;
            }
        }
        fail("unreachable");
    }();

    auto rs = build_complex(src, /*reduced=*/true);
    auto rt = build_complex(odd.tgt->diag, /*reduced=*/true);
    auto cols = reduced_matrix(odd, *rs, *rt);

    // pfh side on the same basis: reduced basis element b_S corresponds to
    // the v-monomial with the same mask
    int m_out = (kind == PfhMove::Birth || kind == PfhMove::Split) ? n + 1 : n - 1;
    std::vector<std::map<Mono, Int>> pcols;
    NovikovElt unit_all = NovikovElt::one(c.value.cutoff);
    for (Mono S = 0; S < (Mono(1) << std::max(n - 1, 0)); ++S) {
        UnlinkState st{n, ExtElt::monomial(std::max(n - 1, 0), S)};
        PfhResult pr = pfh_elementary_map(kind, st, c);
        unit_all = pr.unit;
        std::map<Mono, Int> col;
        for (auto& [m, coef] : pr.state.elt.terms) col[m] = coef;
        pcols.push_back(std::move(col));
    }
    (void)m_out;

    // compare: pfh = lambda * odd for lambda in {+1, -1}; the formal factor
    // rides along separately as pr.unit
    bool eq = true, neg = true;
    for (size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] != pcols[j]) eq = false;
        std::map<Mono, Int> negd;
        for (auto& [m, coef] : pcols[j]) negd[m] = -coef;
        if (cols[j] != negd) neg = false;
    }
    if (!eq && !neg) {
        for (size_t j = 0; j < cols.size(); ++j)
            if (cols[j] != pcols[j]) {
                rep.message = "mismatch beyond unit at reduced generator mask " + std::to_string(j);
                break;
            }
        rep.ok = false;
        return rep;
    }
    rep.ok = true;
    rep.unit = eq ? unit_all : -unit_all;
    rep.message = "match";
    return rep;
}

} // namespace oddkh
