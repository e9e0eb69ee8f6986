#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oddkh/pfh.hpp"

using namespace oddkh;

TEST_CASE("l_n fixed examples") {
    // k = 0: 1 -> 1 for any n
    CHECK(l_n(ExtElt::unit(1), 2) == ExtElt::unit(1));
    // n = 2: x1 -> -v1   (sign (-1)^{1*1})
    CHECK(l_n(ExtElt::generator(1, 0), 2) == ExtElt::monomial(1, 0b1, -1));
    // n = 3: x1 ^ x2 -> +v1 ^ v2   (sign (-1)^{2*2})
    CHECK(l_n(ExtElt::monomial(2, 0b11), 3) == ExtElt::monomial(2, 0b11, 1));
}

TEST_CASE("l_n is an isomorphism (involution up to sign structure)") {
    for (int n = 2; n <= 5; ++n) {
        int g = n - 1;
        for (Mono m = 0; m < (Mono(1) << g); ++m) {
            auto x = ExtElt::monomial(g, m, 3);
            auto y = l_n(l_n(x, n), n);
            // applying twice multiplies by (-1)^{2k(n-1)} = +1
            CHECK(y == x);
        }
    }
}

TEST_CASE("prop 4.2 maps on the standard unlinks") {
    FormalUnit one = FormalUnit::one();
    // merge: v-monomials without the top generator persist
    {
        UnlinkState s{3, ExtElt::monomial(2, 0b01)}; // v1 in U_3
        auto r = pfh_elementary_map(PfhMove::Merge, s, one);
        CHECK(r.state.n == 2);
        CHECK(r.state.elt == ExtElt::monomial(1, 0b1));
        UnlinkState t{3, ExtElt::monomial(2, 0b10)}; // v2 = top
        CHECK(pfh_elementary_map(PfhMove::Merge, t, one).state.elt.is_zero());
    }
    // death: v_n ^ x -> x, x -> 0
    {
        UnlinkState s{3, ExtElt::monomial(2, 0b11)}; // v1 ^ v2
        auto r = pfh_elementary_map(PfhMove::Death, s, one);
        CHECK(r.state.n == 2);
        CHECK(r.state.elt == ExtElt::monomial(1, 0b1, -1)); // Koszul: move v2 to front
        UnlinkState t{3, ExtElt::monomial(2, 0b01)};
        CHECK(pfh_elementary_map(PfhMove::Death, t, one).state.elt.is_zero());
    }
    // split: x -> v_n ^ x
    {
        UnlinkState s{2, ExtElt::monomial(1, 0b1)};
        auto r = pfh_elementary_map(PfhMove::Split, s, one);
        CHECK(r.state.n == 3);
        CHECK(r.state.elt == ExtElt::monomial(2, 0b11, -1)); // v2 ^ v1 = -v1 ^ v2
    }
}

TEST_CASE("death after birth and merge after split vanish in the model") {
    FormalUnit one = FormalUnit::one();
    UnlinkState s{1, ExtElt::unit(0)};
    auto born = pfh_elementary_map(PfhMove::Birth, s, one);
    auto dead = pfh_elementary_map(PfhMove::Death, born.state, one);
    CHECK(dead.state.elt.is_zero());

    auto split = pfh_elementary_map(PfhMove::Split, s, one);
    auto merged = pfh_elementary_map(PfhMove::Merge, split.state, one);
    CHECK(merged.state.elt.is_zero());
}

TEST_CASE("permutation action is involutive for transpositions") {
    UnlinkState s{3, ExtElt::monomial(2, 0b01, 2) + ExtElt::monomial(2, 0b10, 5)};
    std::vector<int> swap01{1, 0, 2};
    auto t = pfh_permute(pfh_permute(s, swap01), swap01);
    CHECK(t.elt == s.elt);
    std::vector<int> cyc{1, 2, 0};
    std::vector<int> inv{2, 0, 1};
    CHECK(pfh_permute(pfh_permute(s, cyc), inv).elt == s.elt);
}

TEST_CASE("odd TQFT and pfh model agree up to a unit, n <= 5") {
    FormalUnit one = FormalUnit::one();
    for (int n = 1; n <= 5; ++n) {
        for (PfhMove k : {PfhMove::Birth, PfhMove::Split}) {
            auto rep = compare_with_kh(k, n, one);
            CHECK(rep.ok);
            CHECK(abs_int(rep.unit.terms.begin()->second) == 1);
        }
        if (n >= 2)
            for (PfhMove k : {PfhMove::Merge, PfhMove::Death}) {
                auto rep = compare_with_kh(k, n, one);
                CHECK(rep.ok);
            }
    }
}

TEST_CASE("comparison with the counting-series unit") {
    FormalUnit c = FormalUnit::counting_series();
    auto rep = compare_with_kh(PfhMove::Birth, 2, c);
    CHECK(rep.ok);
    // the unit carried by the birth is +-c
    NovikovElt abs_unit = rep.unit;
    if (abs_unit.terms.begin()->second < 0) abs_unit = -abs_unit;
    CHECK(abs_unit == c.value);
}
