#pragma once

#include "oddkh/exterior.hpp"
#include "oddkh/novikov.hpp"

#include <string>
#include <vector>

namespace oddkh {

// Combinatorial shadow of plane Floer homology for standard unlinks: the
// state space of U_n is the exterior algebra on v_1, ..., v_{n-1}.
struct UnlinkState {
    int n = 1;   // component count
    ExtElt elt;  // over n-1 generators

    UnlinkState() : elt(0) {}
    UnlinkState(int comps, ExtElt e) : n(comps), elt(std::move(e)) {}
};

// the fixed isomorphism: x_{i_1} ^ ... ^ x_{i_k} -> (-1)^{k(n-1)} v_{i_1} ^ ...
ExtElt l_n(const ExtElt& x, int n);

// configurable unit c: constant 1 by default, or the one-sided truncation of
// the counting series u + 3u^9 + 5u^25 + ...
struct FormalUnit {
    NovikovElt value = NovikovElt::one();
    bool trivial = true;

    static FormalUnit one(Rat cutoff = 64) {
        FormalUnit f;
        f.value = NovikovElt::one(cutoff);
        return f;
    }
    static FormalUnit counting_series(Rat cutoff = 64) {
        FormalUnit f;
        f.value = novikov_c_element(cutoff, false);
        f.trivial = false;
        return f;
    }
};

enum class PfhMove { Birth, Death, Merge, Split };

struct PfhResult {
    UnlinkState state;
    NovikovElt unit; // the overall formal factor (c for births/deaths in series mode)
};

// the Prop 4.2 maps for the standard cobordisms acting on the last components
PfhResult pfh_elementary_map(PfhMove kind, const UnlinkState& s, const FormalUnit& c);

// relabeling of components by a permutation pi of {0, ..., n-1} (pushforward
// of the reduced functionals: v_i -> v_{pi(i)} - v_{pi(n-1)}, v_n := 0)
UnlinkState pfh_permute(const UnlinkState& s, const std::vector<int>& pi);

// comparison of the two models на a single standard elementary cobordism
// between crossingless unlinks U_n: the transported reduced odd Khovanov map
// must equal the pfh map up to a unit in {+-1, +-c}
struct CompareReport {
    bool ok = false;
    NovikovElt unit;
    std::string message;
};
CompareReport compare_with_kh(PfhMove kind, int n, const FormalUnit& c);

} // namespace oddkh
