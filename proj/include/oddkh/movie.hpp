#pragma once

#include "oddkh/chainmap.hpp"
#include "oddkh/moves.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oddkh {

struct MovieStep {
    enum Kind { Birth, Death, Saddle, R1Add, R1Remove, R2Add, R2Remove, R3, Relabel } kind;
    int a = 0, b = 0, c = 0; // arc or crossing ids per kind
    int sign = 1;            // kink sign or saddle arrow
    std::map<int, int> perm; // relabel
    int line = 0;
};

struct Movie {
    std::string name;
    Diagram start;
    std::vector<MovieStep> steps;
    std::optional<Int> expected;   // expect <int>
    std::optional<Diagram> oracle; // oracle <pd>: Goeritz determinant reference
};

Movie parse_movie(const std::string& text, const std::string& name = "movie");
Movie load_movie(const std::string& path);

// frame sequence without any chain-level work (validation/debugging)
std::vector<Diagram> movie_frames(const Movie& m);

// apply one move to the current complex
MoveResult movie_step(ComplexPtr cur, const MovieStep& s);

struct MovieEvaluation {
    std::vector<Diagram> frames;
    ComplexPtr first, last;
    std::vector<ChainMap> maps; // one per step
    int dq_total = 0;
};
MovieEvaluation evaluate_movie(const Movie& m);

// the 2-knot invariant of a popped movie (empty diagram to crossingless
// unknot): the composite's coefficient on the unit generator, in absolute
// value. Throws when the movie shape or the landing bigrading is wrong.
Int n_invariant(const Movie& m);

// closed-surface movies (empty to empty): the integer the composite
// multiplies 1 by
Int closed_surface_value(const Movie& m);

} // namespace oddkh
