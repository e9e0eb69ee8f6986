#include "oddkh/movie.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oddkh {

namespace {

[[noreturn]] void fail(const std::string& m) { throw std::runtime_error(m); }
[[noreturn]] void fail_line(int line, const std::string& m) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + m);
}

std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

int to_int(const std::string& s, int line) {
    try {
        size_t pos = 0;
        std::string body = s;
        if (!body.empty() && body[0] == 'c') body = body.substr(1);
        int v = std::stoi(body, &pos);
        if (pos != body.size()) fail_line(line, "bad integer '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail_line(line, "bad integer '" + s + "'");
    } catch (const std::out_of_range&) {
        fail_line(line, "integer out of range '" + s + "'");
    }
}

} // namespace

Movie parse_movie(const std::string& text, const std::string& name) {
    Movie m;
    m.name = name;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    bool started = false;
    std::string pd_accum;
    bool reading_start = false;

    auto flush_start = [&] {
        if (reading_start) {
            m.start = parse_pd(pd_accum);
            reading_start = false;
            started = true;
        }
    };

    while (std::getline(is, raw)) {
        ++lineno;
        auto h = raw.find('#');
        std::string line = h == std::string::npos ? raw : raw.substr(0, h);
        auto tk = tokens(line);
        if (tk.empty()) continue;
        const std::string& verb = tk[0];

        if (verb == "start") {
            if (started || reading_start) fail_line(lineno, "duplicate start");
            reading_start = true;
            for (size_t i = 1; i < tk.size(); ++i) pd_accum += tk[i] + " ";
            continue;
        }
        if (reading_start && (verb.rfind("X(", 0) == 0 || verb.rfind("circles=", 0) == 0 || verb == "arrow")) {
            for (auto& t : tk) pd_accum += t + " ";
            continue;
        }
        flush_start();
        if (!started) fail_line(lineno, "movie must begin with start");

        MovieStep s;
        s.line = lineno;
        if (verb == "birth") {
            s.kind = MovieStep::Birth;
        } else if (verb == "death") {
            if (tk.size() < 2) fail_line(lineno, "death needs a circle arc id");
            s.kind = MovieStep::Death;
            size_t i = 1;
            if (tk[1] == "c") {
                if (tk.size() < 3) fail_line(lineno, "death needs a circle arc id");
                ++i;
            }
            s.a = to_int(tk[i], lineno);
        } else if (verb == "saddle") {
            if (tk.size() != 4) fail_line(lineno, "saddle needs two arcs and an arrow");
            s.kind = MovieStep::Saddle;
            s.a = to_int(tk[1], lineno);
            s.b = to_int(tk[2], lineno);
            if (tk[3] != "+" && tk[3] != "-") fail_line(lineno, "saddle arrow must be + or -");
            s.sign = tk[3] == "+" ? 1 : -1;
        } else if (verb == "r1+") {
            if (tk.size() != 3) fail_line(lineno, "r1+ needs an arc and a sign");
            s.kind = MovieStep::R1Add;
            s.a = to_int(tk[1], lineno);
            if (tk[2] != "+" && tk[2] != "-") fail_line(lineno, "r1+ sign must be + or -");
            s.sign = tk[2] == "+" ? 1 : -1;
        } else if (verb == "r1-") {
            if (tk.size() != 2) fail_line(lineno, "r1- needs a crossing id");
            s.kind = MovieStep::R1Remove;
            s.a = to_int(tk[1], lineno) - 1;
        } else if (verb == "r2+") {
            if (tk.size() != 3) fail_line(lineno, "r2+ needs two arc ids");
            s.kind = MovieStep::R2Add;
            s.a = to_int(tk[1], lineno);
            s.b = to_int(tk[2], lineno);
        } else if (verb == "r2-") {
            if (tk.size() != 3) fail_line(lineno, "r2- needs two crossing ids");
            s.kind = MovieStep::R2Remove;
            s.a = to_int(tk[1], lineno) - 1;
            s.b = to_int(tk[2], lineno) - 1;
        } else if (verb == "r3") {
            if (tk.size() != 4) fail_line(lineno, "r3 needs three crossing ids");
            s.kind = MovieStep::R3;
            s.a = to_int(tk[1], lineno) - 1;
            s.b = to_int(tk[2], lineno) - 1;
            s.c = to_int(tk[3], lineno) - 1;
        } else if (verb == "relabel") {
            s.kind = MovieStep::Relabel;
            for (size_t i = 1; i < tk.size(); ++i) {
                auto eq = tk[i].find('=');
                if (eq == std::string::npos) fail_line(lineno, "relabel entries look like a=b");
                s.perm[to_int(tk[i].substr(0, eq), lineno)] = to_int(tk[i].substr(eq + 1), lineno);
            }
        } else if (verb == "expect") {
            if (tk.size() != 2) fail_line(lineno, "expect needs an integer");
            m.expected = Int(to_int(tk[1], lineno));
            continue;
        } else if (verb == "oracle") {
            std::string pd;
            for (size_t i = 1; i < tk.size(); ++i) pd += tk[i] + " ";
            m.oracle = parse_pd(pd);
            continue;
        } else {
            fail_line(lineno, "unknown move '" + verb + "'");
        }
        m.steps.push_back(std::move(s));
    }
    flush_start();
    if (!started) {
        if (!reading_start) fail("movie must begin with start");
        m.start = parse_pd(pd_accum);
    }
    return m;
}

Movie load_movie(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open movie file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    return parse_movie(ss.str(), name);
}

namespace {

Rewrite step_rewrite(const Diagram& d, const MovieStep& s) {
    switch (s.kind) {
        case MovieStep::Birth: return birth(d);
        case MovieStep::Death: return death(d, s.a);
        case MovieStep::Saddle: return saddle_rewrite(d, s.a, s.b);
        case MovieStep::R1Add: return add_kink(d, s.a, s.sign);
        case MovieStep::R1Remove: return remove_kink(d, s.a);
        case MovieStep::R2Add: return r2_add(d, s.a, s.b);
        case MovieStep::R2Remove: return r2_remove(d, s.a, s.b);
        case MovieStep::R3: return r3_slide(d, s.a, s.b, s.c);
        case MovieStep::Relabel: return relabel(d, s.perm);
    }
    fail("unreachable");
}

} // namespace

std::vector<Diagram> movie_frames(const Movie& m) {
    std::vector<Diagram> frames{m.start};
    for (auto& s : m.steps) {
        try {
            frames.push_back(step_rewrite(frames.back(), s).diagram);
        } catch (const std::exception& e) {
            fail_line(s.line, e.what());
        }
    }
    return frames;
}

MoveResult movie_step(ComplexPtr cur, const MovieStep& s) {
    Rewrite rw = step_rewrite(cur->diag, s);
    MoveResult r;
    r.frame = rw.diagram;
    r.target = build_complex(rw.diagram);
    switch (s.kind) {
        case MovieStep::Birth: r.map = birth_map(cur, r.target, rw); break;
        case MovieStep::Death: r.map = death_map(cur, r.target, rw, s.a); break;
        case MovieStep::Saddle: r.map = saddle_map(cur, r.target, rw, s.a, s.b, s.sign); break;
        case MovieStep::R1Add: r.map = r1_add_map(cur, r.target, rw, s.sign); break;
        case MovieStep::R1Remove: r.map = r1_remove_map(cur, r.target, rw, s.a); break;
        case MovieStep::R2Add: r.map = r2_add_map(cur, r.target, rw); break;
        case MovieStep::R2Remove: r.map = r2_remove_map(cur, r.target, rw, s.a, s.b); break;
        case MovieStep::R3: r.map = r3_map(cur, r.target, s.a, s.b, s.c); break;
        case MovieStep::Relabel: r.map = relabel_map(cur, r.target, rw); break;
    }
    return r;
}

MovieEvaluation evaluate_movie(const Movie& m) {
    MovieEvaluation ev;
    ev.frames.push_back(m.start);
    ev.first = build_complex(m.start);
    ComplexPtr cur = ev.first;
    for (auto& s : m.steps) {
        MoveResult r = [&] {
            try {
                return movie_step(cur, s);
            } catch (const std::exception& e) {
                fail_line(s.line, e.what());
            }
        }();
        ev.frames.push_back(r.frame);
        ev.maps.push_back(r.map);
        ev.dq_total += r.map.dq;
        cur = r.target;
    }
    ev.last = cur;
    return ev;
}

Int n_invariant(const Movie& m) {
    if (!m.start.is_empty()) fail("popped movie must start at the empty diagram");
    ComplexPtr cur = build_complex(m.start);
    Vec vec{{0, Int(1)}};
    int dq = 0;
    for (auto& s : m.steps) {
        MoveResult r = [&] {
            try {
                return movie_step(cur, s);
            } catch (const std::exception& e) {
                fail_line(s.line, e.what());
            }
        }();
        vec = r.map.apply(vec);
        dq += r.map.dq;
        cur = r.target;
    }
    if (!cur->diag.is_crossingless_unknot()) fail("popped movie must end at the crossingless unknot");
    if (dq != 1) fail("composite lands outside the expected bigrading (degree " + std::to_string(dq) + ")");
    // C(unknot): generator 0 is the unit (q=+1), generator 1 is a (q=-1)
    Int n = 0, stray = 0;
    for (auto& [g, c] : vec) {
        if (g == 0) n = c;
        else stray = c;
    }
    if (stray != 0) fail("composite lands outside the expected bigrading (a-coefficient nonzero)");
    return n < 0 ? Int(-n) : n;
}

Int closed_surface_value(const Movie& m) {
    if (!m.start.is_empty()) fail("closed-surface movie must start at the empty diagram");
    ComplexPtr cur = build_complex(m.start);
    Vec vec{{0, Int(1)}};
    for (auto& s : m.steps) {
        MoveResult r = movie_step(cur, s);
        vec = r.map.apply(vec);
        cur = r.target;
    }
    if (!cur->diag.is_empty()) fail("closed-surface movie must end at the empty diagram");
    auto it = vec.find(0);
    return it == vec.end() ? Int(0) : it->second;
}

} // namespace oddkh
