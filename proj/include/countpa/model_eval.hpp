#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "countpa/formula.hpp"
#include "countpa/ints.hpp"

namespace countpa {

/// Exact counting result over an infinite domain.
struct CountValue {
    bool infinite = false;
    Int value = 0;

    static CountValue finite(Int n) { return CountValue{false, std::move(n)}; }
    static CountValue inf() { return CountValue{true, 0}; }
    bool operator==(const CountValue&) const = default;
};

/// Finite structure over the universe [0..N] with named relation tables and
/// computed built-in predicates. The ternary times relation is bounded: a
/// triple belongs to it only when the true product lies in the universe.
struct FiniteStructure {
    long long universe_size = 0;  // N; universe is {0, ..., N}
    std::map<std::string, std::set<std::vector<long long>>> relations;
    bool has_lt = false;
    bool has_plus = false;
    bool has_times = false;
    bool has_bit = false;
    bool has_squares = false;

    static FiniteStructure segment(long long n, bool lt = true, bool plus = true,
                                   bool times = false, bool bit = false, bool squares = false) {
        if (n < 1) throw InvalidParams("universe size must be >= 1");
        FiniteStructure s;
        s.universe_size = n;
        s.has_lt = lt;
        s.has_plus = plus;
        s.has_times = times;
        s.has_bit = bit;
        s.has_squares = squares;
        return s;
    }

    /// Word model: positions 0..len-1, a unary letter predicate Q_<letter>
    /// per alphabet symbol, with the position order built in.
    static FiniteStructure word(const std::string& w) {
        if (w.empty()) throw InvalidParams("word must be nonempty");
        FiniteStructure s;
        s.universe_size = static_cast<long long>(w.size()) - 1;
        s.has_lt = true;
        for (long long i = 0; i < static_cast<long long>(w.size()); ++i)
            s.relations[std::string("Q_") + w[static_cast<size_t>(i)]].insert({i});
        return s;
    }

    static FiniteStructure graph(long long n,
                                 const std::vector<std::pair<long long, long long>>& edges,
                                 bool plus = true) {
        FiniteStructure s;
        s.universe_size = n;
        s.has_lt = true;
        s.has_plus = plus;
        auto& table = s.relations["E"];
        for (const auto& [u, v] : edges) {
            if (u < 0 || u > n || v < 0 || v > n)
                throw InvalidParams("edge endpoint outside the universe");
            table.insert({u, v});
        }
        return s;
    }

    FiniteStructure& with_unary(const std::string& name, const std::set<long long>& members) {
        auto& table = relations[name];
        for (long long m : members) {
            if (m < 0 || m > universe_size) throw InvalidParams("predicate member out of range");
            table.insert({m});
        }
        return *this;
    }

    bool in_universe(const Int& v) const { return v >= 0 && v <= universe_size; }

    bool holds(const std::string& name, const std::vector<Int>& args) const {
        for (const auto& a : args)
            if (!in_universe(a)) return false;
        if (name == "plus" && has_plus) {
            return args.size() == 3 && args[0] + args[1] == args[2];
        }
        if (name == "times" && has_times) {
            return args.size() == 3 && args[0] * args[1] == args[2];
        }
        if (name == "bit" && has_bit) {
            if (args.size() != 2) return false;
            Int shifted = args[0] >> static_cast<unsigned>(args[1].convert_to<long long>());
            return (shifted & 1) == 1;
        }
        if (name == "squares" && has_squares) {
            if (args.size() != 1) return false;
            Int r = boost::multiprecision::sqrt(args[0]);
            return r * r == args[0];
        }
        auto it = relations.find(name);
        if (it == relations.end()) throw UnknownRelation("unknown relation symbol: " + name);
        std::vector<long long> key;
        key.reserve(args.size());
        for (const auto& a : args) key.push_back(a.convert_to<long long>());
        return it->second.count(key) != 0;
    }
};

namespace detail {

inline Int env_value(const Assignment& env, const Var& v) {
    auto it = env.find(v);
    if (it == env.end()) throw Error("unassigned variable: " + v);
    return it->second;
}

inline bool atom_truth(const Atom& a, const Assignment& env) {
    return a.evaluate([&](const Var& v) { return env_value(env, v); });
}

/// Candidate witnesses for an existential variable, derived from conjuncts
/// that pin it down. `unsat` means some conjunct cannot be satisfied at all.
struct Candidates {
    bool informative = false;
    bool unsat = false;
    std::vector<Int> values;

    static Candidates none() { return {}; }
    static Candidates impossible() { return {true, true, {}}; }
    static Candidates of(std::vector<Int> vs) { return {true, false, std::move(vs)}; }
};

inline bool term_evaluable(const LinearTerm& t, const Var& skip, const Assignment& env) {
    for (const auto& [v, c] : t.coeffs())
        if (v != skip && !env.count(v)) return false;
    return true;
}

inline Int eval_without(const LinearTerm& t, const Var& skip, const Assignment& env) {
    Int acc = t.constant();
    for (const auto& [v, c] : t.coeffs())
        if (v != skip) acc += c * env_value(env, v);
    return acc;
}

/// Solve a single conjunct for `v` when it functionally determines it:
/// linear equations with unit-solvable coefficient, and the plus / times
/// relations with exactly one open argument.
inline Candidates solve_conjunct(const Atom& a, const Var& v, const Assignment& env) {
    if (a.kind() == AtomKind::Eq) {
        if (!a.lhs().mentions(v) && !a.rhs().mentions(v)) return Candidates::none();
        if (!term_evaluable(a.lhs(), v, env) || !term_evaluable(a.rhs(), v, env))
            return Candidates::none();
        Int c = a.lhs().coeff(v) - a.rhs().coeff(v);
        if (c == 0) return Candidates::none();
        Int e = eval_without(a.rhs(), v, env) - eval_without(a.lhs(), v, env);
        if (e % c != 0) return Candidates::impossible();
        return Candidates::of({e / c});
    }
    if (a.kind() == AtomKind::Relation && (a.relation_name() == "plus" || a.relation_name() == "times") &&
        a.args().size() == 3) {
        int open = -1;
        for (int i = 0; i < 3; ++i) {
            if (a.args()[static_cast<size_t>(i)].mentions(v)) {
                if (open != -1) return Candidates::none();
                if (a.args()[static_cast<size_t>(i)].single_variable() != v)
                    return Candidates::none();
                open = i;
            }
        }
        if (open == -1) return Candidates::none();
        for (int i = 0; i < 3; ++i)
            if (i != open && !term_evaluable(a.args()[static_cast<size_t>(i)], v, env))
                return Candidates::none();
        Int x[3];
        for (int i = 0; i < 3; ++i)
            if (i != open) x[i] = eval_without(a.args()[static_cast<size_t>(i)], v, env);
        if (a.relation_name() == "plus") {
            if (open == 2) return Candidates::of({x[0] + x[1]});
            Int rest = open == 0 ? x[1] : x[0];
            return Candidates::of({x[2] - rest});
        }
        // times
        if (open == 2) return Candidates::of({x[0] * x[1]});
        Int other = open == 0 ? x[1] : x[0];
        if (other == 0) return Candidates::none();  // v unconstrained when the product is 0
        if (x[2] % other != 0) return Candidates::impossible();
        return Candidates::of({x[2] / other});
    }
    return Candidates::none();
}

inline void flatten_conjuncts(const Formula& f, std::vector<const Formula*>& out) {
    if (f.kind() == NodeKind::And) {
        for (const auto& c : f.children()) flatten_conjuncts(c, out);
    } else {
        out.push_back(&f);
    }
}

constexpr size_t kCandidateCap = 64;
constexpr int kSolveDepth = 8;

inline Candidates witness_candidates(const Formula& body, const Var& v, Assignment& env,
                                     int depth = kSolveDepth);

/// Candidates for v from a formula treated as one conjunct: an atom that
/// solves v, a disjunction all of whose branches solve v, or an existential
/// whose own variable can be solved first.
inline Candidates conjunct_candidates(const Formula& f, const Var& v, Assignment& env,
                                      int depth) {
    if (f.kind() == NodeKind::Atom) return solve_conjunct(f.as_atom(), v, env);
    if (f.kind() == NodeKind::Or) {
        std::vector<Int> merged;
        for (const auto& branch : f.children()) {
            std::vector<const Formula*> parts;
            flatten_conjuncts(branch, parts);
            Candidates got = Candidates::none();
            for (const Formula* p : parts) {
                Candidates c = conjunct_candidates(*p, v, env, depth);
                if (c.unsat) { got = c; break; }
                if (c.informative && !got.informative) got = c;
            }
            if (!got.informative) return Candidates::none();
            if (!got.unsat)
                merged.insert(merged.end(), got.values.begin(), got.values.end());
            if (merged.size() > kCandidateCap) return Candidates::none();
        }
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        return Candidates::of(std::move(merged));
    }
    if (f.kind() == NodeKind::Exists && depth > 0) {
        // Solve the inner witness first, then look for v under each solution.
        const Var& s = f.var();
        if (s == v) return Candidates::none();
        Candidates inner = witness_candidates(f.body(), s, env, depth - 1);
        if (!inner.informative) return Candidates::none();
        if (inner.unsat) return Candidates::impossible();
        auto saved = env.find(s) != env.end() ? std::optional<Int>(env[s]) : std::nullopt;
        std::vector<Int> merged;
        bool ok = true;
        for (const Int& val : inner.values) {
            env[s] = val;
            Candidates c = witness_candidates(f.body(), v, env, depth - 1);
            if (!c.informative) { ok = false; break; }
            if (!c.unsat) merged.insert(merged.end(), c.values.begin(), c.values.end());
            if (merged.size() > kCandidateCap) { ok = false; break; }
        }
        if (saved)
            env[s] = *saved;
        else
            env.erase(s);
        if (!ok) return Candidates::none();
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        return Candidates::of(std::move(merged));
    }
    return Candidates::none();
}

inline Candidates witness_candidates(const Formula& body, const Var& v, Assignment& env,
                                     int depth) {
    std::vector<const Formula*> conjuncts;
    flatten_conjuncts(body, conjuncts);
    for (const Formula* c : conjuncts) {
        Candidates got = conjunct_candidates(*c, v, env, depth);
        if (got.informative) return got;
    }
    return Candidates::none();
}

}  // namespace detail

namespace detail {

inline bool eval_finite_rec(const FiniteStructure& s, const Formula& f, Assignment& env);

inline bool eval_finite_quantified(const FiniteStructure& s, const Formula& body, const Var& v,
                                   Assignment& env, bool existential) {
    auto saved = env.find(v) != env.end() ? std::optional<Int>(env[v]) : std::nullopt;
    auto restore = [&]() {
        if (saved)
            env[v] = *saved;
        else
            env.erase(v);
    };
    Candidates cands = existential ? witness_candidates(body, v, env) : Candidates::none();
    bool result = !existential;
    if (cands.informative) {
        if (!cands.unsat) {
            for (const Int& val : cands.values) {
                if (!s.in_universe(val)) continue;
                env[v] = val;
                if (eval_finite_rec(s, body, env)) { result = true; break; }
            }
        }
        if (cands.unsat) result = false;
    } else {
        for (long long val = 0; val <= s.universe_size; ++val) {
            env[v] = Int(val);
            bool b = eval_finite_rec(s, body, env);
            if (existential && b) { result = true; break; }
            if (!existential && !b) { result = false; break; }
        }
    }
    restore();
    return result;
}

inline bool eval_finite_rec(const FiniteStructure& s, const Formula& f, Assignment& env) {
    switch (f.kind()) {
        case NodeKind::Atom: {
            const Atom& a = f.as_atom();
            if (a.kind() == AtomKind::Relation) {
                std::vector<Int> args;
                args.reserve(a.args().size());
                for (const auto& t : a.args())
                    args.push_back(t.evaluate([&](const Var& v) { return env_value(env, v); }));
                return s.holds(a.relation_name(), args);
            }
            return atom_truth(a, env);
        }
        case NodeKind::Not: return !eval_finite_rec(s, f.child(0), env);
        case NodeKind::And:
            for (const auto& c : f.children())
                if (!eval_finite_rec(s, c, env)) return false;
            return true;
        case NodeKind::Or:
            for (const auto& c : f.children())
                if (eval_finite_rec(s, c, env)) return true;
            return false;
        case NodeKind::Implies:
            return !eval_finite_rec(s, f.child(0), env) || eval_finite_rec(s, f.child(1), env);
        case NodeKind::Iff:
            return eval_finite_rec(s, f.child(0), env) == eval_finite_rec(s, f.child(1), env);
        case NodeKind::Exists:
            return eval_finite_quantified(s, f.body(), f.var(), env, true);
        case NodeKind::Forall:
            return eval_finite_quantified(s, f.body(), f.var(), env, false);
        case NodeKind::CountExists:
        case NodeKind::Majority: {
            const auto& ys = f.bound_vars();
            size_t k = ys.size();
            std::vector<std::optional<Int>> saved(k);
            for (size_t i = 0; i < k; ++i) {
                auto it = env.find(ys[i]);
                if (it != env.end()) saved[i] = it->second;
            }
            Int count = 0;
            std::vector<long long> tuple(k, 0);
            while (true) {
                for (size_t i = 0; i < k; ++i) env[ys[i]] = Int(tuple[i]);
                if (eval_finite_rec(s, f.body(), env)) ++count;
                size_t pos = k;
                while (pos > 0) {
                    --pos;
                    if (tuple[pos] < s.universe_size) {
                        ++tuple[pos];
                        std::fill(tuple.begin() + static_cast<long>(pos) + 1, tuple.end(), 0);
                        break;
                    }
                    if (pos == 0) { pos = k + 1; break; }
                }
                if (pos == k + 1) break;
            }
            for (size_t i = 0; i < k; ++i) {
                if (saved[i])
                    env[ys[i]] = *saved[i];
                else
                    env.erase(ys[i]);
            }
            Int base = Int(s.universe_size) + 1;
            if (f.kind() == NodeKind::Majority) {
                Int total = 1;
                for (size_t i = 0; i < k; ++i) total *= base;
                return 2 * count > total;
            }
            // The count variables hold the base-(N+1) representation of the
            // number of satisfying tuples.
            Int represented = 0;
            for (const auto& x : f.count_vars())
                represented = represented * base + env_value(env, x);
            return represented == count;
        }
    }
    return false;
}

}  // namespace detail

/// Exact first-order evaluation over a finite structure, with counting and
/// majority quantifiers.
inline bool eval_finite(const FiniteStructure& s, const Formula& f, const Assignment& a) {
    for (const auto& [v, val] : a) {
        if (!s.in_universe(val))
            throw OutOfUniverse("assignment of " + v + " lies outside the universe");
    }
    Assignment env = a;
    return detail::eval_finite_rec(s, f, env);
}

namespace detail {

inline bool formula_is_presb_matrix(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Atom: return f.as_atom().is_presb();
        case NodeKind::Not:
        case NodeKind::And:
        case NodeKind::Or:
            for (const auto& c : f.children())
                if (!formula_is_presb_matrix(c)) return false;
            return true;
        case NodeKind::Implies:
        case NodeKind::Iff:
            return formula_is_presb_matrix(f.child(0)) && formula_is_presb_matrix(f.child(1));
        default: return false;
    }
}

inline void collect_atoms(const Formula& f, std::vector<const Atom*>& out) {
    if (f.kind() == NodeKind::Atom) {
        out.push_back(&f.as_atom());
        return;
    }
    for (const auto& c : f.children()) collect_atoms(c, out);
}

}  // namespace detail

/// Exact number of integers y satisfying a quantifier-free matrix of
/// arithmetic atoms, under the given parameter assignment. Every atom is a
/// linear constraint in y, so beyond a computable threshold its truth is
/// periodic; the count is read off a bounded scan.
inline CountValue oracle_count_int(const Formula& matrix, const Var& y, const Assignment& params) {
    if (!detail::formula_is_presb_matrix(matrix))
        throw UnsupportedNode("counting oracle needs a quantifier-free arithmetic matrix");
    std::vector<const Atom*> atoms;
    detail::collect_atoms(matrix, atoms);

    Int threshold = 1;
    Int period = 1;
    for (const Atom* a : atoms) {
        Int c = a->lhs().coeff(y) - a->rhs().coeff(y);
        if (a->kind() == AtomKind::CongMod) {
            period = lcm_int(period, a->modulus());
            continue;
        }
        if (c == 0) continue;
        Int e = detail::eval_without(a->rhs(), y, params) - detail::eval_without(a->lhs(), y, params);
        Int bound = ceil_div(abs(e), abs(c));
        threshold = std::max(threshold, Int(bound + 1));
    }

    Assignment env = params;
    auto truth_at = [&](const Int& val) {
        env[y] = val;
        std::function<bool(const Formula&)> rec = [&](const Formula& f) -> bool {
            switch (f.kind()) {
                case NodeKind::Atom: return detail::atom_truth(f.as_atom(), env);
                case NodeKind::Not: return !rec(f.child(0));
                case NodeKind::And:
                    for (const auto& c : f.children())
                        if (!rec(c)) return false;
                    return true;
                case NodeKind::Or:
                    for (const auto& c : f.children())
                        if (rec(c)) return true;
                    return false;
                case NodeKind::Implies: return !rec(f.child(0)) || rec(f.child(1));
                case NodeKind::Iff: return rec(f.child(0)) == rec(f.child(1));
                default: throw UnsupportedNode("quantifier inside counting matrix");
            }
        };
        return rec(matrix);
    };

    // Beyond +-threshold every atom is constant or periodic with the period,
    // so a single period's worth of samples decides unboundedness.
    for (Int v = threshold + 1; v <= threshold + period; ++v)
        if (truth_at(v)) return CountValue::inf();
    for (Int v = -threshold - period; v < -threshold; ++v)
        if (truth_at(v)) return CountValue::inf();

    Int count = 0;
    for (Int v = -threshold; v <= threshold; ++v)
        if (truth_at(v)) ++count;
    return CountValue::finite(count);
}

enum class Verdict { True, False, Inconclusive };

namespace detail {

struct IntVerdict {
    bool value = false;
    bool exact = true;
};

inline bool is_counting_free(const Formula& f) {
    if (f.kind() == NodeKind::CountExists || f.kind() == NodeKind::Majority) return false;
    for (const auto& c : f.children())
        if (!is_counting_free(c)) return false;
    return true;
}

inline bool is_quantifier_free(const Formula& f) {
    if (f.is_quantifier()) return false;
    for (const auto& c : f.children())
        if (!is_quantifier_free(c)) return false;
    return true;
}

struct IntBounds {
    std::optional<Int> lower, upper;      // inclusive
    std::vector<std::pair<Int, Int>> residue_filters;  // (modulus, wanted residue) on v itself
    std::optional<std::vector<Int>> exact;
    bool unsat = false;
};

/// Bounds on v from one atom that must hold.
inline void atom_bounds(const Atom& a, bool negated, const Var& v, const Assignment& env,
                        IntBounds& out) {
    if (a.kind() == AtomKind::Relation) return;
    if (!a.lhs().mentions(v) && !a.rhs().mentions(v)) return;
    if (!term_evaluable(a.lhs(), v, env) || !term_evaluable(a.rhs(), v, env)) return;
    Int c = a.lhs().coeff(v) - a.rhs().coeff(v);
    if (c == 0) return;
    Int e = eval_without(a.rhs(), v, env) - eval_without(a.lhs(), v, env);
    switch (a.kind()) {
        case AtomKind::Eq: {
            if (negated) return;  // a disequality does not bound v
            if (e % c != 0) {
                out.unsat = true;
                return;
            }
            Int val = e / c;
            if (out.exact) {
                std::vector<Int> merged;
                for (const auto& x : *out.exact)
                    if (x == val) merged.push_back(x);
                out.exact = merged;
            } else {
                out.exact = std::vector<Int>{val};
            }
            return;
        }
        case AtomKind::Lt: {
            // c*v < e, negated: c*v >= e
            if (!negated) {
                if (c > 0) {
                    Int ub = ceil_div(e, c) - 1;  // v <= ceil(e/c)-1  iff  v < e/c
                    out.upper = out.upper ? std::min(*out.upper, ub) : ub;
                } else {
                    Int lb = floor_div(e, c) + 1;  // v > e/c
                    out.lower = out.lower ? std::max(*out.lower, lb) : lb;
                }
            } else {
                if (c > 0) {
                    Int lb = ceil_div(e, c);  // v >= e/c
                    out.lower = out.lower ? std::max(*out.lower, lb) : lb;
                } else {
                    Int ub = floor_div(e, c);  // v <= e/c
                    out.upper = out.upper ? std::min(*out.upper, ub) : ub;
                }
            }
            return;
        }
        case AtomKind::CongMod: {
            if (negated) return;
            // c*v == e (mod n); filter candidates later
            if (abs(c) == 1) {
                Int n = a.modulus();
                Int want = mod_floor(c > 0 ? e : -e, n);
                out.residue_filters.emplace_back(n, want);
            }
            return;
        }
        default: return;
    }
}

inline void gather_bounds(const Formula& f, bool negated, const Var& v, const Assignment& env,
                          IntBounds& out);

/// Union of candidate sets across disjunction branches; informative only when
/// every branch is itself bounded.
inline std::optional<std::vector<Int>> branch_union(const std::vector<Formula>& branches,
                                                    bool negated, const Var& v,
                                                    const Assignment& env, const Int& cap) {
    std::vector<Int> merged;
    for (const auto& b : branches) {
        IntBounds bb;
        gather_bounds(b, negated, v, env, bb);
        if (bb.unsat) continue;
        std::vector<Int> vals;
        if (bb.exact) {
            vals = *bb.exact;
        } else if (bb.lower && bb.upper) {
            if (*bb.upper - *bb.lower > cap) return std::nullopt;
            for (Int x = *bb.lower; x <= *bb.upper; ++x) vals.push_back(x);
        } else {
            return std::nullopt;
        }
        for (const auto& [n, r] : bb.residue_filters) {
            std::vector<Int> kept;
            for (const auto& x : vals)
                if (mod_floor(x, n) == r) kept.push_back(x);
            vals = kept;
        }
        merged.insert(merged.end(), vals.begin(), vals.end());
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

inline void gather_bounds(const Formula& f, bool negated, const Var& v, const Assignment& env,
                          IntBounds& out) {
    switch (f.kind()) {
        case NodeKind::Atom: atom_bounds(f.as_atom(), negated, v, env, out); return;
        case NodeKind::Not: gather_bounds(f.child(0), !negated, v, env, out); return;
        case NodeKind::And:
            if (!negated) {
                for (const auto& c : f.children()) gather_bounds(c, false, v, env, out);
            } else {
                auto u = branch_union(f.children(), true, v, env, Int(4096));
                if (u) {
                    if (out.exact) {
                        std::vector<Int> merged;
                        std::set<Int> allowed(u->begin(), u->end());
                        for (const auto& x : *out.exact)
                            if (allowed.count(x)) merged.push_back(x);
                        out.exact = merged;
                    } else {
                        out.exact = *u;
                    }
                }
            }
            return;
        case NodeKind::Or:
            if (negated) {
                for (const auto& c : f.children()) gather_bounds(c, true, v, env, out);
            } else {
                auto u = branch_union(f.children(), false, v, env, Int(4096));
                if (u) {
                    if (out.exact) {
                        std::vector<Int> merged;
                        std::set<Int> allowed(u->begin(), u->end());
                        for (const auto& x : *out.exact)
                            if (allowed.count(x)) merged.push_back(x);
                        out.exact = merged;
                    } else {
                        out.exact = *u;
                    }
                }
            }
            return;
        case NodeKind::Implies:
            // (A -> B) == (!A | B)
            if (negated) {
                gather_bounds(f.child(0), false, v, env, out);
                gather_bounds(f.child(1), true, v, env, out);
            } else {
                auto u = branch_union({Formula::negation(f.child(0)), f.child(1)}, false, v, env,
                                      Int(4096));
                if (u && !out.exact) out.exact = *u;
            }
            return;
        default: return;  // quantified conjuncts contribute nothing
    }
}

/// Concrete candidate list for an existential variable over the integers,
/// when the body syntactically bounds it; nullopt means unbounded.
inline std::optional<std::vector<Int>> int_candidates(const Formula& body, const Var& v,
                                                      const Assignment& env) {
    IntBounds b;
    gather_bounds(body, false, v, env, b);
    if (b.unsat) return std::vector<Int>{};
    std::vector<Int> vals;
    if (b.exact) {
        vals = *b.exact;
        if (b.lower || b.upper) {
            std::vector<Int> kept;
            for (const auto& x : vals) {
                if (b.lower && x < *b.lower) continue;
                if (b.upper && x > *b.upper) continue;
                kept.push_back(x);
            }
            vals = kept;
        }
    } else if (b.lower && b.upper) {
        if (*b.upper - *b.lower > 4096) return std::nullopt;
        for (Int x = *b.lower; x <= *b.upper; ++x) vals.push_back(x);
    } else {
        return std::nullopt;
    }
    for (const auto& [n, r] : b.residue_filters) {
        std::vector<Int> kept;
        for (const auto& x : vals)
            if (mod_floor(x, n) == r) kept.push_back(x);
        vals = kept;
    }
    return vals;
}

inline IntVerdict eval_int_rec(const Formula& f, Assignment& env, long long window);

inline IntVerdict eval_int_quantified(const Formula& body, const Var& v, Assignment& env,
                                      long long window, bool existential) {
    auto saved = env.find(v) != env.end() ? std::optional<Int>(env[v]) : std::nullopt;
    auto restore = [&]() {
        if (saved)
            env[v] = *saved;
        else
            env.erase(v);
    };

    Formula search_body = existential ? body : Formula::negation(body);
    auto cands = int_candidates(search_body, v, env);

    bool found = false;
    bool all_exact = true;
    auto try_value = [&](const Int& val) {
        env[v] = val;
        IntVerdict r = eval_int_rec(search_body, env, window);
        if (!r.exact) all_exact = false;
        if (r.value && r.exact) {
            found = true;
            return true;
        }
        if (r.value) found = true;
        return false;
    };

    bool bounded = cands.has_value();
    if (bounded) {
        for (const auto& val : *cands)
            if (try_value(val)) break;
    } else {
        for (long long x = -window; x <= window; ++x)
            if (try_value(Int(x))) break;
    }
    restore();

    bool witness_exact = found ? true : (bounded && all_exact);
    if (existential) return {found, found ? true : witness_exact};
    return {!found, found ? true : witness_exact};
}

inline IntVerdict eval_int_rec(const Formula& f, Assignment& env, long long window) {
    switch (f.kind()) {
        case NodeKind::Atom:
            if (f.as_atom().kind() == AtomKind::Relation)
                throw UnsupportedNode("relation atom has no interpretation over the integers");
            return {atom_truth(f.as_atom(), env), true};
        case NodeKind::Not: {
            IntVerdict r = eval_int_rec(f.child(0), env, window);
            return {!r.value, r.exact};
        }
        case NodeKind::And: {
            bool value = true, exact = true;
            for (const auto& c : f.children()) {
                IntVerdict r = eval_int_rec(c, env, window);
                if (!r.value && r.exact) return {false, true};
                value = value && r.value;
                exact = exact && r.exact;
            }
            return {value, exact};
        }
        case NodeKind::Or: {
            bool value = false, exact = true;
            for (const auto& c : f.children()) {
                IntVerdict r = eval_int_rec(c, env, window);
                if (r.value && r.exact) return {true, true};
                value = value || r.value;
                exact = exact && r.exact;
            }
            return {value, exact};
        }
        case NodeKind::Implies: {
            IntVerdict a = eval_int_rec(f.child(0), env, window);
            if (!a.value && a.exact) return {true, true};
            IntVerdict b = eval_int_rec(f.child(1), env, window);
            if (b.value && b.exact) return {true, true};
            return {!a.value || b.value, a.exact && b.exact};
        }
        case NodeKind::Iff: {
            IntVerdict a = eval_int_rec(f.child(0), env, window);
            IntVerdict b = eval_int_rec(f.child(1), env, window);
            return {a.value == b.value, a.exact && b.exact};
        }
        case NodeKind::Exists: return eval_int_quantified(f.body(), f.var(), env, window, true);
        case NodeKind::Forall: return eval_int_quantified(f.body(), f.var(), env, window, false);
        case NodeKind::CountExists: {
            const auto& xs = f.count_vars();
            const auto& ys = f.bound_vars();
            if (ys.size() == 1 && is_quantifier_free(f.body()) && is_counting_free(f.body())) {
                Assignment params = env;
                params.erase(ys[0]);
                CountValue cnt = oracle_count_int(f.body(), ys[0], params);
                if (cnt.infinite) return {false, true};
                return {env_value(env, xs[0]) == cnt.value, true};
            }
            // Windowed tuple count; over an infinite universe only the last
            // count variable may be nonzero.
            size_t k = ys.size();
            for (size_t i = 0; i + 1 < k; ++i)
                if (env_value(env, xs[i]) != 0) return {false, true};
            std::vector<std::optional<Int>> saved(k);
            for (size_t i = 0; i < k; ++i) {
                auto it = env.find(ys[i]);
                if (it != env.end()) saved[i] = it->second;
            }
            Int count = 0;
            bool exact = true;
            std::vector<long long> tuple(k, -window);
            while (true) {
                for (size_t i = 0; i < k; ++i) env[ys[i]] = Int(tuple[i]);
                IntVerdict r = eval_int_rec(f.body(), env, window);
                if (!r.exact) exact = false;
                if (r.value) ++count;
                size_t pos = k;
                while (pos > 0) {
                    --pos;
                    if (tuple[pos] < window) {
                        ++tuple[pos];
                        std::fill(tuple.begin() + static_cast<long>(pos) + 1, tuple.end(),
                                  -window);
                        break;
                    }
                    if (pos == 0) { pos = k + 1; break; }
                }
                if (pos == k + 1) break;
            }
            for (size_t i = 0; i < k; ++i) {
                if (saved[i])
                    env[ys[i]] = *saved[i];
                else
                    env.erase(ys[i]);
            }
            return {env_value(env, xs[k - 1]) == count, false};
        }
        case NodeKind::Majority:
            throw UnsupportedNode("majority quantifier has no interpretation over the integers");
    }
    return {false, true};
}

}  // namespace detail

/// Windowed three-valued evaluation over the integers: quantifiers whose
/// witnesses cannot be bounded syntactically range over [-window, window].
inline Verdict eval_int(const Formula& f, const Assignment& a, long long window) {
    Assignment env = a;
    detail::IntVerdict r = detail::eval_int_rec(f, env, window);
    if (r.exact) return r.value ? Verdict::True : Verdict::False;
    // Window-limited: re-check with a half-larger window and accept only a
    // stable verdict.
    Assignment env2 = a;
    detail::IntVerdict r2 = detail::eval_int_rec(f, env2, window + (window + 1) / 2);
    if (r2.exact) return r2.value ? Verdict::True : Verdict::False;
    if (r.value == r2.value) return r.value ? Verdict::True : Verdict::False;
    return Verdict::Inconclusive;
}

}  // namespace countpa
