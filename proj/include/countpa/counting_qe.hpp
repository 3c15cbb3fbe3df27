#pragma once

#include <map>
#include <string>
#include <vector>

#include "countpa/formula_gen.hpp"
#include "countpa/presburger_qe.hpp"
#include "countpa/printer.hpp"

namespace countpa {

struct CountingQeOptions {
    bool final_dnf = false;    // run full quantifier elimination on the result
    size_t subset_budget = 12;  // maximum disjunct count for the subset expansion
    QeBudget qe{};
};

/// Per-conjunction record of one counting elimination: the five-way
/// constraint partition, the merged residue modulus, and the helper
/// variables introduced for the bound and residue witnesses.
struct ConjunctionRecord {
    Var count_var;
    std::vector<size_t> subset;  // 1-based disjunct indices this conjunction intersects
    ConstraintPartition partition;
    Int combined_modulus = 1;
    std::map<std::string, Var> helpers;
};

struct TraceStep {
    Var x, y;
    size_t disjunct_count = 0;
    std::vector<ConjunctionRecord> conjunctions;
};

struct EliminationTrace {
    std::vector<TraceStep> steps;
};

namespace detail {

inline Formula count_eq(const Var& x, long long v) {
    return Formula::atom(Atom::eq(LinearTerm::variable(x), LinearTerm(v)));
}

}  // namespace detail

/// Replace "exactly x integers y satisfy this conjunction of atoms" by a
/// counting-free formula. With an equation present the witness is pinned and
/// x is 0 or 1; otherwise the count is read off the extreme bounds and the
/// merged residue class, with fresh variables for the greatest lower bound,
/// the least upper bound, the residue, and the first witness.
inline Formula eliminate_counting_conjunction(const Var& x, const Var& y,
                                              const std::vector<Atom>& atoms, VarPool& pool,
                                              ConjunctionRecord* record = nullptr) {
    ConstraintPartition part = ConstraintPartition::of(atoms, y);
    LinearTerm xt = LinearTerm::variable(x);

    // Constraints with no y at all, plus the divisibility side conditions of
    // reduced residues: if any fails, nothing counts.
    std::vector<Formula> guard;
    for (const auto& g : part.independent) guard.push_back(Formula::atom(*g.independent_atom));
    for (const auto& g : part.residue)
        if (g.divisibility) guard.push_back(Formula::atom(*g.divisibility));

    if (record) {
        record->count_var = x;
        record->partition = part;
        record->combined_modulus = 1;
        record->helpers.clear();
    }

    if (!part.equation.empty()) {
        const GeneralizedTerm& pinned = *part.equation[0].bound;
        std::vector<Formula> cond;
        if (pinned.denominator > 1)
            cond.push_back(Formula::atom(
                Atom::cong(pinned.numerator, LinearTerm(0), pinned.denominator)));
        for (const auto& g : part.lower)
            cond.push_back(Formula::atom(lower_lt_between(*g.bound, pinned)));
        for (const auto& g : part.upper)
            cond.push_back(Formula::atom(lower_lt_between(pinned, *g.bound)));
        for (const auto& g : part.residue)
            cond.push_back(Formula::atom(lower_cong_between(pinned, *g.bound, g.modulus)));
        for (size_t j = 1; j < part.equation.size(); ++j)
            cond.push_back(Formula::atom(lower_eq_between(pinned, *part.equation[j].bound)));
        for (const auto& g : guard) cond.push_back(g);
        return (detail::count_eq(x, 0) || detail::count_eq(x, 1)) &&
               Formula::iff(detail::count_eq(x, 1), Formula::conjunction(std::move(cond)));
    }

    // No equations: merge the residue constraints modulo their lcm. An empty
    // residue set behaves like the trivial constraint y == 0 (mod 1).
    std::vector<GeneralizedAtom> residues = part.residue;
    if (residues.empty()) {
        GeneralizedAtom trivial;
        trivial.klass = ConstraintClass::Residue;
        trivial.subject = y;
        trivial.bound = GeneralizedTerm(LinearTerm(0), 1);
        trivial.modulus = 1;
        residues.push_back(trivial);
    }
    Int l = 1;
    for (const auto& g : residues) l = lcm_int(l, g.modulus);

    Var res = pool.fresh("res");
    LinearTerm rest = LinearTerm::variable(res);
    if (record) {
        record->combined_modulus = l;
        record->helpers["res"] = res;
    }

    std::vector<Formula> res_parts;
    res_parts.push_back(Formula::atom(Atom::lt(LinearTerm(0), rest + LinearTerm(1))));  // 0 <= res
    res_parts.push_back(Formula::atom(Atom::lt(rest, LinearTerm(l))));
    GeneralizedTerm res_gen(rest, 1);
    for (const auto& g : residues)
        res_parts.push_back(Formula::atom(lower_cong_between(res_gen, *g.bound, g.modulus)));
    Formula psi_res = Formula::conjunction(std::move(res_parts));

    Formula chi;
    if (part.lower.empty() || part.upper.empty()) {
        // Witnesses are unbounded on one side, so no finite count matches x.
        chi = !Formula::atom(Atom::eq(xt, xt));
    } else {
        Var low = pool.fresh("low"), up = pool.fresh("up"), first = pool.fresh("first");
        if (record) {
            record->helpers["low"] = low;
            record->helpers["up"] = up;
            record->helpers["first"] = first;
        }
        LinearTerm lowt = LinearTerm::variable(low), upt = LinearTerm::variable(up),
                   firstt = LinearTerm::variable(first);

        auto conj_atoms = [](const std::vector<Atom>& atoms_in) {
            std::vector<Formula> fs;
            fs.reserve(atoms_in.size());
            for (const auto& a : atoms_in) fs.push_back(Formula::atom(a));
            return Formula::conjunction(std::move(fs));
        };

        // low is the greatest of the floored lower bounds
        std::vector<Formula> low_eqs, low_ges;
        for (const auto& g : part.lower) {
            low_eqs.push_back(conj_atoms(lower_eq_floor(lowt, *g.bound)));
            low_ges.push_back(Formula::atom(lower_ge_floor(lowt, *g.bound)));
        }
        Formula psi_low =
            Formula::disjunction(std::move(low_eqs)) && Formula::conjunction(std::move(low_ges));

        // up is the least of the ceiled upper bounds
        std::vector<Formula> up_eqs, up_les;
        for (const auto& g : part.upper) {
            up_eqs.push_back(conj_atoms(lower_eq_ceil(upt, *g.bound)));
            up_les.push_back(Formula::atom(lower_le_ceil(upt, *g.bound)));
        }
        Formula psi_up =
            Formula::disjunction(std::move(up_eqs)) && Formula::conjunction(std::move(up_les));

        // first is the least witness of the residue class above low. The
        // class meets (low, low+l] in exactly one point, so the window bound
        // already pins first to that minimal witness.
        Formula psi_first = Formula::conjunction({
            Formula::atom(Atom::lt(lowt, firstt)),
            Formula::atom(Atom::cong(firstt, rest, l)),
            Formula::atom(Atom::lt(firstt, lowt + LinearTerm(l) + LinearTerm(1))),
        });

        // count equation: x = max{0, ceil((up - first)/l)}
        std::vector<Formula> ceil_fs;
        for (const auto& a : lower_eq_ceil_div(xt, upt, firstt, l))
            ceil_fs.push_back(Formula::atom(a));
        Formula county =
            Formula::implies(Formula::atom(Atom::lt(upt, firstt + LinearTerm(1))),
                             detail::count_eq(x, 0)) &&
            Formula::implies(Formula::atom(Atom::lt(firstt, upt)),
                             Formula::conjunction(std::move(ceil_fs)));

        chi = Formula::exists(
            low, Formula::exists(
                     up, Formula::exists(first, Formula::conjunction({
                                                    std::move(psi_low),
                                                    std::move(psi_up),
                                                    std::move(psi_first),
                                                    std::move(county),
                                                }))));
    }

    // At most one res satisfies psi_res, so binding the witness
    // existentially in the consequent says "chi holds of the residue".
    Formula core =
        Formula::implies(!Formula::exists(res, psi_res), detail::count_eq(x, 0)) &&
        Formula::implies(Formula::exists(res, psi_res),
                         Formula::exists(res, psi_res && std::move(chi)));

    if (guard.empty()) return core;
    Formula beta = Formula::conjunction(guard);
    return Formula::implies(!beta, detail::count_eq(x, 0)) &&
           Formula::implies(beta, std::move(core));
}

/// Replace "exactly x integers y satisfy this DNF" by a counting-free
/// formula: one fresh counter per nonempty subset of disjuncts constrained
/// by the conjunction elimination, tied together by inclusion-exclusion with
/// the alternating sum rearranged so both sides are nonnegative.
inline Formula eliminate_counting_dnf(const Var& x, const Var& y, const DnfFormula& dnf,
                                      VarPool& pool, const CountingQeOptions& opts = {},
                                      TraceStep* step = nullptr) {
    size_t m = dnf.disjuncts.size();
    if (step) {
        step->x = x;
        step->y = y;
        step->disjunct_count = m;
    }
    if (m == 0) return detail::count_eq(x, 0);
    if (m == 1) {
        ConjunctionRecord rec;
        Formula out = eliminate_counting_conjunction(x, y, dnf.disjuncts[0], pool, &rec);
        rec.subset = {1};
        if (step) step->conjunctions.push_back(std::move(rec));
        return out;
    }
    if (m > opts.subset_budget)
        throw SubsetBudgetExceeded("matrix has " + std::to_string(m) +
                                   " disjuncts; subset budget is " +
                                   std::to_string(opts.subset_budget));

    struct Subset {
        std::vector<size_t> indices;  // 1-based
        Var counter;
    };
    std::vector<Subset> subsets;
    for (size_t size = 1; size <= m; ++size) {
        for (size_t mask = 1; mask < (size_t{1} << m); ++mask) {
            if (static_cast<size_t>(__builtin_popcountll(mask)) != size) continue;
            Subset s;
            std::string suffix;
            for (size_t i = 0; i < m; ++i) {
                if (mask & (size_t{1} << i)) {
                    s.indices.push_back(i + 1);
                    if (!suffix.empty()) suffix += "_";
                    suffix += std::to_string(i + 1);
                }
            }
            s.counter = pool.fresh("xI" + suffix);
            subsets.push_back(std::move(s));
        }
    }

    std::vector<Formula> parts;
    LinearTerm even_side = LinearTerm::variable(x);
    LinearTerm odd_side(0);
    for (const auto& s : subsets) {
        std::vector<Atom> conj;
        for (size_t idx : s.indices) {
            const auto& d = dnf.disjuncts[idx - 1];
            conj.insert(conj.end(), d.begin(), d.end());
        }
        std::sort(conj.begin(), conj.end());
        conj.erase(std::unique(conj.begin(), conj.end()), conj.end());
        ConjunctionRecord rec;
        parts.push_back(eliminate_counting_conjunction(s.counter, y, conj, pool, &rec));
        rec.subset = s.indices;
        if (step) step->conjunctions.push_back(std::move(rec));
        if (s.indices.size() % 2 == 0)
            even_side += LinearTerm::variable(s.counter);
        else
            odd_side += LinearTerm::variable(s.counter);
    }
    // x + sum of even-subset counters = sum of odd-subset counters
    parts.push_back(Formula::atom(Atom::eq(even_side, odd_side)));

    Formula body = Formula::conjunction(std::move(parts));
    for (size_t i = subsets.size(); i > 0; --i)
        body = Formula::exists(subsets[i - 1].counter, std::move(body));
    return body;
}

namespace detail {

inline Formula eliminate_all_rec(const Formula& f, VarPool& pool, const CountingQeOptions& opts,
                                 EliminationTrace* trace) {
    switch (f.kind()) {
        case NodeKind::Atom:
            return f;
        case NodeKind::Not:
            return !eliminate_all_rec(f.child(0), pool, opts, trace);
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> parts;
            parts.reserve(f.children().size());
            for (const auto& c : f.children())
                parts.push_back(eliminate_all_rec(c, pool, opts, trace));
            return f.kind() == NodeKind::And ? Formula::conjunction(std::move(parts))
                                             : Formula::disjunction(std::move(parts));
        }
        case NodeKind::Implies:
            return Formula::implies(eliminate_all_rec(f.child(0), pool, opts, trace),
                                    eliminate_all_rec(f.child(1), pool, opts, trace));
        case NodeKind::Iff:
            return Formula::iff(eliminate_all_rec(f.child(0), pool, opts, trace),
                                eliminate_all_rec(f.child(1), pool, opts, trace));
        case NodeKind::Exists:
            return Formula::exists(f.var(), eliminate_all_rec(f.body(), pool, opts, trace));
        case NodeKind::Forall:
            return Formula::forall(f.var(), eliminate_all_rec(f.body(), pool, opts, trace));
        case NodeKind::CountExists: {
            if (f.bound_vars().size() != 1)
                throw UnsupportedNode(
                    "only unary counting quantifiers can be eliminated; wider counting is "
                    "evaluator-only");
            Formula body = eliminate_all_rec(f.body(), pool, opts, trace);
            DnfFormula matrix = qe_full(body, opts.qe);
            TraceStep step;
            Formula out = eliminate_counting_dnf(f.count_vars()[0], f.bound_vars()[0], matrix,
                                                 pool, opts, &step);
            if (trace) trace->steps.push_back(std::move(step));
            return out;
        }
        case NodeKind::Majority:
            throw UnsupportedNode("majority quantifiers are evaluator-only");
    }
    return f;
}

}  // namespace detail

/// Remove every counting quantifier from a formula, innermost first: each
/// matrix is made counting-free recursively, brought to DNF by quantifier
/// elimination, and replaced through the subset expansion. The result is
/// plain first-order; with final_dnf set it is further reduced to
/// quantifier-free DNF.
inline Formula eliminate_all(const Formula& f, const CountingQeOptions& opts = {},
                             EliminationTrace* trace = nullptr) {
    VarPool pool(all_vars(f));
    Formula out = detail::eliminate_all_rec(f, pool, opts, trace);
    if (opts.final_dnf) out = qe_full(out, opts.qe).to_formula();
    return out;
}

/// 0 <= t as a single strict atom.
inline Formula nonneg_guard(const LinearTerm& t) {
    return Formula::atom(Atom::lt(LinearTerm(0), t + LinearTerm(1)));
}

namespace detail {

inline Formula relativize_nat_rec(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Atom: return f;
        case NodeKind::Not: return !relativize_nat_rec(f.child(0));
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> parts;
            for (const auto& c : f.children()) parts.push_back(relativize_nat_rec(c));
            return f.kind() == NodeKind::And ? Formula::conjunction(std::move(parts))
                                             : Formula::disjunction(std::move(parts));
        }
        case NodeKind::Implies:
            return Formula::implies(relativize_nat_rec(f.child(0)),
                                    relativize_nat_rec(f.child(1)));
        case NodeKind::Iff:
            return Formula::iff(relativize_nat_rec(f.child(0)), relativize_nat_rec(f.child(1)));
        case NodeKind::Exists:
            return Formula::exists(f.var(), nonneg_guard(LinearTerm::variable(f.var())) &&
                                                relativize_nat_rec(f.body()));
        case NodeKind::Forall:
            return Formula::forall(f.var(),
                                   Formula::implies(nonneg_guard(LinearTerm::variable(f.var())),
                                                    relativize_nat_rec(f.body())));
        case NodeKind::CountExists: {
            std::vector<Formula> guards;
            for (const auto& yv : f.bound_vars())
                guards.push_back(nonneg_guard(LinearTerm::variable(yv)));
            return Formula::count_exists(
                f.count_vars(), f.bound_vars(),
                Formula::conjunction(std::move(guards)) && relativize_nat_rec(f.body()));
        }
        case NodeKind::Majority:
            throw UnsupportedNode("majority quantifiers are evaluator-only");
    }
    return f;
}

}  // namespace detail

/// Guard every binder with nonnegativity, so truth over the naturals matches
/// truth of the guarded formula over the integers for nonnegative parameters.
inline Formula relativize_to_nat(const Formula& f) { return detail::relativize_nat_rec(f); }

// ---------------------------------------------------------------------------
// Initial segments. Input uses the ternary addition relation; the pipeline
// rewrites it over the integers with all binders confined to [0, max],
// eliminates counting down to quantifier-free DNF, and converts every atom
// back into relational form with digit-tuple sums.

struct SegmentOptions {
    Var max_var = "max";       // names the top universe element in the output
    bool close_max = false;    // existentially bind max with a maximality guard
    CountingQeOptions counting{};
};

namespace detail {

inline bool is_simple_term(const LinearTerm& t) {
    if (t.is_constant()) return t.constant() >= 0;
    return t.coeffs().size() == 1 && t.coeffs().begin()->second == 1 && t.constant() == 0;
}

inline Formula segment_guard(const Var& v, const Var& max_var) {
    LinearTerm vt = LinearTerm::variable(v);
    return nonneg_guard(vt) &&
           Formula::atom(Atom::lt(vt, LinearTerm::variable(max_var) + LinearTerm(1)));
}

inline Formula segment_to_int_rec(const Formula& f, const Var& max_var) {
    switch (f.kind()) {
        case NodeKind::Atom: {
            const Atom& a = f.as_atom();
            if (a.kind() == AtomKind::Relation) {
                if (a.relation_name() != "plus" || a.args().size() != 3)
                    throw UnsupportedNode("segment input may only use the addition relation");
                for (const auto& arg : a.args())
                    if (!is_simple_term(arg))
                        throw UnsupportedNode("relation arguments must be variables or constants");
                return Formula::atom(Atom::eq(a.args()[0] + a.args()[1], a.args()[2]));
            }
            if (!is_simple_term(a.lhs()) || !is_simple_term(a.rhs()))
                throw UnsupportedNode(
                    "segment input terms must be single variables or constants");
            return f;
        }
        case NodeKind::Not: return !segment_to_int_rec(f.child(0), max_var);
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> parts;
            for (const auto& c : f.children())
                parts.push_back(segment_to_int_rec(c, max_var));
            return f.kind() == NodeKind::And ? Formula::conjunction(std::move(parts))
                                             : Formula::disjunction(std::move(parts));
        }
        case NodeKind::Implies:
            return Formula::implies(segment_to_int_rec(f.child(0), max_var),
                                    segment_to_int_rec(f.child(1), max_var));
        case NodeKind::Iff:
            return Formula::iff(segment_to_int_rec(f.child(0), max_var),
                                segment_to_int_rec(f.child(1), max_var));
        case NodeKind::Exists:
            return Formula::exists(f.var(), segment_guard(f.var(), max_var) &&
                                                segment_to_int_rec(f.body(), max_var));
        case NodeKind::Forall:
            return Formula::forall(
                f.var(), Formula::implies(segment_guard(f.var(), max_var),
                                          segment_to_int_rec(f.body(), max_var)));
        case NodeKind::CountExists: {
            std::vector<Formula> guards;
            for (const auto& yv : f.bound_vars()) guards.push_back(segment_guard(yv, max_var));
            return Formula::count_exists(
                f.count_vars(), f.bound_vars(),
                Formula::conjunction(std::move(guards)) &&
                    segment_to_int_rec(f.body(), max_var));
        }
        case NodeKind::Majority:
            throw UnsupportedNode("majority quantifiers are evaluator-only");
    }
    return f;
}

/// Expand one side of an eliminated atom into unit summands: the constant
/// contributes that many 1-summands and each variable one summand per unit
/// of its coefficient.
inline std::vector<LinearTerm> unit_summands(const LinearTerm& side) {
    std::vector<LinearTerm> out;
    for (const auto& [v, c] : side.coeffs()) {
        for (Int i = 0; i < c; ++i) out.push_back(LinearTerm::variable(v));
    }
    for (Int i = 0; i < side.constant(); ++i) out.push_back(LinearTerm(1));
    return out;
}

/// Digit width so that k unit summands bounded by any universe maximum fit:
/// (N+1)^(d-1) >= k makes (N+1)^d > k*N for every N >= 1.
inline int tuple_width_for(size_t max_summands) {
    int d = 2;
    Int cap = 2;  // 2^(d-1) at the worst case N = 1
    while (cap < Int(static_cast<long long>(max_summands))) {
        ++d;
        cap *= 2;
    }
    return d;
}

/// Convert one eliminated Presb atom over simple parameters into a formula
/// in the relational signature, accumulating each side's summands into a
/// digit tuple and comparing the tuples.
inline Formula segment_atom_to_relational(const Atom& a, const Var& max_var, VarPool& pool) {
    // move negative coefficients across so both sides have nonnegative parts
    LinearTerm diff = a.lhs() - a.rhs();
    LinearTerm pos, neg;
    for (const auto& [v, c] : diff.coeffs()) {
        if (c > 0)
            pos += LinearTerm::variable(v, c);
        else
            neg += LinearTerm::variable(v, -c);
    }
    if (diff.constant() > 0)
        pos += LinearTerm(diff.constant());
    else
        neg += LinearTerm(-diff.constant());

    std::vector<LinearTerm> left = unit_summands(pos);
    std::vector<LinearTerm> right = unit_summands(neg);
    int d = tuple_width_for(std::max(left.size(), right.size()));

    std::vector<Var> lv = gen::digit_vars(pool, "sl", d);
    std::vector<Var> rv = gen::digit_vars(pool, "sr", d);
    std::vector<LinearTerm> lt = gen::tvs(lv), rt = gen::tvs(rv);
    std::vector<Formula> parts;

    auto tuples_of = [&](const std::vector<LinearTerm>& summands) {
        std::vector<std::vector<LinearTerm>> tuples;
        for (const auto& s : summands) {
            std::vector<LinearTerm> padded(static_cast<size_t>(d), LinearTerm(0));
            padded[0] = s;
            tuples.push_back(std::move(padded));
        }
        return tuples;
    };
    parts.push_back(gen::tuple_sum_equals(tuples_of(left), lt, max_var, pool));
    parts.push_back(gen::tuple_sum_equals(tuples_of(right), rt, max_var, pool));

    switch (a.kind()) {
        case AtomKind::Eq: parts.push_back(gen::tuple_eq(lt, rt)); break;
        case AtomKind::Lt: parts.push_back(gen::tuple_lt(lt, rt)); break;
        case AtomKind::CongMod:
            parts.push_back(gen::tuple_cong(lt, rt, a.modulus(), max_var, pool));
            break;
        default: throw UnsupportedNode("relation atom cannot appear in eliminated output");
    }
    std::vector<Var> bound = lv;
    bound.insert(bound.end(), rv.begin(), rv.end());
    return gen::exists_all(bound, Formula::conjunction(std::move(parts)));
}

}  // namespace detail

/// Full initial-segment pipeline: relativize to [0, max] over the integers,
/// eliminate counting down to quantifier-free DNF, and convert the atoms to
/// the relational vocabulary with digit-tuple sums. The result is equivalent
/// over every initial segment, with `max` naming the top element (free by
/// default, or bound with a maximality guard).
inline Formula relativize_to_segment(const Formula& f, const SegmentOptions& opts = {},
                                     EliminationTrace* trace = nullptr) {
    VarPool pool(all_vars(f));
    pool.reserve({opts.max_var});
    Formula guarded = detail::segment_to_int_rec(f, opts.max_var);

    CountingQeOptions copts = opts.counting;
    copts.final_dnf = false;
    Formula counting_free = detail::eliminate_all_rec(guarded, pool, copts, trace);
    DnfFormula dnf = qe_full(counting_free, copts.qe);

    std::vector<Formula> disjuncts;
    for (const auto& d : dnf.disjuncts) {
        std::vector<Formula> atoms;
        for (const auto& a : d) {
            if (a.kind() == AtomKind::CongMod && a.modulus() == 1) continue;  // always true
            atoms.push_back(detail::segment_atom_to_relational(a, opts.max_var, pool));
        }
        disjuncts.push_back(Formula::conjunction(std::move(atoms)));
    }
    Formula out = dnf.is_false() ? Formula::bottom() : Formula::disjunction(std::move(disjuncts));
    if (opts.close_max)
        out = Formula::exists(opts.max_var, gen::var_is_max(opts.max_var, pool) && std::move(out));
    return out;
}

}  // namespace countpa
