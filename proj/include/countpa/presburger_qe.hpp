#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "countpa/normalize.hpp"

namespace countpa {

struct QeBudget {
    size_t max_disjuncts = 100000;

    static QeBudget from_env() {
        QeBudget b;
        if (const char* s = std::getenv("COUNTPA_BUDGET_DISJUNCTS")) {
            long long v = std::atoll(s);
            if (v > 0) b.max_disjuncts = static_cast<size_t>(v);
        }
        return b;
    }
};

/// Negation-free disjunctive normal form: a list of conjunctions of atoms.
/// No disjuncts at all is FALSE; a disjunct with no atoms is TRUE.
struct DnfFormula {
    std::vector<std::vector<Atom>> disjuncts;

    static DnfFormula verum() { return DnfFormula{{{}}}; }
    static DnfFormula falsum() { return DnfFormula{}; }

    bool is_false() const { return disjuncts.empty(); }
    bool is_true() const {
        return std::any_of(disjuncts.begin(), disjuncts.end(),
                           [](const auto& d) { return d.empty(); });
    }

    Formula to_formula() const {
        if (disjuncts.empty()) return Formula::bottom();
        std::vector<Formula> ds;
        ds.reserve(disjuncts.size());
        for (const auto& d : disjuncts) {
            std::vector<Formula> atoms;
            atoms.reserve(d.size());
            for (const auto& a : d) atoms.push_back(Formula::atom(a));
            ds.push_back(Formula::conjunction(std::move(atoms)));
        }
        return Formula::disjunction(std::move(ds));
    }

    std::set<Var> variables() const {
        std::set<Var> out;
        for (const auto& d : disjuncts)
            for (const auto& a : d) a.collect_variables(out);
        return out;
    }
};

namespace detail {

/// Constraints collected per variable part: strict bounds, a pinned value,
/// and residue classes. Everything is about the integer value of the part.
struct PartConstraints {
    std::optional<Int> strict_lower, strict_upper;
    std::optional<Int> pinned;
    std::map<Int, Int> residues;  // modulus -> required residue
    bool contradictory = false;

    void add_lower(const Int& c) {
        if (!strict_lower || c > *strict_lower) strict_lower = c;
        check();
    }
    void add_upper(const Int& c) {
        if (!strict_upper || c < *strict_upper) strict_upper = c;
        check();
    }
    void pin(const Int& c) {
        if (pinned && *pinned != c) contradictory = true;
        pinned = c;
        check();
    }
    void add_residue(const Int& n, const Int& r) {
        auto [it, inserted] = residues.try_emplace(n, r);
        if (!inserted && it->second != r) contradictory = true;
        if (pinned && mod_floor(*pinned - r, n) != 0) contradictory = true;
    }
    void check() {
        if (pinned) {
            if (strict_lower && *pinned <= *strict_lower) contradictory = true;
            if (strict_upper && *pinned >= *strict_upper) contradictory = true;
            for (const auto& [n, r] : residues)
                if (mod_floor(*pinned - r, n) != 0) contradictory = true;
        }
        if (strict_lower && strict_upper && *strict_upper - *strict_lower < 2)
            contradictory = true;
    }
};

/// Drop ground-false atoms' disjuncts, trivially true atoms, duplicates, and
/// atoms subsumed by a sharper bound on the same variable part; a disjunct
/// with contradictory constraints on one part is dropped entirely.
inline std::optional<std::vector<Atom>> normalize_disjunct(std::vector<Atom> atoms) {
    std::vector<Atom> relational;
    std::map<LinearTerm, PartConstraints> parts;
    for (auto& a : atoms) {
        if (!a.is_presb()) {
            relational.push_back(std::move(a));
            continue;
        }
        if (a.kind() == AtomKind::CongMod && a.modulus() == 1) continue;  // always true
        LinearTerm diff = a.lhs() - a.rhs();
        if (diff.is_constant()) {
            bool truth = false;
            switch (a.kind()) {
                case AtomKind::Eq: truth = diff.constant() == 0; break;
                case AtomKind::Lt: truth = diff.constant() < 0; break;
                default: truth = mod_floor(diff.constant(), a.modulus()) == 0;
            }
            if (!truth) return std::nullopt;
            continue;
        }
        Int c = diff.constant();
        LinearTerm key = diff - LinearTerm(c);
        bool flipped = key.coeffs().begin()->second < 0;
        if (flipped) {
            key = -key;
            c = -c;
        }
        // Flipping negates key and c together, so the constrained value of
        // the key is -c either way; only the inequality direction flips.
        PartConstraints& pc = parts[key];
        Int value = -c;
        switch (a.kind()) {
            case AtomKind::Eq:
                pc.pin(value);
                break;
            case AtomKind::Lt:
                if (flipped)
                    pc.add_lower(value);
                else
                    pc.add_upper(value);
                break;
            default:
                pc.add_residue(a.modulus(), mod_floor(value, a.modulus()));
        }
        if (pc.contradictory) return std::nullopt;
    }

    std::vector<Atom> kept = std::move(relational);
    for (auto& [key, pc] : parts) {
        // a width-two window pins the value just like an equation
        if (!pc.pinned && pc.strict_lower && pc.strict_upper &&
            *pc.strict_upper - *pc.strict_lower == 2) {
            pc.pin(*pc.strict_lower + 1);
            if (pc.contradictory) return std::nullopt;
        }
        if (pc.pinned) {
            kept.push_back(Atom::eq(key, LinearTerm(*pc.pinned)));
            continue;  // the pin subsumes bounds and residues once consistent
        }
        if (pc.strict_lower) kept.push_back(Atom::lt(LinearTerm(*pc.strict_lower), key));
        if (pc.strict_upper) kept.push_back(Atom::lt(key, LinearTerm(*pc.strict_upper)));
        for (const auto& [n, r] : pc.residues)
            kept.push_back(Atom::cong(key, LinearTerm(r), n));
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

inline void append_disjunct(DnfFormula& dst, std::vector<Atom> atoms, const QeBudget& budget) {
    auto norm = normalize_disjunct(std::move(atoms));
    if (!norm) return;
    dst.disjuncts.push_back(std::move(*norm));
    if (dst.disjuncts.size() > budget.max_disjuncts)
        throw SizeBudgetExceeded("disjunct budget exceeded (" +
                                 std::to_string(budget.max_disjuncts) + ")");
}

inline void dedup_disjuncts(DnfFormula& d) {
    std::sort(d.disjuncts.begin(), d.disjuncts.end());
    d.disjuncts.erase(std::unique(d.disjuncts.begin(), d.disjuncts.end()), d.disjuncts.end());
    // TRUE absorbs everything else.
    for (const auto& dj : d.disjuncts) {
        if (dj.empty()) {
            d.disjuncts = {{}};
            return;
        }
    }
}

/// Absorption: a disjunct whose atoms include all of another disjunct's
/// atoms is redundant. Quadratic, so applied only at moderate sizes.
inline void absorb_disjuncts(DnfFormula& d) {
    if (d.disjuncts.size() < 2 || d.disjuncts.size() > 1500) return;
    std::sort(d.disjuncts.begin(), d.disjuncts.end(),
              [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::vector<std::vector<Atom>> kept;
    for (auto& cand : d.disjuncts) {
        bool subsumed = false;
        for (const auto& small : kept) {
            if (small.size() > cand.size()) break;
            if (std::includes(cand.begin(), cand.end(), small.begin(), small.end())) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) kept.push_back(std::move(cand));
    }
    d.disjuncts = std::move(kept);
    std::sort(d.disjuncts.begin(), d.disjuncts.end());
}

inline DnfFormula dnf_or(DnfFormula a, const DnfFormula& b, const QeBudget& budget) {
    for (const auto& d : b.disjuncts) append_disjunct(a, d, budget);
    dedup_disjuncts(a);
    absorb_disjuncts(a);
    return a;
}

inline DnfFormula dnf_and(const DnfFormula& a, const DnfFormula& b, const QeBudget& budget) {
    DnfFormula out;
    for (const auto& da : a.disjuncts) {
        for (const auto& db : b.disjuncts) {
            std::vector<Atom> merged = da;
            merged.insert(merged.end(), db.begin(), db.end());
            append_disjunct(out, std::move(merged), budget);
        }
    }
    dedup_disjuncts(out);
    absorb_disjuncts(out);
    return out;
}

inline DnfFormula dnf_of_formula(const Formula& f, const QeBudget& budget) {
    switch (f.kind()) {
        case NodeKind::Atom: {
            if (!f.as_atom().is_presb())
                throw UnsupportedNode("relation atoms have no Presburger normal form");
            DnfFormula out;
            append_disjunct(out, {f.as_atom()}, budget);
            return out;
        }
        case NodeKind::And: {
            DnfFormula acc = DnfFormula::verum();
            for (const auto& c : f.children()) acc = dnf_and(acc, dnf_of_formula(c, budget), budget);
            return acc;
        }
        case NodeKind::Or: {
            DnfFormula acc = DnfFormula::falsum();
            for (const auto& c : f.children()) acc = dnf_or(acc, dnf_of_formula(c, budget), budget);
            return acc;
        }
        default:
            throw UnsupportedNode("expected a negation-free quantifier-free formula");
    }
}

}  // namespace detail

/// Distribute a quantifier-free, counting-free formula over Presb atoms into
/// negation-free DNF.
inline DnfFormula to_dnf(const Formula& f, const QeBudget& budget = {}) {
    return detail::dnf_of_formula(push_negations(f), budget);
}

namespace detail {

/// One atom of the coefficient-unified problem: the bound variable occurs
/// with coefficient exactly 1.
struct UnitAtom {
    AtomKind kind;     // Eq, Lt (as "v < bound" or "bound < v"), CongMod
    bool lower = false;  // for Lt: true means bound < v
    LinearTerm bound;
    Int modulus = 1;

    Atom instantiate(const LinearTerm& value) const {
        switch (kind) {
            case AtomKind::Eq: return Atom::eq(value, bound);
            case AtomKind::Lt: return lower ? Atom::lt(bound, value) : Atom::lt(value, bound);
            default: return Atom::cong(value, bound, modulus);
        }
    }
};

}  // namespace detail

/// Eliminate an existential integer quantifier from a conjunction of Presb
/// atoms: unify the variable's coefficients to their lcm (adding the
/// divisibility constraint the substitution induces), then expand over the
/// lower-bound terms plus one period of the combined modulus.
inline DnfFormula eliminate_exists(const Var& y, const std::vector<Atom>& conj,
                                   const QeBudget& budget = {}) {
    std::vector<Atom> context;
    struct RawAtom {
        Int c;
        AtomKind kind;
        LinearTerm e;
        Int modulus;
    };
    std::vector<RawAtom> raw;
    for (const auto& a : conj) {
        if (!a.is_presb()) throw UnsupportedNode("relation atom in quantifier elimination");
        Int c = a.lhs().coeff(y) - a.rhs().coeff(y);
        if (c == 0) {
            if (a.mentions(y)) {
                // y cancels across the sides; rewrite without it
                LinearTerm l = a.lhs().without(y), r = a.rhs().without(y);
                switch (a.kind()) {
                    case AtomKind::Eq: context.push_back(Atom::eq(l, r)); break;
                    case AtomKind::Lt: context.push_back(Atom::lt(l, r)); break;
                    default: context.push_back(Atom::cong(l, r, a.modulus()));
                }
            } else {
                context.push_back(a);
            }
            continue;
        }
        raw.push_back(RawAtom{c, a.kind(), a.rhs().without(y) - a.lhs().without(y),
                              a.kind() == AtomKind::CongMod ? a.modulus() : Int(1)});
    }

    if (raw.empty()) {
        DnfFormula out;
        detail::append_disjunct(out, context, budget);
        return out;
    }

    Int delta = 1;
    for (const auto& r : raw) delta = lcm_int(delta, abs(r.c));

    // After scaling, atoms speak about y' = delta*y; y' must be divisible.
    std::vector<detail::UnitAtom> atoms;
    for (const auto& r : raw) {
        Int k = delta / r.c;  // signed
        detail::UnitAtom u;
        u.bound = r.e * k;
        switch (r.kind) {
            case AtomKind::Eq:
                u.kind = AtomKind::Eq;
                break;
            case AtomKind::Lt:
                u.kind = AtomKind::Lt;
                u.lower = k < 0;  // multiplying by a negative flips the order
                break;
            default:
                u.kind = AtomKind::CongMod;
                u.modulus = r.modulus * abs(k);
        }
        atoms.push_back(std::move(u));
    }
    atoms.push_back(detail::UnitAtom{AtomKind::CongMod, false, LinearTerm(0), delta});

    // An equation pins y' down: substitute its term everywhere.
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].kind != AtomKind::Eq) continue;
        std::vector<Atom> result = context;
        for (size_t j = 0; j < atoms.size(); ++j) {
            if (j == i) continue;
            result.push_back(atoms[j].instantiate(atoms[i].bound));
        }
        DnfFormula out;
        detail::append_disjunct(out, std::move(result), budget);
        return out;
    }

    Int period = 1;
    for (const auto& u : atoms)
        if (u.kind == AtomKind::CongMod) period = lcm_int(period, u.modulus);

    std::vector<const detail::UnitAtom*> lowers;
    for (const auto& u : atoms)
        if (u.kind == AtomKind::Lt && u.lower) lowers.push_back(&u);

    DnfFormula out;
    if (lowers.empty()) {
        // No lower bounds: arbitrarily small witnesses exist; only the
        // residues constrain which ones, so one period of samples suffices.
        for (Int j = 1; j <= period; ++j) {
            std::vector<Atom> result = context;
            bool feasible = true;
            for (const auto& u : atoms) {
                if (u.kind == AtomKind::Lt && !u.lower) continue;  // satisfied far below
                if (u.kind == AtomKind::Lt && u.lower) { feasible = false; break; }
                result.push_back(u.instantiate(LinearTerm(j)));
            }
            if (feasible) detail::append_disjunct(out, std::move(result), budget);
        }
    } else {
        for (const detail::UnitAtom* b : lowers) {
            for (Int j = 1; j <= period; ++j) {
                LinearTerm value = b->bound + LinearTerm(j);
                std::vector<Atom> result = context;
                for (const auto& u : atoms) result.push_back(u.instantiate(value));
                detail::append_disjunct(out, std::move(result), budget);
            }
        }
    }
    detail::dedup_disjuncts(out);
    return out;
}

namespace detail {

inline DnfFormula negate_dnf(const DnfFormula& d, const QeBudget& budget) {
    DnfFormula acc = DnfFormula::verum();
    for (const auto& disjunct : d.disjuncts) {
        // negate one conjunction: the disjunction of its atoms' negations
        DnfFormula clause = DnfFormula::falsum();
        for (const auto& a : disjunct)
            clause = dnf_or(clause, dnf_of_formula(negate_presb_atom(a), budget), budget);
        acc = dnf_and(acc, clause, budget);
        if (acc.is_false()) return acc;
    }
    return acc;
}

inline DnfFormula qe_rec(const Formula& f, const QeBudget& budget) {
    switch (f.kind()) {
        case NodeKind::Atom: return dnf_of_formula(f, budget);
        case NodeKind::Not: return negate_dnf(qe_rec(f.child(0), budget), budget);
        case NodeKind::And: {
            DnfFormula acc = DnfFormula::verum();
            for (const auto& c : f.children()) {
                acc = dnf_and(acc, qe_rec(c, budget), budget);
                if (acc.is_false()) return acc;
            }
            return acc;
        }
        case NodeKind::Or: {
            DnfFormula acc = DnfFormula::falsum();
            for (const auto& c : f.children()) acc = dnf_or(acc, qe_rec(c, budget), budget);
            return acc;
        }
        case NodeKind::Implies:
            return dnf_or(negate_dnf(qe_rec(f.child(0), budget), budget),
                          qe_rec(f.child(1), budget), budget);
        case NodeKind::Iff: {
            DnfFormula a = qe_rec(f.child(0), budget);
            DnfFormula b = qe_rec(f.child(1), budget);
            return dnf_or(dnf_and(a, b, budget),
                          dnf_and(negate_dnf(a, budget), negate_dnf(b, budget), budget), budget);
        }
        case NodeKind::Exists: {
            // Bucket elimination over the whole existential prefix: each
            // conjunct is distributed separately and a variable only ever
            // multiplies the conjuncts that mention it.
            std::vector<Var> prefix;
            const Formula* cur = &f;
            while (cur->kind() == NodeKind::Exists) {
                prefix.push_back(cur->var());
                cur = &cur->body();
            }
            std::vector<const Formula*> conjuncts;
            if (cur->kind() == NodeKind::And) {
                for (const auto& c : cur->children()) conjuncts.push_back(&c);
            } else {
                conjuncts.push_back(cur);
            }
            struct Block {
                DnfFormula dnf;
                std::set<Var> vars;
            };
            std::vector<Block> blocks;
            for (const Formula* c : conjuncts) {
                Block b;
                b.dnf = qe_rec(*c, budget);
                b.vars = b.dnf.variables();
                blocks.push_back(std::move(b));
            }
            for (size_t i = prefix.size(); i > 0; --i) {
                const Var& v = prefix[i - 1];
                Block merged;
                merged.dnf = DnfFormula::verum();
                std::vector<Block> rest;
                for (auto& b : blocks) {
                    if (b.vars.count(v))
                        merged.dnf = dnf_and(merged.dnf, b.dnf, budget);
                    else
                        rest.push_back(std::move(b));
                }
                DnfFormula eliminated;
                for (const auto& d : merged.dnf.disjuncts)
                    eliminated = dnf_or(eliminated, eliminate_exists(v, d, budget), budget);
                merged.dnf = std::move(eliminated);
                merged.vars = merged.dnf.variables();
                rest.push_back(std::move(merged));
                blocks = std::move(rest);
            }
            DnfFormula out = DnfFormula::verum();
            for (const auto& b : blocks) out = dnf_and(out, b.dnf, budget);
            return out;
        }
        case NodeKind::Forall: {
            DnfFormula body = negate_dnf(qe_rec(f.body(), budget), budget);
            DnfFormula ex;
            for (const auto& d : body.disjuncts)
                ex = dnf_or(ex, eliminate_exists(f.var(), d, budget), budget);
            return negate_dnf(ex, budget);
        }
        default:
            throw UnsupportedNode("counting quantifiers must be eliminated first");
    }
}

}  // namespace detail

/// Full quantifier elimination over the integers for counting-free formulas:
/// the result is an equivalent negation-free, quantifier-free DNF.
inline DnfFormula qe_full(const Formula& f, const QeBudget& budget = {}) {
    return detail::qe_rec(f, budget);
}

/// Exact truth of a counting-free formula over the integers under the given
/// assignment of its free variables: plug the values in and run quantifier
/// elimination on the closed formula, where every step grounds out.
inline bool decide_presb(const Formula& f, const Assignment& a, const QeBudget& budget = {}) {
    Formula closed = f;
    for (const auto& [v, value] : a) closed = substitute(closed, v, LinearTerm(value));
    return qe_full(closed, budget).is_true();
}

}  // namespace countpa
