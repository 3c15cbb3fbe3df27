#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "countpa/formula.hpp"
#include "countpa/ints.hpp"

namespace countpa {

/// Extended gcd: returns g = gcd(a, b) and x, y with a*x + b*y = g.
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
    if (b == 0) {
        x = a < 0 ? -1 : 1;
        y = 0;
        return abs(a);
    }
    Int x1, y1;
    Int g = ext_gcd(b, Int(a % b), x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

/// Multiplicative inverse of a modulo m, in [1, m]; requires gcd(a, m) = 1.
inline Int mod_inverse(const Int& a, const Int& m) {
    if (m == 1) return 1;
    Int x, y;
    Int g = ext_gcd(mod_floor(a, m), m, x, y);
    if (g != 1) throw InvalidParams("no modular inverse: arguments not coprime");
    Int r = mod_floor(x, m);
    return r == 0 ? m : r;
}

struct CongruenceReduction {
    Int n_prime;   // reduced modulus n/g
    Int c_dprime;  // inverse of c/g modulo n', in [1, n']
    Int g;         // gcd(c, n)
};

/// Reduce c*y == e (mod n) with c != 0 to a unit-coefficient residue class:
/// g = gcd(c, n), n' = n/g, and c'' with (c/g)*c'' == 1 (mod n'). The reduced
/// atom y == c''*e/g (mod n') is equivalent only on the side condition g | e,
/// which callers must attach as an extra conjunct.
inline CongruenceReduction reduce_congruence(const Int& c, const Int& n) {
    if (c == 0) throw InvalidParams("coefficient must be nonzero");
    if (n < 1) throw InvalidParams("modulus must be >= 1");
    Int g = gcd_int(abs(c), n);
    Int n_prime = n / g;
    Int c_prime = c / g;
    return CongruenceReduction{n_prime, mod_inverse(c_prime, n_prime), g};
}

/// Merge congruence constraints b == a_j (mod n_j) into a single class modulo
/// their lcm; nullopt when the constraints are jointly unsatisfiable.
inline std::optional<std::pair<Int, Int>> combine_residues(
    const std::vector<std::pair<Int, Int>>& constraints) {
    if (constraints.empty()) throw InvalidParams("residue list must be nonempty");
    Int l = 1;
    for (const auto& [n, a] : constraints) {
        if (n < 1) throw InvalidParams("modulus must be >= 1");
        l = lcm_int(l, n);
    }
    for (Int r = 0; r < l; ++r) {
        bool all = true;
        for (const auto& [n, a] : constraints) {
            if (mod_floor(r - a, n) != 0) {
                all = false;
                break;
            }
        }
        if (all) return std::make_pair(l, r);
    }
    return std::nullopt;
}

/// Fraction (numerator term) / denominator with the denominator normalized
/// positive. No gcd reduction is applied: values track the construction that
/// produced them.
struct GeneralizedTerm {
    LinearTerm numerator;
    Int denominator = 1;

    GeneralizedTerm() = default;
    GeneralizedTerm(LinearTerm num, Int den) : numerator(std::move(num)), denominator(std::move(den)) {
        if (denominator < 1) throw InvalidParams("denominator must be positive");
    }

    Rat evaluate(const std::function<Int(const Var&)>& value_of) const {
        return Rat(numerator.evaluate(value_of), denominator);
    }

    bool operator==(const GeneralizedTerm&) const = default;
};

enum class ConstraintClass { Lower, Upper, Residue, Equation, Independent };

/// An atom solved for a distinguished variable y: a bound y > t, y < t,
/// y = t, a residue class y == t (mod n'), or a constraint independent of y.
/// For residue classes the bound is c''*e over g and `divisibility` carries
/// the side condition e == 0 (mod g) when g > 1.
struct GeneralizedAtom {
    ConstraintClass klass;
    Var subject;
    std::optional<GeneralizedTerm> bound;
    Int modulus = 0;  // n', Residue only
    std::optional<Atom> divisibility;
    std::optional<Atom> independent_atom;

    /// Exact-rational truth under integer values, for oracle-side checks.
    bool holds(const Int& y_value, const std::function<Int(const Var&)>& value_of) const {
        switch (klass) {
            case ConstraintClass::Lower:
                return Rat(y_value) > bound->evaluate(value_of);
            case ConstraintClass::Upper:
                return Rat(y_value) < bound->evaluate(value_of);
            case ConstraintClass::Equation:
                return Rat(y_value) == bound->evaluate(value_of);
            case ConstraintClass::Residue: {
                if (divisibility && !divisibility->evaluate(value_of)) return false;
                Rat target = bound->evaluate(value_of);
                Rat diff = Rat(y_value) - target;
                if (!is_integer(diff)) return false;
                return mod_floor(boost::multiprecision::numerator(diff), modulus) == 0;
            }
            case ConstraintClass::Independent:
                return independent_atom->evaluate(value_of);
        }
        return false;
    }
};

/// Solve a Presb atom for y per the multiplicity bookkeeping: the atom is
/// equivalent to c*y <| e with c the net y-coefficient and e the remaining
/// term, then sign-normalized so denominators stay positive.
inline GeneralizedAtom classify_atom(const Atom& a, const Var& y) {
    if (!a.is_presb()) throw NotPresbAtom("cannot classify relation atom " + a.relation_name());
    Int c = a.lhs().coeff(y) - a.rhs().coeff(y);
    LinearTerm e = a.rhs().without(y) - a.lhs().without(y);

    GeneralizedAtom out;
    out.subject = y;
    if (c == 0) {
        out.klass = ConstraintClass::Independent;
        switch (a.kind()) {
            case AtomKind::Eq: out.independent_atom = Atom::eq(LinearTerm(0), e); break;
            case AtomKind::Lt: out.independent_atom = Atom::lt(LinearTerm(0), e); break;
            case AtomKind::CongMod:
                out.independent_atom = Atom::cong(LinearTerm(0), e, a.modulus());
                break;
            default: break;
        }
        return out;
    }
    switch (a.kind()) {
        case AtomKind::Eq:
            out.klass = ConstraintClass::Equation;
            out.bound = c > 0 ? GeneralizedTerm(e, c) : GeneralizedTerm(-e, -c);
            return out;
        case AtomKind::Lt:
            // c*y < e: an upper bound for positive c, a lower bound after
            // flipping the comparison for negative c.
            if (c > 0) {
                out.klass = ConstraintClass::Upper;
                out.bound = GeneralizedTerm(e, c);
            } else {
                out.klass = ConstraintClass::Lower;
                out.bound = GeneralizedTerm(-e, -c);
            }
            return out;
        case AtomKind::CongMod: {
            CongruenceReduction red = reduce_congruence(c, a.modulus());
            out.klass = ConstraintClass::Residue;
            out.modulus = red.n_prime;
            out.bound = GeneralizedTerm(e * red.c_dprime, red.g);
            if (red.g > 1) out.divisibility = Atom::cong(e, LinearTerm(0), red.g);
            return out;
        }
        default: break;
    }
    throw NotPresbAtom("unclassifiable atom kind");
}

/// The five-way split of a conjunction of atoms relative to y.
struct ConstraintPartition {
    std::vector<GeneralizedAtom> lower, upper, residue, equation, independent;

    static ConstraintPartition of(const std::vector<Atom>& atoms, const Var& y) {
        ConstraintPartition p;
        for (const auto& a : atoms) {
            GeneralizedAtom g = classify_atom(a, y);
            switch (g.klass) {
                case ConstraintClass::Lower: p.lower.push_back(std::move(g)); break;
                case ConstraintClass::Upper: p.upper.push_back(std::move(g)); break;
                case ConstraintClass::Residue: p.residue.push_back(std::move(g)); break;
                case ConstraintClass::Equation: p.equation.push_back(std::move(g)); break;
                case ConstraintClass::Independent: p.independent.push_back(std::move(g)); break;
            }
        }
        return p;
    }
};

// ---------------------------------------------------------------------------
// Lowering of generalized comparisons back into plain atoms. For t = u/c with
// c >= 1 the rewrites multiply through by the denominator; floor and ceiling
// turn into a sandwich of strict inequalities.

/// v < t  |->  c*v < u
inline Atom lower_lt(const LinearTerm& v, const GeneralizedTerm& t) {
    return Atom::lt(v * t.denominator, t.numerator);
}

/// v > t  |->  u < c*v
inline Atom lower_gt(const LinearTerm& v, const GeneralizedTerm& t) {
    return Atom::lt(t.numerator, v * t.denominator);
}

/// v = t  |->  c*v = u  (false exactly when c does not divide u)
inline Atom lower_eq(const LinearTerm& v, const GeneralizedTerm& t) {
    return Atom::eq(v * t.denominator, t.numerator);
}

/// v = floor(t)  |->  c*v <= u < c*v + c  (a plain equation when c = 1)
inline std::vector<Atom> lower_eq_floor(const LinearTerm& v, const GeneralizedTerm& t) {
    if (t.denominator == 1) return {Atom::eq(v, t.numerator)};
    LinearTerm cv = v * t.denominator;
    return {Atom::lt(cv - LinearTerm(1), t.numerator),
            Atom::lt(t.numerator, cv + LinearTerm(t.denominator))};
}

/// v >= floor(t)  |->  u < c*v + c
inline Atom lower_ge_floor(const LinearTerm& v, const GeneralizedTerm& t) {
    return Atom::lt(t.numerator, v * t.denominator + LinearTerm(t.denominator));
}

/// v = ceil(t)  |->  u <= c*v < u + c  (a plain equation when c = 1)
inline std::vector<Atom> lower_eq_ceil(const LinearTerm& v, const GeneralizedTerm& t) {
    if (t.denominator == 1) return {Atom::eq(v, t.numerator)};
    LinearTerm cv = v * t.denominator;
    return {Atom::lt(t.numerator - LinearTerm(1), cv),
            Atom::lt(cv, t.numerator + LinearTerm(t.denominator))};
}

/// v <= ceil(t)  |->  c*v < u + c
inline Atom lower_le_ceil(const LinearTerm& v, const GeneralizedTerm& t) {
    return Atom::lt(v * t.denominator, t.numerator + LinearTerm(t.denominator));
}

/// v = ceil((t1 - t2)/l)  |->  l*(v-1) < t1 - t2 <= l*v
inline std::vector<Atom> lower_eq_ceil_div(const LinearTerm& v, const LinearTerm& t1,
                                           const LinearTerm& t2, const Int& l) {
    if (l == 1) return {Atom::eq(v + t2, t1)};
    LinearTerm lv = v * l;
    return {Atom::lt(lv - LinearTerm(l) + t2, t1), Atom::lt(t1, lv + t2 + LinearTerm(1))};
}

/// s < t for two generalized terms s = a/p, t = b/q  |->  q*a < p*b
inline Atom lower_lt_between(const GeneralizedTerm& s, const GeneralizedTerm& t) {
    return Atom::lt(s.numerator * t.denominator, t.numerator * s.denominator);
}

/// s = t  |->  q*a = p*b
inline Atom lower_eq_between(const GeneralizedTerm& s, const GeneralizedTerm& t) {
    return Atom::eq(s.numerator * t.denominator, t.numerator * s.denominator);
}

/// s == t (mod n)  |->  q*a == p*b (mod n*p*q), using the rational extension
/// of congruence (the difference is an integer multiple of n).
inline Atom lower_cong_between(const GeneralizedTerm& s, const GeneralizedTerm& t, const Int& n) {
    Int m = n * s.denominator * t.denominator;
    return Atom::cong(s.numerator * t.denominator, t.numerator * s.denominator, m);
}

// ---------------------------------------------------------------------------

namespace detail {

inline Formula negate_presb_atom(const Atom& a) {
    switch (a.kind()) {
        case AtomKind::Eq:
            return Formula::atom(Atom::lt(a.lhs(), a.rhs())) ||
                   Formula::atom(Atom::lt(a.rhs(), a.lhs()));
        case AtomKind::Lt:
            return Formula::atom(Atom::eq(a.lhs(), a.rhs())) ||
                   Formula::atom(Atom::lt(a.rhs(), a.lhs()));
        case AtomKind::CongMod: {
            std::vector<Formula> parts;
            for (Int i = 1; i < a.modulus(); ++i)
                parts.push_back(
                    Formula::atom(Atom::cong(a.lhs(), a.rhs() + LinearTerm(i), a.modulus())));
            return Formula::disjunction(std::move(parts));  // empty for n = 1: unsatisfiable
        }
        case AtomKind::Relation:
            throw NotPresbAtom("cannot produce a negation-free form of !" + a.relation_name());
    }
    return Formula::bottom();
}

inline Formula push_negations_rec(const Formula& f, bool negated) {
    switch (f.kind()) {
        case NodeKind::Atom:
            return negated ? negate_presb_atom(f.as_atom()) : f;
        case NodeKind::Not:
            return push_negations_rec(f.child(0), !negated);
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> parts;
            parts.reserve(f.children().size());
            for (const auto& c : f.children()) parts.push_back(push_negations_rec(c, negated));
            bool conj = (f.kind() == NodeKind::And) != negated;
            return conj ? Formula::conjunction(std::move(parts))
                        : Formula::disjunction(std::move(parts));
        }
        case NodeKind::Implies: {
            if (negated)
                return push_negations_rec(f.child(0), false) &&
                       push_negations_rec(f.child(1), true);
            return push_negations_rec(f.child(0), true) || push_negations_rec(f.child(1), false);
        }
        case NodeKind::Iff: {
            Formula a = f.child(0), b = f.child(1);
            if (negated)
                return (push_negations_rec(a, false) && push_negations_rec(b, true)) ||
                       (push_negations_rec(a, true) && push_negations_rec(b, false));
            return (push_negations_rec(a, false) && push_negations_rec(b, false)) ||
                   (push_negations_rec(a, true) && push_negations_rec(b, true));
        }
        default:
            throw UnsupportedNode("negation pushing expects a quantifier-free formula");
    }
}

}  // namespace detail

/// Negation-free equivalent of a quantifier-free, counting-free formula:
/// connectives are expanded and negations land on atoms, where
/// !(t = t') becomes t < t' | t' < t, !(t < t') becomes t = t' | t' < t, and
/// a negated congruence becomes the disjunction over the other residues.
inline Formula push_negations(const Formula& f) {
    return detail::push_negations_rec(f, false);
}

}  // namespace countpa
