#pragma once

#include <sstream>
#include <string>

#include "countpa/formula.hpp"

namespace countpa {

inline std::string print_term(const LinearTerm& t) {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const Int& coeff, const std::string& piece) {
        Int a = coeff < 0 ? Int(-coeff) : coeff;
        if (first) {
            if (coeff < 0) os << "-";
            first = false;
        } else {
            os << (coeff < 0 ? " - " : " + ");
        }
        if (piece.empty()) {
            os << a;
        } else if (a == 1) {
            os << piece;
        } else {
            os << a << "*" << piece;
        }
    };
    for (const auto& [v, c] : t.coeffs()) emit(c, v);
    if (t.constant() != 0 || first) emit(t.constant(), "");
    return os.str();
}

inline std::string print_atom(const Atom& a) {
    std::ostringstream os;
    switch (a.kind()) {
        case AtomKind::Eq: os << print_term(a.lhs()) << " = " << print_term(a.rhs()); break;
        case AtomKind::Lt: os << print_term(a.lhs()) << " < " << print_term(a.rhs()); break;
        case AtomKind::CongMod:
            os << print_term(a.lhs()) << " == " << print_term(a.rhs()) << " mod " << a.modulus();
            break;
        case AtomKind::Relation: {
            os << a.relation_name() << "(";
            bool first = true;
            for (const auto& arg : a.args()) {
                if (!first) os << ", ";
                first = false;
                os << print_term(arg);
            }
            os << ")";
            break;
        }
    }
    return os.str();
}

namespace detail {

// Binding strength; higher binds tighter. Quantifier bodies extend maximally,
// so a quantifier under any connective is parenthesized.
inline int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Iff: return 1;
        case NodeKind::Implies: return 2;
        case NodeKind::Or: return 3;
        case NodeKind::And: return 4;
        case NodeKind::Not: return 5;
        case NodeKind::Atom: return 6;
        default: return 0;  // quantifiers
    }
}

inline void print_rec(const Formula& f, int parent_prec, std::ostringstream& os) {
    int prec = precedence(f.kind());
    bool need_parens = prec < parent_prec || (prec == 0 && parent_prec > 0);
    if (need_parens) os << "(";
    switch (f.kind()) {
        case NodeKind::Atom: os << print_atom(f.as_atom()); break;
        case NodeKind::Not:
            os << "!";
            print_rec(f.child(0), precedence(NodeKind::Not) + 1, os);
            break;
        case NodeKind::And:
        case NodeKind::Or: {
            const char* sep = f.kind() == NodeKind::And ? " & " : " | ";
            bool first = true;
            for (const auto& c : f.children()) {
                if (!first) os << sep;
                first = false;
                // children at prec+1: nested same-kind nodes cannot occur
                // (flattened), and lower-precedence children get parens
                print_rec(c, prec + 1, os);
            }
            break;
        }
        case NodeKind::Implies:
            print_rec(f.child(0), prec + 1, os);
            os << " -> ";
            print_rec(f.child(1), prec, os);  // right associative
            break;
        case NodeKind::Iff:
            print_rec(f.child(0), prec + 1, os);
            os << " <-> ";
            print_rec(f.child(1), prec, os);
            break;
        case NodeKind::Exists:
        case NodeKind::Forall:
            os << (f.kind() == NodeKind::Exists ? "E " : "A ") << f.var() << ". ";
            print_rec(f.body(), 0, os);
            break;
        case NodeKind::CountExists: {
            os << "E[";
            bool first = true;
            for (const auto& x : f.count_vars()) {
                if (!first) os << ",";
                first = false;
                os << x;
            }
            os << "] ";
            first = true;
            for (const auto& y : f.bound_vars()) {
                if (!first) os << ",";
                first = false;
                os << y;
            }
            os << ". ";
            print_rec(f.body(), 0, os);
            break;
        }
        case NodeKind::Majority: {
            os << "M ";
            bool first = true;
            for (const auto& y : f.bound_vars()) {
                if (!first) os << ",";
                first = false;
                os << y;
            }
            os << ". ";
            print_rec(f.body(), 0, os);
            break;
        }
    }
    if (need_parens) os << ")";
}

}  // namespace detail

inline std::string print_formula(const Formula& f) {
    std::ostringstream os;
    detail::print_rec(f, 0, os);
    return os.str();
}

}  // namespace countpa
