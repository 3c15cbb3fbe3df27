#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "countpa/errors.hpp"
#include "countpa/term.hpp"

namespace countpa {

/// Total map from variables to integer values.
using Assignment = std::map<Var, Int>;

enum class AtomKind { Eq, Lt, CongMod, Relation };

/// Atomic constraint between two linear terms (t = t', t < t', t == t' mod n)
/// or an applied relation symbol R(t1, ..., tk).
class Atom {
public:
    static Atom eq(LinearTerm lhs, LinearTerm rhs) {
        return Atom(AtomKind::Eq, std::move(lhs), std::move(rhs), 0, {}, {});
    }
    static Atom lt(LinearTerm lhs, LinearTerm rhs) {
        return Atom(AtomKind::Lt, std::move(lhs), std::move(rhs), 0, {}, {});
    }
    static Atom cong(LinearTerm lhs, LinearTerm rhs, Int modulus) {
        if (modulus < 1) throw InvalidParams("congruence modulus must be >= 1");
        return Atom(AtomKind::CongMod, std::move(lhs), std::move(rhs), std::move(modulus), {}, {});
    }
    static Atom relation(std::string name, std::vector<LinearTerm> args) {
        return Atom(AtomKind::Relation, {}, {}, 0, std::move(name), std::move(args));
    }

    AtomKind kind() const { return kind_; }
    const LinearTerm& lhs() const { return lhs_; }
    const LinearTerm& rhs() const { return rhs_; }
    const Int& modulus() const { return modulus_; }
    const std::string& relation_name() const { return relation_; }
    const std::vector<LinearTerm>& args() const { return args_; }

    bool is_presb() const { return kind_ != AtomKind::Relation; }

    void collect_variables(std::set<Var>& out) const {
        if (kind_ == AtomKind::Relation) {
            for (const auto& a : args_) a.collect_variables(out);
        } else {
            lhs_.collect_variables(out);
            rhs_.collect_variables(out);
        }
    }

    std::set<Var> variables() const {
        std::set<Var> out;
        collect_variables(out);
        return out;
    }

    bool mentions(const Var& v) const {
        if (kind_ == AtomKind::Relation) {
            return std::any_of(args_.begin(), args_.end(),
                               [&](const LinearTerm& t) { return t.mentions(v); });
        }
        return lhs_.mentions(v) || rhs_.mentions(v);
    }

    Atom substituted(const Var& v, const LinearTerm& t) const {
        Atom out = *this;
        if (kind_ == AtomKind::Relation) {
            for (auto& a : out.args_) a = a.substituted(v, t);
        } else {
            out.lhs_ = lhs_.substituted(v, t);
            out.rhs_ = rhs_.substituted(v, t);
        }
        return out;
    }

    /// Truth of a non-relation atom under integer values for its variables.
    bool evaluate(const std::function<Int(const Var&)>& value_of) const {
        switch (kind_) {
            case AtomKind::Eq: return lhs_.evaluate(value_of) == rhs_.evaluate(value_of);
            case AtomKind::Lt: return lhs_.evaluate(value_of) < rhs_.evaluate(value_of);
            case AtomKind::CongMod:
                return mod_floor(lhs_.evaluate(value_of) - rhs_.evaluate(value_of), modulus_) == 0;
            case AtomKind::Relation:
                throw UnsupportedNode("relation atom requires a structure to evaluate");
        }
        return false;
    }

    bool operator==(const Atom&) const = default;
    bool operator<(const Atom& o) const {
        if (kind_ != o.kind_) return kind_ < o.kind_;
        if (!(lhs_ == o.lhs_)) return lhs_ < o.lhs_;
        if (!(rhs_ == o.rhs_)) return rhs_ < o.rhs_;
        if (modulus_ != o.modulus_) return modulus_ < o.modulus_;
        if (relation_ != o.relation_) return relation_ < o.relation_;
        return args_ < o.args_;
    }

private:
    Atom(AtomKind kind, LinearTerm lhs, LinearTerm rhs, Int modulus, std::string relation,
         std::vector<LinearTerm> args)
        : kind_(kind),
          lhs_(std::move(lhs)),
          rhs_(std::move(rhs)),
          modulus_(std::move(modulus)),
          relation_(std::move(relation)),
          args_(std::move(args)) {}

    AtomKind kind_;
    LinearTerm lhs_, rhs_;
    Int modulus_;
    std::string relation_;
    std::vector<LinearTerm> args_;
};

enum class NodeKind { Atom, Not, And, Or, Implies, Iff, Exists, Forall, CountExists, Majority };

/// Immutable formula tree. And/Or are n-ary and flatten on construction, so a
/// printed formula reparses to a structurally identical tree.
class Formula {
public:
    Formula() : Formula(top()) {}

    static Formula atom(Atom a) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Atom;
        n->atom = std::move(a);
        return Formula(std::move(n));
    }

    /// 0 = 0
    static Formula top() { return atom(Atom::eq(LinearTerm(0), LinearTerm(0))); }
    /// 0 < 0
    static Formula bottom() { return atom(Atom::lt(LinearTerm(0), LinearTerm(0))); }

    static Formula negation(Formula f) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Not;
        n->children.push_back(std::move(f));
        return Formula(std::move(n));
    }

    static Formula conjunction(std::vector<Formula> parts) {
        return nary(NodeKind::And, std::move(parts));
    }
    static Formula disjunction(std::vector<Formula> parts) {
        return nary(NodeKind::Or, std::move(parts));
    }

    static Formula implies(Formula a, Formula b) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Implies;
        n->children.push_back(std::move(a));
        n->children.push_back(std::move(b));
        return Formula(std::move(n));
    }

    static Formula iff(Formula a, Formula b) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Iff;
        n->children.push_back(std::move(a));
        n->children.push_back(std::move(b));
        return Formula(std::move(n));
    }

    static Formula exists(Var v, Formula body) {
        return quant(NodeKind::Exists, std::move(v), std::move(body));
    }
    static Formula forall(Var v, Formula body) {
        return quant(NodeKind::Forall, std::move(v), std::move(body));
    }

    static Formula count_exists(std::vector<Var> count_vars, std::vector<Var> bound_vars,
                                Formula body) {
        if (count_vars.empty() || count_vars.size() != bound_vars.size())
            throw InvalidParams("counting quantifier needs k >= 1 count and k bound variables");
        std::set<Var> all(count_vars.begin(), count_vars.end());
        all.insert(bound_vars.begin(), bound_vars.end());
        if (all.size() != count_vars.size() + bound_vars.size())
            throw InvalidParams("counting quantifier variables must be pairwise distinct");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::CountExists;
        n->count_vars = std::move(count_vars);
        n->bound_vars = std::move(bound_vars);
        n->children.push_back(std::move(body));
        return Formula(std::move(n));
    }

    static Formula majority(std::vector<Var> bound_vars, Formula body) {
        if (bound_vars.empty() || bound_vars.size() > 2)
            throw InvalidParams("majority quantifier binds one or two variables");
        std::set<Var> all(bound_vars.begin(), bound_vars.end());
        if (all.size() != bound_vars.size())
            throw InvalidParams("majority quantifier variables must be pairwise distinct");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Majority;
        n->bound_vars = std::move(bound_vars);
        n->children.push_back(std::move(body));
        return Formula(std::move(n));
    }

    NodeKind kind() const { return node_->kind; }
    const Atom& as_atom() const { return *node_->atom; }
    const std::vector<Formula>& children() const { return node_->children; }
    const Formula& child(size_t i) const { return node_->children[i]; }
    const Formula& body() const { return node_->children.back(); }
    const Var& var() const { return node_->bound_vars[0]; }
    const std::vector<Var>& count_vars() const { return node_->count_vars; }
    const std::vector<Var>& bound_vars() const { return node_->bound_vars; }

    bool is_atom() const { return node_->kind == NodeKind::Atom; }
    bool is_quantifier() const {
        auto k = node_->kind;
        return k == NodeKind::Exists || k == NodeKind::Forall || k == NodeKind::CountExists ||
               k == NodeKind::Majority;
    }

    bool operator==(const Formula& o) const {
        if (node_ == o.node_) return true;
        if (node_->kind != o.node_->kind) return false;
        if (node_->atom != o.node_->atom) return false;
        if (node_->count_vars != o.node_->count_vars) return false;
        if (node_->bound_vars != o.node_->bound_vars) return false;
        return node_->children == o.node_->children;
    }

private:
    struct Node {
        NodeKind kind;
        std::optional<Atom> atom;
        std::vector<Formula> children;
        std::vector<Var> count_vars;
        std::vector<Var> bound_vars;
    };

    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Formula quant(NodeKind kind, Var v, Formula body) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->bound_vars.push_back(std::move(v));
        n->children.push_back(std::move(body));
        return Formula(std::move(n));
    }

    static Formula nary(NodeKind kind, std::vector<Formula> parts) {
        if (parts.empty()) return kind == NodeKind::And ? top() : bottom();
        if (parts.size() == 1) return std::move(parts[0]);
        auto n = std::make_shared<Node>();
        n->kind = kind;
        for (auto& p : parts) {
            if (p.kind() == kind) {
                for (const auto& c : p.children()) n->children.push_back(c);
            } else {
                n->children.push_back(std::move(p));
            }
        }
        return Formula(std::move(n));
    }

    std::shared_ptr<const Node> node_;
};

inline Formula operator&&(Formula a, Formula b) {
    return Formula::conjunction({std::move(a), std::move(b)});
}
inline Formula operator||(Formula a, Formula b) {
    return Formula::disjunction({std::move(a), std::move(b)});
}
inline Formula operator!(Formula a) { return Formula::negation(std::move(a)); }

namespace detail {

inline void free_vars_rec(const Formula& f, std::set<Var>& bound, std::set<Var>& out) {
    switch (f.kind()) {
        case NodeKind::Atom: {
            std::set<Var> vs = f.as_atom().variables();
            for (const auto& v : vs)
                if (!bound.count(v)) out.insert(v);
            return;
        }
        case NodeKind::Exists:
        case NodeKind::Forall:
        case NodeKind::Majority: {
            std::vector<Var> newly;
            for (const auto& v : f.bound_vars())
                if (bound.insert(v).second) newly.push_back(v);
            free_vars_rec(f.body(), bound, out);
            for (const auto& v : newly) bound.erase(v);
            return;
        }
        case NodeKind::CountExists: {
            // free(E[x] y. phi) = {x} together with free(phi) minus {y}
            for (const auto& x : f.count_vars())
                if (!bound.count(x)) out.insert(x);
            std::vector<Var> newly;
            for (const auto& v : f.bound_vars())
                if (bound.insert(v).second) newly.push_back(v);
            free_vars_rec(f.body(), bound, out);
            for (const auto& v : newly) bound.erase(v);
            return;
        }
        default:
            for (const auto& c : f.children()) free_vars_rec(c, bound, out);
    }
}

}  // namespace detail

inline std::set<Var> free_vars(const Formula& f) {
    std::set<Var> bound, out;
    detail::free_vars_rec(f, bound, out);
    return out;
}

/// Every variable occurring anywhere in the formula, free or bound.
inline std::set<Var> all_vars(const Formula& f) {
    std::set<Var> out;
    if (f.kind() == NodeKind::Atom) {
        f.as_atom().collect_variables(out);
        return out;
    }
    for (const auto& v : f.count_vars()) out.insert(v);
    for (const auto& v : f.bound_vars()) out.insert(v);
    for (const auto& c : f.children()) {
        auto sub = all_vars(c);
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

namespace detail {

inline Formula substitute_rec(const Formula& f, const Var& v, const LinearTerm& t,
                              const std::set<Var>& repl_vars) {
    switch (f.kind()) {
        case NodeKind::Atom:
            return Formula::atom(f.as_atom().substituted(v, t));
        case NodeKind::Not:
            return Formula::negation(substitute_rec(f.child(0), v, t, repl_vars));
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> parts;
            parts.reserve(f.children().size());
            for (const auto& c : f.children()) parts.push_back(substitute_rec(c, v, t, repl_vars));
            return f.kind() == NodeKind::And ? Formula::conjunction(std::move(parts))
                                             : Formula::disjunction(std::move(parts));
        }
        case NodeKind::Implies:
            return Formula::implies(substitute_rec(f.child(0), v, t, repl_vars),
                                    substitute_rec(f.child(1), v, t, repl_vars));
        case NodeKind::Iff:
            return Formula::iff(substitute_rec(f.child(0), v, t, repl_vars),
                                substitute_rec(f.child(1), v, t, repl_vars));
        case NodeKind::Exists:
        case NodeKind::Forall:
        case NodeKind::CountExists:
        case NodeKind::Majority: {
            const auto& binders = f.bound_vars();
            bool binds_v = std::find(binders.begin(), binders.end(), v) != binders.end();
            // A counting quantifier's count variables are free occurrences,
            // but the position only holds a variable: renaming is the one
            // substitution it supports.
            std::vector<Var> cvars = f.count_vars();
            if (f.kind() == NodeKind::CountExists) {
                for (auto& x : cvars) {
                    if (x == v) {
                        auto sv = t.single_variable();
                        if (!sv)
                            throw CaptureError(
                                "cannot substitute a non-variable term into a count position");
                        x = *sv;
                    }
                }
            }
            if (!binds_v && free_vars(f.body()).count(v)) {
                for (const auto& b : binders)
                    if (repl_vars.count(b))
                        throw CaptureError("substitution would capture variable " + b);
            }
            Formula new_body =
                binds_v ? f.body() : substitute_rec(f.body(), v, t, repl_vars);
            switch (f.kind()) {
                case NodeKind::Exists: return Formula::exists(binders[0], std::move(new_body));
                case NodeKind::Forall: return Formula::forall(binders[0], std::move(new_body));
                case NodeKind::CountExists:
                    return Formula::count_exists(cvars, binders, std::move(new_body));
                default: return Formula::majority(binders, std::move(new_body));
            }
        }
    }
    return f;
}

}  // namespace detail

/// Replace every free occurrence of `v` by the term `t`. Throws CaptureError
/// when a free variable of `t` would be captured by a binder.
inline Formula substitute(const Formula& f, const Var& v, const LinearTerm& t) {
    return detail::substitute_rec(f, v, t, t.variables());
}

/// Deterministic fresh name: the hint itself if unused, else hint_1, hint_2, ...
inline Var fresh_var(const std::set<Var>& avoid, const std::string& hint) {
    if (!avoid.count(hint)) return hint;
    for (int i = 1;; ++i) {
        Var candidate = hint + "_" + std::to_string(i);
        if (!avoid.count(candidate)) return candidate;
    }
}

/// Fresh-name pool that remembers what it has handed out.
class VarPool {
public:
    explicit VarPool(std::set<Var> used = {}) : used_(std::move(used)) {}

    Var fresh(const std::string& hint) {
        Var v = fresh_var(used_, hint);
        used_.insert(v);
        return v;
    }

    void reserve(const std::set<Var>& vs) { used_.insert(vs.begin(), vs.end()); }
    const std::set<Var>& used() const { return used_; }

private:
    std::set<Var> used_;
};

}  // namespace countpa
