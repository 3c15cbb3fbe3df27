#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "countpa/formula.hpp"

namespace countpa {

using Json = nlohmann::ordered_json;

inline Json term_to_json(const LinearTerm& t) {
    Json coeffs = Json::object();
    for (const auto& [v, c] : t.coeffs()) coeffs[v] = c.str();
    return Json{{"coeffs", coeffs}, {"const", t.constant().str()}};
}

inline LinearTerm term_from_json(const Json& j) {
    LinearTerm t(Int(j.at("const").get<std::string>()));
    for (const auto& [v, c] : j.at("coeffs").items())
        t += LinearTerm::variable(v, Int(c.get<std::string>()));
    return t;
}

inline Json atom_to_json(const Atom& a) {
    switch (a.kind()) {
        case AtomKind::Eq:
            return Json{{"kind", "atom"},
                        {"op", "eq"},
                        {"lhs", term_to_json(a.lhs())},
                        {"rhs", term_to_json(a.rhs())}};
        case AtomKind::Lt:
            return Json{{"kind", "atom"},
                        {"op", "lt"},
                        {"lhs", term_to_json(a.lhs())},
                        {"rhs", term_to_json(a.rhs())}};
        case AtomKind::CongMod:
            return Json{{"kind", "atom"},
                        {"op", "cong"},
                        {"mod", a.modulus().str()},
                        {"lhs", term_to_json(a.lhs())},
                        {"rhs", term_to_json(a.rhs())}};
        case AtomKind::Relation: {
            Json args = Json::array();
            for (const auto& arg : a.args()) args.push_back(term_to_json(arg));
            return Json{{"kind", "atom"}, {"op", "rel"}, {"name", a.relation_name()},
                        {"args", args}};
        }
    }
    return {};
}

inline Atom atom_from_json(const Json& j) {
    const std::string op = j.at("op").get<std::string>();
    if (op == "eq") return Atom::eq(term_from_json(j.at("lhs")), term_from_json(j.at("rhs")));
    if (op == "lt") return Atom::lt(term_from_json(j.at("lhs")), term_from_json(j.at("rhs")));
    if (op == "cong")
        return Atom::cong(term_from_json(j.at("lhs")), term_from_json(j.at("rhs")),
                          Int(j.at("mod").get<std::string>()));
    if (op == "rel") {
        std::vector<LinearTerm> args;
        for (const auto& a : j.at("args")) args.push_back(term_from_json(a));
        return Atom::relation(j.at("name").get<std::string>(), std::move(args));
    }
    throw InvalidParams("unknown atom op in JSON: " + op);
}

inline Json formula_to_json(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Atom: return atom_to_json(f.as_atom());
        case NodeKind::Not: return Json{{"kind", "not"}, {"child", formula_to_json(f.child(0))}};
        case NodeKind::And:
        case NodeKind::Or: {
            Json kids = Json::array();
            for (const auto& c : f.children()) kids.push_back(formula_to_json(c));
            return Json{{"kind", f.kind() == NodeKind::And ? "and" : "or"}, {"children", kids}};
        }
        case NodeKind::Implies:
            return Json{{"kind", "implies"},
                        {"lhs", formula_to_json(f.child(0))},
                        {"rhs", formula_to_json(f.child(1))}};
        case NodeKind::Iff:
            return Json{{"kind", "iff"},
                        {"lhs", formula_to_json(f.child(0))},
                        {"rhs", formula_to_json(f.child(1))}};
        case NodeKind::Exists:
        case NodeKind::Forall:
            return Json{{"kind", f.kind() == NodeKind::Exists ? "exists" : "forall"},
                        {"var", f.var()},
                        {"body", formula_to_json(f.body())}};
        case NodeKind::CountExists:
            return Json{{"kind", "count_exists"},
                        {"count_vars", f.count_vars()},
                        {"bound_vars", f.bound_vars()},
                        {"body", formula_to_json(f.body())}};
        case NodeKind::Majority:
            return Json{{"kind", "majority"},
                        {"bound_vars", f.bound_vars()},
                        {"body", formula_to_json(f.body())}};
    }
    return {};
}

inline Formula formula_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "atom") return Formula::atom(atom_from_json(j));
    if (kind == "not") return Formula::negation(formula_from_json(j.at("child")));
    if (kind == "and" || kind == "or") {
        std::vector<Formula> kids;
        for (const auto& c : j.at("children")) kids.push_back(formula_from_json(c));
        return kind == "and" ? Formula::conjunction(std::move(kids))
                             : Formula::disjunction(std::move(kids));
    }
    if (kind == "implies")
        return Formula::implies(formula_from_json(j.at("lhs")), formula_from_json(j.at("rhs")));
    if (kind == "iff")
        return Formula::iff(formula_from_json(j.at("lhs")), formula_from_json(j.at("rhs")));
    if (kind == "exists")
        return Formula::exists(j.at("var").get<std::string>(), formula_from_json(j.at("body")));
    if (kind == "forall")
        return Formula::forall(j.at("var").get<std::string>(), formula_from_json(j.at("body")));
    if (kind == "count_exists")
        return Formula::count_exists(j.at("count_vars").get<std::vector<std::string>>(),
                                     j.at("bound_vars").get<std::vector<std::string>>(),
                                     formula_from_json(j.at("body")));
    if (kind == "majority")
        return Formula::majority(j.at("bound_vars").get<std::vector<std::string>>(),
                                 formula_from_json(j.at("body")));
    throw InvalidParams("unknown formula kind in JSON: " + kind);
}

}  // namespace countpa
