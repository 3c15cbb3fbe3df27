#pragma once

#include <map>
#include <set>
#include <string>

#include "countpa/errors.hpp"

namespace countpa {

/// Vocabulary a parsed formula may draw from. The congruence family (one
/// binary relation per modulus n >= 1) is controlled by a single flag rather
/// than enumerated.
struct Signature {
    std::set<std::string> constants;
    std::map<std::string, int> relations;
    std::map<std::string, int> functions;
    bool moduli_allowed = true;

    /// {0, 1, f_+, <, congruences}: addition as a binary function, so terms
    /// are arbitrary linear combinations.
    static Signature presb() {
        Signature s;
        s.constants = {"0", "1"};
        s.functions["f_+"] = 2;
        s.relations["<"] = 2;
        s.moduli_allowed = true;
        return s;
    }

    /// {0, 1, plus, <, congruences}: addition as a ternary relation, for
    /// initial segments where sums can leave the universe.
    static Signature presb_relational() {
        Signature s;
        s.constants = {"0", "1"};
        s.relations["plus"] = 3;
        s.relations["<"] = 2;
        s.moduli_allowed = true;
        return s;
    }

    Signature& with_relation(const std::string& name, int arity) {
        if (arity < 1) throw InvalidParams("relation arity must be >= 1");
        relations[name] = arity;
        return *this;
    }

    bool has_addition_function() const { return functions.count("f_+") != 0; }
    bool has_order() const { return relations.count("<") != 0; }

    int relation_arity(const std::string& name) const {
        auto it = relations.find(name);
        if (it == relations.end()) throw SignatureError("unknown relation symbol: " + name);
        return it->second;
    }
};

}  // namespace countpa
