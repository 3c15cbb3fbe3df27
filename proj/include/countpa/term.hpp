#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "countpa/ints.hpp"

namespace countpa {

using Var = std::string;

/// Integer-linear combination of variables plus a constant, kept canonical:
/// zero coefficients are never stored, so structural equality is semantic
/// equality of the term.
class LinearTerm {
public:
    LinearTerm() = default;
    explicit LinearTerm(Int constant) : constant_(std::move(constant)) {}
    explicit LinearTerm(long long constant) : constant_(constant) {}

    static LinearTerm variable(const Var& v, Int coeff = 1) {
        LinearTerm t;
        if (coeff != 0) t.coeffs_[v] = std::move(coeff);
        return t;
    }

    const std::map<Var, Int>& coeffs() const { return coeffs_; }
    const Int& constant() const { return constant_; }

    Int coeff(const Var& v) const {
        auto it = coeffs_.find(v);
        return it == coeffs_.end() ? Int(0) : it->second;
    }

    bool is_constant() const { return coeffs_.empty(); }
    bool is_zero() const { return coeffs_.empty() && constant_ == 0; }

    /// The single variable if the term is exactly "v" (coefficient 1, no
    /// constant), otherwise nullopt.
    std::optional<Var> single_variable() const {
        if (constant_ == 0 && coeffs_.size() == 1 && coeffs_.begin()->second == 1)
            return coeffs_.begin()->first;
        return std::nullopt;
    }

    bool mentions(const Var& v) const { return coeffs_.count(v) != 0; }

    LinearTerm& operator+=(const LinearTerm& o) {
        for (const auto& [v, c] : o.coeffs_) add(v, c);
        constant_ += o.constant_;
        return *this;
    }

    LinearTerm& operator-=(const LinearTerm& o) {
        for (const auto& [v, c] : o.coeffs_) add(v, -c);
        constant_ -= o.constant_;
        return *this;
    }

    LinearTerm& operator*=(const Int& k) {
        if (k == 0) {
            coeffs_.clear();
            constant_ = 0;
            return *this;
        }
        for (auto& [v, c] : coeffs_) c *= k;
        constant_ *= k;
        return *this;
    }

    friend LinearTerm operator+(LinearTerm a, const LinearTerm& b) { return a += b; }
    friend LinearTerm operator-(LinearTerm a, const LinearTerm& b) { return a -= b; }
    friend LinearTerm operator*(LinearTerm a, const Int& k) { return a *= k; }
    friend LinearTerm operator*(const Int& k, LinearTerm a) { return a *= k; }
    friend LinearTerm operator-(LinearTerm a) { return a *= Int(-1); }

    /// Term with every occurrence of `v` replaced by `replacement`.
    LinearTerm substituted(const Var& v, const LinearTerm& replacement) const {
        auto it = coeffs_.find(v);
        if (it == coeffs_.end()) return *this;
        LinearTerm out = *this;
        Int k = it->second;
        out.coeffs_.erase(v);
        out += replacement * k;
        return out;
    }

    /// Term with `v` dropped entirely (as if its coefficient were zero).
    LinearTerm without(const Var& v) const {
        LinearTerm out = *this;
        out.coeffs_.erase(v);
        return out;
    }

    Int evaluate(const std::function<Int(const Var&)>& value_of) const {
        Int acc = constant_;
        for (const auto& [v, c] : coeffs_) acc += c * value_of(v);
        return acc;
    }

    void collect_variables(std::set<Var>& out) const {
        for (const auto& [v, c] : coeffs_) out.insert(v);
    }

    std::set<Var> variables() const {
        std::set<Var> out;
        collect_variables(out);
        return out;
    }

    bool operator==(const LinearTerm&) const = default;
    bool operator<(const LinearTerm& o) const {
        if (coeffs_ != o.coeffs_) return coeffs_ < o.coeffs_;
        return constant_ < o.constant_;
    }

private:
    void add(const Var& v, const Int& c) {
        auto [it, inserted] = coeffs_.try_emplace(v, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) coeffs_.erase(it);
        } else if (it->second == 0) {
            coeffs_.erase(it);
        }
    }

    std::map<Var, Int> coeffs_;
    Int constant_ = 0;
};

}  // namespace countpa
