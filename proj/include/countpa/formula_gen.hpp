#pragma once

#include <string>
#include <vector>

#include "countpa/formula.hpp"
#include "countpa/ints.hpp"

namespace countpa {

/// Base-(N+1) digit encoding of numbers below (N+1)^d; digit vectors are
/// least-significant first.
struct DTupleCodec {
    Int N;
    int d = 1;

    DTupleCodec(Int n, int width) : N(std::move(n)), d(width) {
        if (N < 1 || d < 1) throw InvalidParams("codec needs N >= 1 and d >= 1");
    }

    Int capacity() const {  // one past the largest representable value
        Int c = 1;
        for (int i = 0; i < d; ++i) c *= N + 1;
        return c;
    }

    std::vector<Int> encode(Int v) const {
        if (v < 0 || v >= capacity()) throw InvalidParams("value out of codec range");
        std::vector<Int> digits(static_cast<size_t>(d));
        Int base = N + 1;
        for (int i = 0; i < d; ++i) {
            digits[static_cast<size_t>(i)] = v % base;
            v /= base;
        }
        return digits;
    }

    Int decode(const std::vector<Int>& digits) const {
        if (static_cast<int>(digits.size()) != d) throw InvalidParams("wrong digit count");
        Int acc = 0;
        for (size_t i = digits.size(); i > 0; --i) {
            const Int& digit = digits[i - 1];
            if (digit < 0 || digit > N) throw InvalidParams("digit out of range");
            acc = acc * (N + 1) + digit;
        }
        return acc;
    }
};

namespace gen {

inline LinearTerm tv(const Var& v) { return LinearTerm::variable(v); }

inline std::vector<LinearTerm> tvs(const std::vector<Var>& vs) {
    std::vector<LinearTerm> out;
    out.reserve(vs.size());
    for (const auto& v : vs) out.push_back(tv(v));
    return out;
}

inline std::vector<Var> digit_vars(VarPool& pool, const std::string& hint, int count) {
    std::vector<Var> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(pool.fresh(hint + std::to_string(i)));
    return out;
}

inline Atom plus_atom(LinearTerm a, LinearTerm b, LinearTerm c) {
    return Atom::relation("plus", {std::move(a), std::move(b), std::move(c)});
}
inline Atom times_atom(LinearTerm a, LinearTerm b, LinearTerm c) {
    return Atom::relation("times", {std::move(a), std::move(b), std::move(c)});
}
inline Atom bit_atom(LinearTerm x, LinearTerm y) {
    return Atom::relation("bit", {std::move(x), std::move(y)});
}
inline Atom squares_atom(LinearTerm x) { return Atom::relation("squares", {std::move(x)}); }

inline Formula fa(Atom a) { return Formula::atom(std::move(a)); }

inline Formula le_or_eq(const LinearTerm& a, const LinearTerm& b) {
    return fa(Atom::lt(a, b)) || fa(Atom::eq(a, b));
}

/// m is the largest element of the universe.
inline Formula var_is_max(const Var& m, VarPool& pool) {
    Var w = pool.fresh("w");
    return Formula::forall(w, fa(Atom::lt(tv(w), tv(m))) || fa(Atom::eq(tv(w), tv(m))));
}

inline Formula exists_all(const std::vector<Var>& vs, Formula body) {
    for (size_t i = vs.size(); i > 0; --i) body = Formula::exists(vs[i - 1], std::move(body));
    return body;
}

/// a + b + cin = cout*(cap+1) + digit in base cap+1, for a, b <= cap and
/// cin in {0,1}. Emitted as a two-branch disjunction whose digit is readable
/// from either branch:
///   no carry:  digit = a + b + cin <= cap
///   carry:     digit = (b + cin - 1) - (cap - a)
inline Formula digit_add3(const LinearTerm& a, const LinearTerm& b, const LinearTerm& cin,
                          const LinearTerm& cout, const LinearTerm& digit, const Var& cap,
                          VarPool& pool) {
    Var s = pool.fresh("s");
    Formula no_carry = Formula::conjunction({
        fa(Atom::eq(cout, LinearTerm(0))),
        Formula::exists(s, fa(plus_atom(a, b, tv(s))) && fa(plus_atom(tv(s), cin, digit))),
        le_or_eq(digit, tv(cap)),
    });
    Var u = pool.fresh("u"), q = pool.fresh("q");
    Formula q_def = (fa(Atom::eq(cin, LinearTerm(0))) && fa(plus_atom(tv(q), LinearTerm(1), b))) ||
                    (fa(Atom::eq(cin, LinearTerm(1))) && fa(Atom::eq(tv(q), b)));
    Formula carry = Formula::conjunction({
        fa(Atom::eq(cout, LinearTerm(1))),
        Formula::exists(
            u, Formula::exists(q, Formula::conjunction({fa(plus_atom(a, tv(u), tv(cap))),
                                                        std::move(q_def),
                                                        fa(plus_atom(tv(u), digit, tv(q)))}))),
    });
    return std::move(no_carry) || std::move(carry);
}

/// xs + ys = zs where xs, ys have d digits and zs has d+1, in base cap+1.
inline Formula tuple_add(const std::vector<LinearTerm>& xs, const std::vector<LinearTerm>& ys,
                         const std::vector<LinearTerm>& zs, const Var& cap, VarPool& pool) {
    size_t d = xs.size();
    if (ys.size() != d || zs.size() != d + 1 || d == 0)
        throw InvalidParams("tuple_add digit-count mismatch");
    std::vector<Var> carries;
    std::vector<Formula> parts;
    LinearTerm carry_in(0);
    for (size_t i = 0; i < d; ++i) {
        LinearTerm cout;
        if (i + 1 == d) {
            cout = zs[d];
        } else {
            carries.push_back(pool.fresh("c"));
            cout = tv(carries.back());
        }
        parts.push_back(digit_add3(xs[i], ys[i], carry_in, cout, zs[i], cap, pool));
        carry_in = cout;
    }
    return exists_all(carries, Formula::conjunction(std::move(parts)));
}

inline Formula tuple_eq(const std::vector<LinearTerm>& xs, const std::vector<LinearTerm>& ys) {
    std::vector<Formula> parts;
    for (size_t i = 0; i < xs.size(); ++i) parts.push_back(fa(Atom::eq(xs[i], ys[i])));
    return Formula::conjunction(std::move(parts));
}

/// Numeric comparison of digit tuples: lexicographic from the most
/// significant digit down.
inline Formula tuple_lt(const std::vector<LinearTerm>& xs, const std::vector<LinearTerm>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw InvalidParams("tuple_lt digit mismatch");
    Formula acc = fa(Atom::lt(xs[0], ys[0]));
    for (size_t i = 1; i < xs.size(); ++i)
        acc = fa(Atom::lt(xs[i], ys[i])) || (fa(Atom::eq(xs[i], ys[i])) && std::move(acc));
    return acc;
}

inline Formula tuple_le(const std::vector<LinearTerm>& xs, const std::vector<LinearTerm>& ys) {
    return tuple_lt(xs, ys) || tuple_eq(xs, ys);
}

/// Sum of several d-digit tuples equals a d-digit tuple, all in base cap+1.
/// Every intermediate carry out of the top digit is pinned to zero, so this
/// is only used where the true sum is known to fit in d digits.
inline Formula tuple_sum_equals(const std::vector<std::vector<LinearTerm>>& summands,
                                const std::vector<LinearTerm>& target, const Var& cap,
                                VarPool& pool) {
    size_t d = target.size();
    if (summands.empty()) {
        std::vector<Formula> parts;
        for (const auto& t : target) parts.push_back(fa(Atom::eq(t, LinearTerm(0))));
        return Formula::conjunction(std::move(parts));
    }
    std::vector<LinearTerm> acc = summands[0];
    if (acc.size() != d) throw InvalidParams("summand digit mismatch");
    if (summands.size() == 1) return tuple_eq(acc, target);
    std::vector<Var> bound;
    std::vector<Formula> parts;
    for (size_t j = 1; j < summands.size(); ++j) {
        if (summands[j].size() != d) throw InvalidParams("summand digit mismatch");
        std::vector<LinearTerm> out;
        if (j + 1 == summands.size()) {
            out = target;
        } else {
            std::vector<Var> vs = digit_vars(pool, "p", static_cast<int>(d));
            bound.insert(bound.end(), vs.begin(), vs.end());
            out = tvs(vs);
        }
        out.push_back(LinearTerm(0));  // no overflow past the top digit
        parts.push_back(tuple_add(acc, summands[j], out, cap, pool));
        out.pop_back();
        acc = out;
    }
    return exists_all(bound, Formula::conjunction(std::move(parts)));
}

/// Congruence of two d-digit tuple values modulo n: their difference is a
/// nonnegative tuple that is a sum of n equal tuples.
inline Formula tuple_cong(const std::vector<LinearTerm>& xs, const std::vector<LinearTerm>& ys,
                          const Int& n, const Var& cap, VarPool& pool) {
    size_t d = xs.size();
    std::vector<Var> diff = digit_vars(pool, "df", static_cast<int>(d));
    std::vector<Var> q = digit_vars(pool, "qd", static_cast<int>(d));
    std::vector<LinearTerm> diff_t = tvs(diff), q_t = tvs(q);
    Formula way1 = tuple_sum_equals({ys, diff_t}, xs, cap, pool);
    Formula way2 = tuple_sum_equals({xs, diff_t}, ys, cap, pool);
    std::vector<std::vector<LinearTerm>> copies(static_cast<size_t>(n.convert_to<long long>()),
                                                q_t);
    Formula divisible = exists_all(q, tuple_sum_equals(copies, diff_t, cap, pool));
    return exists_all(diff, (std::move(way1) || std::move(way2)) && std::move(divisible));
}

// -----------------------------------------------------------------------
// Multiplication on initial segments, built from the square-root base.

/// z is the largest element whose square is in the universe.
inline Formula sqrt_base(const Var& z, VarPool& pool) {
    Var y = pool.fresh("sy"), zp = pool.fresh("zp"), yp = pool.fresh("yp");
    Formula no_bigger = Formula::forall(
        zp, Formula::implies(fa(Atom::lt(tv(z), tv(zp))),
                             !Formula::exists(yp, fa(times_atom(tv(zp), tv(zp), tv(yp))))));
    return Formula::exists(y, fa(times_atom(tv(z), tv(z), tv(y))) && std::move(no_bigger));
}

/// x = u1*(M+1) + u0 where M is the value of `base` and u1, u0 <= M.
inline Formula base_decompose(const LinearTerm& x, const LinearTerm& u1, const LinearTerm& u0,
                              const Var& base, VarPool& pool) {
    Var v = pool.fresh("dv"), w = pool.fresh("dw");
    return Formula::conjunction({
        le_or_eq(u1, tv(base)),
        le_or_eq(u0, tv(base)),
        Formula::exists(
            v, Formula::exists(w, fa(times_atom(u1, tv(base), tv(v))) &&
                                      fa(plus_atom(tv(v), u1, tv(w))) &&
                                      fa(plus_atom(tv(w), u0, x)))),
    });
}

/// u*v = w1*(M+1) + w0 for u, v <= M, via the universe product relation.
inline Formula small_product(const LinearTerm& u, const LinearTerm& v, const LinearTerm& w1,
                             const LinearTerm& w0, const Var& base, VarPool& pool) {
    Var w = pool.fresh("pw");
    return Formula::exists(w, base_decompose(tv(w), w1, w0, base, pool) &&
                                  fa(times_atom(u, v, tv(w))));
}

/// Two-digit times two-digit in base M+1 giving four digits (lsb first).
inline Formula product_2x2(const LinearTerm& u1, const LinearTerm& u0, const LinearTerm& v1,
                           const LinearTerm& v0, const std::vector<LinearTerm>& w,
                           const Var& base, VarPool& pool) {
    std::vector<Var> a = digit_vars(pool, "ma", 2), b = digit_vars(pool, "mb", 2),
                     c = digit_vars(pool, "mc", 2), e = digit_vars(pool, "me", 2);
    std::vector<Formula> parts;
    parts.push_back(small_product(u1, v1, tv(a[1]), tv(a[0]), base, pool));
    parts.push_back(small_product(u1, v0, tv(b[1]), tv(b[0]), base, pool));
    parts.push_back(small_product(u0, v1, tv(c[1]), tv(c[0]), base, pool));
    parts.push_back(small_product(u0, v0, tv(e[1]), tv(e[0]), base, pool));
    LinearTerm zero(0);
    parts.push_back(tuple_sum_equals(
        {
            {zero, zero, tv(a[0]), tv(a[1])},  // u1*v1 shifted two digits
            {zero, tv(b[0]), tv(b[1]), zero},
            {zero, tv(c[0]), tv(c[1]), zero},
            {tv(e[0]), tv(e[1]), zero, zero},
        },
        w, base, pool));
    std::vector<Var> bound;
    for (auto* vs : {&a, &b, &c, &e}) bound.insert(bound.end(), vs->begin(), vs->end());
    return exists_all(bound, Formula::conjunction(std::move(parts)));
}

/// #(z1,z0) in base N+1 equals the four-digit value w in base M+1.
inline Formula cross_base_eq(const LinearTerm& z1, const LinearTerm& z0,
                             const std::vector<LinearTerm>& w, const Var& base, const Var& mx,
                             VarPool& pool) {
    std::vector<Var> a = digit_vars(pool, "xa", 2), b = digit_vars(pool, "xb", 2),
                     n = digit_vars(pool, "xn", 2), p = digit_vars(pool, "xp", 4);
    LinearTerm zero(0), one(1);
    // (n1, n0) is the base-(M+1) decomposition of N+1
    Var n0p = pool.fresh("n0p"), n1p = pool.fresh("n1p");
    Formula n_def =
        Formula::exists(n0p, fa(plus_atom(tv(n0p), one, tv(n[0]))) &&
                                 base_decompose(tv(mx), tv(n[1]), tv(n0p), base, pool)) ||
        (fa(Atom::eq(tv(n[0]), zero)) &&
         Formula::exists(n1p, fa(plus_atom(tv(n1p), one, tv(n[1]))) &&
                                  base_decompose(tv(mx), tv(n1p), tv(base), base, pool)));
    std::vector<Formula> parts;
    parts.push_back(base_decompose(z1, tv(a[1]), tv(a[0]), base, pool));
    parts.push_back(base_decompose(z0, tv(b[1]), tv(b[0]), base, pool));
    parts.push_back(std::move(n_def));
    parts.push_back(product_2x2(tv(a[1]), tv(a[0]), tv(n[1]), tv(n[0]), tvs(p), base, pool));
    parts.push_back(tuple_sum_equals({tvs(p), {tv(b[0]), tv(b[1]), zero, zero}}, w, base, pool));
    std::vector<Var> bound;
    for (auto* vs : {&a, &b, &n, &p}) bound.insert(bound.end(), vs->begin(), vs->end());
    return exists_all(bound, Formula::conjunction(std::move(parts)));
}

/// x*y = z1*(N+1) + z0 over the bounded product relation, by moving to
/// base M+1 with M the square-root base, multiplying 2-digit decompositions,
/// and converting the 4-digit result back.
inline Formula times_pair_core(const LinearTerm& x, const LinearTerm& y, const LinearTerm& z1,
                               const LinearTerm& z0, const Var& mx, VarPool& pool) {
    Var base = pool.fresh("sq");
    std::vector<Var> u = digit_vars(pool, "tu", 2), v = digit_vars(pool, "tv", 2),
                     w = digit_vars(pool, "tw", 4);
    std::vector<Formula> parts;
    parts.push_back(base_decompose(x, tv(u[1]), tv(u[0]), base, pool));
    parts.push_back(base_decompose(y, tv(v[1]), tv(v[0]), base, pool));
    parts.push_back(product_2x2(tv(u[1]), tv(u[0]), tv(v[1]), tv(v[0]), tvs(w), base, pool));
    parts.push_back(cross_base_eq(z1, z0, tvs(w), base, mx, pool));
    std::vector<Var> bound;
    for (auto* vs : {&u, &v, &w}) bound.insert(bound.end(), vs->begin(), vs->end());
    return Formula::exists(
        base, sqrt_base(base, pool) && exists_all(bound, Formula::conjunction(std::move(parts))));
}

/// xs * ys = zs for d-digit inputs and 2d-digit output, by the one-digit
/// split x = x_top*(N+1)^(d-1) + x_rest and four partial products.
inline Formula times_tuple_core(const std::vector<LinearTerm>& xs,
                                const std::vector<LinearTerm>& ys,
                                const std::vector<LinearTerm>& zs, const Var& mx, VarPool& pool) {
    size_t d = xs.size();
    if (ys.size() != d || zs.size() != 2 * d || d == 0)
        throw InvalidParams("times_tuple digit mismatch");
    if (d == 1) return times_pair_core(xs[0], ys[0], zs[1], zs[0], mx, pool);
    size_t D = d - 1;
    LinearTerm zero(0);
    std::vector<Formula> parts;
    std::vector<Var> bound;

    auto pad = [&](const LinearTerm& t, size_t width) {
        std::vector<LinearTerm> out(width, zero);
        out[0] = t;
        return out;
    };
    std::vector<LinearTerm> xlow(xs.begin(), xs.begin() + static_cast<long>(D));
    std::vector<LinearTerm> ylow(ys.begin(), ys.begin() + static_cast<long>(D));

    // top digit times top digit: two digits at positions 2D and 2D+1
    std::vector<Var> hp = digit_vars(pool, "hh", 2);
    bound.insert(bound.end(), hp.begin(), hp.end());
    parts.push_back(times_pair_core(xs[D], ys[D], tv(hp[1]), tv(hp[0]), mx, pool));
    std::vector<LinearTerm> u1(2 * d, zero);
    u1[2 * D] = tv(hp[0]);
    u1[2 * D + 1] = tv(hp[1]);

    // top digit times the low part, both ways: D+1 significant digits
    auto mixed = [&](const LinearTerm& top, const std::vector<LinearTerm>& low,
                     const std::string& hint) {
        std::vector<Var> p = digit_vars(pool, hint, static_cast<int>(2 * D));
        bound.insert(bound.end(), p.begin(), p.end());
        parts.push_back(times_tuple_core(pad(top, D), low, tvs(p), mx, pool));
        for (size_t i = D + 1; i < 2 * D; ++i)
            parts.push_back(fa(Atom::eq(tv(p[i]), zero)));
        std::vector<LinearTerm> shifted(2 * d, zero);
        for (size_t i = 0; i <= D && i < 2 * D; ++i) shifted[D + i] = tv(p[i]);
        return shifted;
    };
    std::vector<LinearTerm> u2 = mixed(xs[D], ylow, "g");
    std::vector<LinearTerm> u3 = mixed(ys[D], xlow, "h");

    // low times low
    std::vector<Var> lp = digit_vars(pool, "ll", static_cast<int>(2 * D));
    bound.insert(bound.end(), lp.begin(), lp.end());
    parts.push_back(times_tuple_core(xlow, ylow, tvs(lp), mx, pool));
    std::vector<LinearTerm> u4(2 * d, zero);
    for (size_t i = 0; i < 2 * D; ++i) u4[i] = tv(lp[i]);

    parts.push_back(tuple_sum_equals({u1, u2, u3, u4}, zs, mx, pool));
    return exists_all(bound, Formula::conjunction(std::move(parts)));
}

/// z holds a single binary one exactly at position y.
inline Formula power_of_two(const LinearTerm& z, const LinearTerm& y, VarPool& pool) {
    Var w = pool.fresh("bw");
    return fa(bit_atom(z, y)) &&
           Formula::forall(w, Formula::implies(fa(bit_atom(z, tv(w))), fa(Atom::eq(tv(w), y))));
}

/// vs = floor(us / z) for d-digit tuples and a scalar divisor z >= 1:
/// z*vs <= us < z*vs + z.
inline Formula tuple_div_step(const std::vector<LinearTerm>& us, const LinearTerm& z,
                              const std::vector<LinearTerm>& vs, const Var& mx, VarPool& pool) {
    size_t d = us.size();
    LinearTerm zero(0);
    std::vector<LinearTerm> zpad(d, zero);
    zpad[0] = z;
    std::vector<Var> prod = digit_vars(pool, "dp", static_cast<int>(2 * d));
    std::vector<Formula> parts;
    parts.push_back(times_tuple_core(zpad, vs, tvs(prod), mx, pool));
    for (size_t i = d; i < 2 * d; ++i) parts.push_back(fa(Atom::eq(tv(prod[i]), zero)));
    std::vector<LinearTerm> prod_low(tvs(prod).begin(), tvs(prod).begin() + static_cast<long>(d));
    parts.push_back(tuple_le(prod_low, us));
    // us < prod + z, compared with one extra digit
    std::vector<Var> upper = digit_vars(pool, "du", static_cast<int>(d + 1));
    parts.push_back(tuple_add(prod_low, zpad, tvs(upper), mx, pool));
    std::vector<LinearTerm> us_ext = us;
    us_ext.push_back(zero);
    parts.push_back(tuple_lt(us_ext, tvs(upper)));
    std::vector<Var> bound = prod;
    bound.insert(bound.end(), upper.begin(), upper.end());
    return exists_all(bound, Formula::conjunction(std::move(parts)));
}

/// Odd number of true formulas among the given ones.
inline Formula odd_parity(const std::vector<Formula>& bits) {
    Formula acc = Formula::bottom();
    for (const auto& b : bits) acc = (b && !acc) || (!b && acc);
    return acc;
}

}  // namespace gen

// ---------------------------------------------------------------------------
// Public generators. Digit arguments are named least-significant first:
// x0 carries weight (N+1)^0, x1 weight (N+1)^1, and so on.

/// Numeric order on d-digit tuples, over the order relation alone.
inline Formula gen_lt_d(int d) {
    if (d < 1) throw InvalidParams("d must be >= 1");
    std::vector<LinearTerm> xs, ys;
    for (int i = 0; i < d; ++i) {
        xs.push_back(gen::tv("x" + std::to_string(i)));
        ys.push_back(gen::tv("y" + std::to_string(i)));
    }
    return gen::tuple_lt(xs, ys);
}

/// Addition of d-digit tuples with a d+1-digit result, over the ternary
/// addition relation (plus the order used to name the maximum element).
inline Formula gen_plus_d(int d) {
    if (d < 1) throw InvalidParams("d must be >= 1");
    std::vector<LinearTerm> xs, ys, zs;
    std::set<Var> used;
    for (int i = 0; i < d; ++i) {
        xs.push_back(gen::tv("x" + std::to_string(i)));
        ys.push_back(gen::tv("y" + std::to_string(i)));
    }
    for (int i = 0; i <= d; ++i) zs.push_back(gen::tv("z" + std::to_string(i)));
    for (const auto& t : {xs, ys, zs})
        for (const auto& term : t) term.collect_variables(used);
    VarPool pool(used);
    Var mx = pool.fresh("mx");
    return Formula::exists(mx, gen::var_is_max(mx, pool) &&
                                   gen::tuple_add(xs, ys, zs, mx, pool));
}

/// Congruence modulo n of two d-digit tuple values.
inline Formula gen_congn_d(int d, const Int& n) {
    if (d < 1 || n < 1) throw InvalidParams("need d >= 1 and n >= 1");
    std::vector<LinearTerm> xs, ys;
    std::set<Var> used;
    for (int i = 0; i < d; ++i) {
        xs.push_back(gen::tv("x" + std::to_string(i)));
        ys.push_back(gen::tv("y" + std::to_string(i)));
    }
    for (const auto& t : {xs, ys})
        for (const auto& term : t) term.collect_variables(used);
    VarPool pool(used);
    Var mx = pool.fresh("mx");
    return Formula::exists(mx, gen::var_is_max(mx, pool) &&
                                   gen::tuple_cong(xs, ys, n, mx, pool));
}

/// x*y = z1*(N+1) + z0 over any segment with the bounded product relation.
inline Formula gen_times_1() {
    VarPool pool({"x", "y", "z1", "z0"});
    Var mx = pool.fresh("mx");
    return Formula::exists(
        mx, gen::var_is_max(mx, pool) &&
                gen::times_pair_core(gen::tv("x"), gen::tv("y"), gen::tv("z1"), gen::tv("z0"),
                                     mx, pool));
}

/// d-digit times d-digit with a 2d-digit result.
inline Formula gen_times_d(int d) {
    if (d < 1) throw InvalidParams("d must be >= 1");
    std::vector<LinearTerm> xs, ys, zs;
    std::set<Var> used;
    for (int i = 0; i < d; ++i) {
        xs.push_back(gen::tv("x" + std::to_string(i)));
        ys.push_back(gen::tv("y" + std::to_string(i)));
    }
    for (int i = 0; i < 2 * d; ++i) zs.push_back(gen::tv("z" + std::to_string(i)));
    for (const auto& t : {xs, ys, zs})
        for (const auto& term : t) term.collect_variables(used);
    VarPool pool(used);
    Var mx = pool.fresh("mx");
    return Formula::exists(mx, gen::var_is_max(mx, pool) &&
                                   gen::times_tuple_core(xs, ys, zs, mx, pool));
}

/// Bit y of the d-digit tuple value is 1, over {plus, times, bit}: split
/// y into exponents small enough that their powers of two are elements,
/// divide down by each power, and test the parity of what remains.
inline Formula gen_bit_d(int d) {
    if (d < 1) throw InvalidParams("d must be >= 1");
    std::vector<LinearTerm> xs;
    std::set<Var> used{"y"};
    for (int i = 0; i < d; ++i) xs.push_back(gen::tv("x" + std::to_string(i)));
    for (const auto& t : xs) t.collect_variables(used);
    VarPool pool(used);
    Var mx = pool.fresh("mx");
    LinearTerm y = gen::tv("y");

    std::vector<Var> exps, pows;
    for (int i = 0; i < d; ++i) {
        exps.push_back(pool.fresh("e" + std::to_string(i)));
        pows.push_back(pool.fresh("t" + std::to_string(i)));
    }
    std::vector<Formula> parts;
    // y = e0 + ... + e_{d-1}
    if (d == 1) {
        parts.push_back(gen::fa(Atom::eq(gen::tv(exps[0]), y)));
    } else {
        LinearTerm acc = gen::tv(exps[0]);
        for (int i = 1; i < d; ++i) {
            LinearTerm target = i + 1 == d ? y : gen::tv(pool.fresh("ys" + std::to_string(i)));
            if (i + 1 != d) exps.push_back(*target.single_variable());  // bind the partial sum
            parts.push_back(gen::fa(gen::plus_atom(acc, gen::tv(exps[static_cast<size_t>(i)]),
                                                   target)));
            acc = target;
        }
    }
    for (int i = 0; i < d; ++i)
        parts.push_back(gen::power_of_two(gen::tv(pows[static_cast<size_t>(i)]),
                                          gen::tv(exps[static_cast<size_t>(i)]), pool));

    // iterated floor division by each power of two
    std::vector<LinearTerm> current = xs;
    std::vector<Var> quot_vars;
    for (int i = 0; i < d; ++i) {
        std::vector<Var> q = gen::digit_vars(pool, "q" + std::to_string(i), d);
        quot_vars.insert(quot_vars.end(), q.begin(), q.end());
        parts.push_back(gen::tuple_div_step(current, gen::tv(pows[static_cast<size_t>(i)]),
                                            gen::tvs(q), mx, pool));
        current = gen::tvs(q);
    }

    // the remaining value is odd
    std::vector<Formula> digit_bits;
    for (const auto& t : current) digit_bits.push_back(gen::fa(gen::bit_atom(t, LinearTerm(0))));
    Formula parity = (gen::fa(gen::bit_atom(gen::tv(mx), LinearTerm(0))) && digit_bits[0]) ||
                     (!gen::fa(gen::bit_atom(gen::tv(mx), LinearTerm(0))) &&
                      gen::odd_parity(digit_bits));
    parts.push_back(std::move(parity));

    std::vector<Var> bound = exps;
    bound.insert(bound.end(), pows.begin(), pows.end());
    bound.insert(bound.end(), quot_vars.begin(), quot_vars.end());
    return Formula::exists(mx, gen::var_is_max(mx, pool) &&
                                   gen::exists_all(bound, Formula::conjunction(std::move(parts))));
}

/// x < y and y*y still lies in the universe, over the product relation only.
inline Formula gen_lt_sqrt() {
    VarPool pool({"x", "y"});
    Var z1 = pool.fresh("z"), z2 = pool.fresh("zz"), u = pool.fresh("u"), v = pool.fresh("v"),
        vp = pool.fresh("vp");
    LinearTerm x = gen::tv("x"), y = gen::tv("y");
    return Formula::conjunction({
        Formula::exists(z1, gen::fa(gen::times_atom(x, x, gen::tv(z1)))),
        Formula::exists(z2, gen::fa(gen::times_atom(y, y, gen::tv(z2)))),
        Formula::exists(u, Formula::exists(v, gen::fa(gen::times_atom(x, gen::tv(u), gen::tv(v)))) &&
                               !Formula::exists(vp, gen::fa(gen::times_atom(y, gen::tv(u),
                                                                            gen::tv(vp))))),
    });
}

namespace gen {

/// a <= b via the addition relation alone.
inline Formula le_via_plus(const LinearTerm& a, const LinearTerm& b, VarPool& pool) {
    Var c = pool.fresh("lc");
    return Formula::exists(c, fa(plus_atom(a, tv(c), b)));
}

/// a < b via the addition relation alone.
inline Formula lt_via_plus(const LinearTerm& a, const LinearTerm& b, VarPool& pool) {
    Var c = pool.fresh("lc");
    return Formula::exists(c, fa(plus_atom(a, tv(c), b)) &&
                                  !fa(Atom::eq(tv(c), LinearTerm(0))));
}

/// u*u = v over {plus, Squares}: v is a square whose predecessor square is
/// v - 2u + 1, encoded with sums that stay inside the universe.
inline Formula square_eq_core(const LinearTerm& u, const LinearTerm& v, VarPool& pool) {
    Var w = pool.fresh("qw"), wp = pool.fresh("qp"), a = pool.fresh("qa"), b = pool.fresh("qb");
    Formula pred_square =
        fa(squares_atom(tv(w))) && lt_via_plus(tv(w), v, pool) &&
        Formula::forall(wp, Formula::implies(fa(squares_atom(tv(wp))) &&
                                                 lt_via_plus(tv(wp), v, pool),
                                             le_via_plus(tv(wp), tv(w), pool)));
    // w = v - 2u + 1 via b = w + (u - 1) and b + u = v
    Formula chain = Formula::exists(
        a, Formula::exists(b, Formula::conjunction({
                                  fa(plus_atom(tv(a), LinearTerm(1), u)),
                                  fa(plus_atom(tv(w), tv(a), tv(b))),
                                  fa(plus_atom(tv(b), u, v)),
                              })));
    Formula zero_case = fa(Atom::eq(u, LinearTerm(0))) && fa(Atom::eq(v, LinearTerm(0)));
    Formula one_case = fa(Atom::eq(u, LinearTerm(1))) && fa(Atom::eq(v, LinearTerm(1)));
    return fa(squares_atom(v)) &&
           (std::move(zero_case) || std::move(one_case) ||
            Formula::exists(w, std::move(pred_square) && std::move(chain)));
}

}  // namespace gen

/// u*u = v over {plus, Squares}.
inline Formula gen_square_eq() {
    VarPool pool({"u", "v"});
    return gen::square_eq_core(gen::tv("u"), gen::tv("v"), pool);
}

/// x*y = z for x, y below the square-root of the universe bound, using
/// (x-y)^2 = x^2 - 2xy + y^2 arranged so every sum stays in the universe.
inline Formula gen_mult_from_squares() {
    VarPool pool({"x", "y", "z"});
    LinearTerm x = gen::tv("x"), y = gen::tv("y"), z = gen::tv("z");
    Var u = pool.fresh("u"), v = pool.fresh("v"), w = pool.fresh("w"), s = pool.fresh("s");

    // for a <= b with ua = a^2, ub = b^2: w + z = ua + (ub - z)
    auto branch = [&](const LinearTerm& a, const LinearTerm& b, const Var& ua, const Var& ub) {
        Var r = pool.fresh("r"), t = pool.fresh("t");
        return Formula::conjunction({
            gen::le_via_plus(a, b, pool),
            Formula::exists(
                r, Formula::exists(t, Formula::conjunction({
                                          gen::fa(gen::plus_atom(z, gen::tv(r), gen::tv(ub))),
                                          gen::fa(gen::plus_atom(gen::tv(w), z, gen::tv(t))),
                                          gen::fa(gen::plus_atom(gen::tv(ua), gen::tv(r),
                                                                 gen::tv(t))),
                                      }))),
        });
    };

    Formula abs_diff =
        Formula::exists(s, (gen::fa(gen::plus_atom(gen::tv(s), y, x)) ||
                            gen::fa(gen::plus_atom(gen::tv(s), x, y))) &&
                               gen::square_eq_core(gen::tv(s), gen::tv(w), pool));
    return Formula::exists(
        u, Formula::exists(
               v, Formula::exists(
                      w, Formula::conjunction({
                             gen::square_eq_core(x, gen::tv(u), pool),
                             gen::square_eq_core(y, gen::tv(v), pool),
                             std::move(abs_diff),
                             branch(x, y, u, v) || branch(y, x, v, u),
                         }))));
}

/// x + y = z through counting: y counts the interval (x, z].
inline Formula gen_count_plus() {
    LinearTerm x = gen::tv("x"), z = gen::tv("z");
    LinearTerm u = gen::tv("u");
    Formula body = gen::fa(Atom::lt(x, u)) && (gen::fa(Atom::lt(u, z)) || gen::fa(Atom::eq(u, z)));
    return Formula::count_exists({"y"}, {"u"}, std::move(body));
}

/// x*y = z through binary counting: (0, z) in base N+1 counts the pairs
/// (u, v) with 1 <= u <= x and 1 <= v <= y.
inline Formula gen_count_times() {
    LinearTerm x = gen::tv("x"), y = gen::tv("y");
    LinearTerm u = gen::tv("u"), v = gen::tv("v");
    Formula body = Formula::conjunction({
        gen::fa(Atom::lt(LinearTerm(0), u)),
        gen::fa(Atom::lt(u, x)) || gen::fa(Atom::eq(u, x)),
        gen::fa(Atom::lt(LinearTerm(0), v)),
        gen::fa(Atom::lt(v, y)) || gen::fa(Atom::eq(v, y)),
    });
    Var c0 = "c0";
    return Formula::exists(
        c0, gen::fa(Atom::eq(gen::tv(c0), LinearTerm(0))) &&
                Formula::count_exists({c0, "z"}, {"u", "v"}, std::move(body)));
}

}  // namespace countpa
