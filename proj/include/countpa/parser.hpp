#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "countpa/formula.hpp"
#include "countpa/printer.hpp"
#include "countpa/signature.hpp"

namespace countpa {

struct SourceSpan {
    size_t start = 0;
    size_t end = 0;
    int line = 1;
    int column = 1;
};

struct ParseError : Error {
    SourceSpan span;
    ParseError(const std::string& msg, SourceSpan s)
        : Error(msg + " (line " + std::to_string(s.line) + ", column " +
                std::to_string(s.column) + ")"),
          span(s) {}
};

namespace detail {

enum class Tok {
    Ident, Number,
    LParen, RParen, LBracket, RBracket, Comma, Dot,
    Bang, Amp, Pipe, Arrow, DArrow,
    Lt, Le, Gt, Ge, Eq, EqEq,
    Plus, Minus, Star,
    End
};

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_trivia();
        Token t;
        t.span.start = pos_;
        t.span.line = line_;
        t.span.column = column_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            current_ = t;
            return;
        }
        // Unicode aliases accepted on input, never emitted.
        static const std::pair<const char*, Tok> aliases[] = {
            {"∃", Tok::Ident},   // exists; text patched below
            {"∀", Tok::Ident},   // forall
            {"∧", Tok::Amp},     // and
            {"∨", Tok::Pipe},    // or
            {"¬", Tok::Bang},    // not
            {"→", Tok::Arrow},   // implies
            {"↔", Tok::DArrow},  // iff
            {"≡", Tok::EqEq},    // congruent
            {"≤", Tok::Le},      // at most
        };
        for (const auto& [utf8, kind] : aliases) {
            std::string_view pat(utf8);
            if (src_.substr(pos_, pat.size()) == pat) {
                t.kind = kind;
                if (pat == "∃") t.text = "E";
                if (pat == "∀") t.text = "A";
                consume(pat.size());
                t.span.end = pos_;
                current_ = t;
                return;
            }
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t begin = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                consume(1);
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(begin, pos_ - begin));
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t begin = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                consume(1);
            t.kind = Tok::Number;
            t.text = std::string(src_.substr(begin, pos_ - begin));
        } else {
            switch (c) {
                case '(': t.kind = Tok::LParen; consume(1); break;
                case ')': t.kind = Tok::RParen; consume(1); break;
                case '[': t.kind = Tok::LBracket; consume(1); break;
                case ']': t.kind = Tok::RBracket; consume(1); break;
                case ',': t.kind = Tok::Comma; consume(1); break;
                case '.': t.kind = Tok::Dot; consume(1); break;
                case '!': t.kind = Tok::Bang; consume(1); break;
                case '&': t.kind = Tok::Amp; consume(1); break;
                case '|': t.kind = Tok::Pipe; consume(1); break;
                case '+': t.kind = Tok::Plus; consume(1); break;
                case '*': t.kind = Tok::Star; consume(1); break;
                case '-':
                    consume(1);
                    if (pos_ < src_.size() && src_[pos_] == '>') {
                        t.kind = Tok::Arrow;
                        consume(1);
                    } else {
                        t.kind = Tok::Minus;
                    }
                    break;
                case '<':
                    consume(1);
                    if (pos_ < src_.size() && src_[pos_] == '=') {
                        t.kind = Tok::Le;
                        consume(1);
                    } else if (pos_ + 1 < src_.size() && src_[pos_] == '-' &&
                               src_[pos_ + 1] == '>') {
                        t.kind = Tok::DArrow;
                        consume(2);
                    } else {
                        t.kind = Tok::Lt;
                    }
                    break;
                case '>':
                    consume(1);
                    if (pos_ < src_.size() && src_[pos_] == '=') {
                        t.kind = Tok::Ge;
                        consume(1);
                    } else {
                        t.kind = Tok::Gt;
                    }
                    break;
                case '=':
                    consume(1);
                    if (pos_ < src_.size() && src_[pos_] == '=') {
                        t.kind = Tok::EqEq;
                        consume(1);
                    } else {
                        t.kind = Tok::Eq;
                    }
                    break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", t.span);
            }
        }
        t.span.end = pos_;
        current_ = t;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') consume(1);
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                consume(1);
            } else {
                break;
            }
        }
    }

    void consume(size_t n) {
        for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

class Parser {
public:
    Parser(std::string_view src, const Signature& sig) : lex_(src), sig_(sig) {}

    Formula parse() {
        Formula f = formula();
        expect(Tok::End, "trailing input after formula");
        return f;
    }

private:
    Formula formula() { return iff(); }

    Formula iff() {
        Formula lhs = implies();
        if (lex_.peek().kind == Tok::DArrow) {
            lex_.take();
            return Formula::iff(std::move(lhs), iff());
        }
        return lhs;
    }

    Formula implies() {
        Formula lhs = disjunction();
        if (lex_.peek().kind == Tok::Arrow) {
            lex_.take();
            return Formula::implies(std::move(lhs), implies());
        }
        return lhs;
    }

    Formula disjunction() {
        std::vector<Formula> parts;
        parts.push_back(conjunction());
        while (lex_.peek().kind == Tok::Pipe) {
            lex_.take();
            parts.push_back(conjunction());
        }
        return Formula::disjunction(std::move(parts));
    }

    Formula conjunction() {
        std::vector<Formula> parts;
        parts.push_back(unary());
        while (lex_.peek().kind == Tok::Amp) {
            lex_.take();
            parts.push_back(unary());
        }
        return Formula::conjunction(std::move(parts));
    }

    Formula unary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Bang) {
            lex_.take();
            return Formula::negation(unary());
        }
        if (t.kind == Tok::Ident && (t.text == "E" || t.text == "A" || t.text == "M")) {
            // A quantifier keyword followed by '(' is a relation application.
            Lexer probe = lex_;
            probe.take();
            if (probe.peek().kind != Tok::LParen) return quantifier();
        }
        if (t.kind == Tok::LParen) {
            // Either a parenthesized formula or a parenthesized term opening
            // an atom; try the formula first and fall back on failure.
            Lexer save = lex_;
            lex_.take();
            try {
                Formula inner = formula();
                expect(Tok::RParen, "expected ')'");
                return inner;
            } catch (const ParseError&) {
                lex_ = save;
                return atom();
            }
        }
        return atom();
    }

    Formula quantifier() {
        Token kw = lex_.take();
        if (kw.text == "E" && lex_.peek().kind == Tok::LBracket) {
            lex_.take();
            std::vector<Var> counts = var_list();
            expect(Tok::RBracket, "expected ']' after count variables");
            std::vector<Var> bounds = var_list();
            expect(Tok::Dot, "expected '.' after quantified variables");
            Formula body = formula();
            if (counts.size() != bounds.size())
                throw ParseError("counting quantifier needs as many count as bound variables",
                                 kw.span);
            return Formula::count_exists(std::move(counts), std::move(bounds), std::move(body));
        }
        if (kw.text == "M") {
            std::vector<Var> bounds = var_list();
            expect(Tok::Dot, "expected '.' after quantified variables");
            if (bounds.size() > 2)
                throw ParseError("majority quantifier binds at most two variables", kw.span);
            return Formula::majority(std::move(bounds), formula());
        }
        Var v = variable_name();
        expect(Tok::Dot, "expected '.' after quantified variable");
        Formula body = formula();
        return kw.text == "E" ? Formula::exists(std::move(v), std::move(body))
                              : Formula::forall(std::move(v), std::move(body));
    }

    std::vector<Var> var_list() {
        std::vector<Var> vs;
        vs.push_back(variable_name());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            vs.push_back(variable_name());
        }
        return vs;
    }

    Var variable_name() {
        Token t = expect(Tok::Ident, "expected a variable name");
        if (t.text == "mod") throw ParseError("'mod' is reserved", t.span);
        return t.text;
    }

    Formula atom() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident) {
            Lexer probe = lex_;
            Token name = probe.take();
            if (probe.peek().kind == Tok::LParen && !sig_known_constant(name.text) &&
                sig_.relations.count(name.text)) {
                lex_ = probe;
                lex_.take();
                std::vector<LinearTerm> args;
                args.push_back(term());
                while (lex_.peek().kind == Tok::Comma) {
                    lex_.take();
                    args.push_back(term());
                }
                expect(Tok::RParen, "expected ')' after relation arguments");
                int arity = sig_.relation_arity(name.text);
                if (static_cast<int>(args.size()) != arity)
                    throw ParseError("relation " + name.text + " expects " +
                                         std::to_string(arity) + " arguments",
                                     name.span);
                return Formula::atom(Atom::relation(name.text, std::move(args)));
            }
            if (probe.peek().kind == Tok::LParen)
                throw SignatureError("unknown relation symbol: " + name.text);
        }
        SourceSpan at = t.span;
        LinearTerm lhs = term();
        Token op = lex_.take();
        switch (op.kind) {
            case Tok::Lt: return Formula::atom(Atom::lt(std::move(lhs), term()));
            case Tok::Gt: {
                LinearTerm rhs = term();
                return Formula::atom(Atom::lt(std::move(rhs), std::move(lhs)));
            }
            case Tok::Le: {
                // t <= t' is sugar for t < t' + 1
                require_addition(op.span);
                LinearTerm rhs = term();
                rhs += LinearTerm(1);
                return Formula::atom(Atom::lt(std::move(lhs), std::move(rhs)));
            }
            case Tok::Ge: {
                require_addition(op.span);
                LinearTerm rhs = term();
                lhs += LinearTerm(1);
                return Formula::atom(Atom::lt(std::move(rhs), std::move(lhs)));
            }
            case Tok::Eq: return Formula::atom(Atom::eq(std::move(lhs), term()));
            case Tok::EqEq: {
                LinearTerm rhs = term();
                Token kw = expect(Tok::Ident, "expected 'mod' after '=='");
                if (kw.text != "mod") throw ParseError("expected 'mod' after '=='", kw.span);
                Token n = expect(Tok::Number, "expected a modulus");
                Int modulus(n.text);
                if (modulus < 1) throw ParseError("modulus must be >= 1", n.span);
                if (!sig_.moduli_allowed)
                    throw SignatureError("congruence atoms are not in the signature");
                return Formula::atom(Atom::cong(std::move(lhs), std::move(rhs), modulus));
            }
            default: throw ParseError("expected a comparison operator", at);
        }
    }

    LinearTerm term() {
        LinearTerm acc;
        bool negate = false;
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            negate = true;
        }
        acc += addend(negate);
        while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
            Token op = lex_.take();
            require_addition(op.span);
            acc += addend(op.kind == Tok::Minus);
        }
        return acc;
    }

    LinearTerm addend(bool negate) {
        const Token& t = lex_.peek();
        Int sign = negate ? -1 : 1;
        if (t.kind == Tok::Number) {
            Token n = lex_.take();
            Int value(n.text);
            if (lex_.peek().kind == Tok::Star) {
                Token star = lex_.take();
                require_addition(star.span);
                Token v = expect(Tok::Ident, "expected a variable after '*'");
                return LinearTerm::variable(v.text, sign * value);
            }
            if (value != 0 && value != 1) require_addition(n.span);
            if (negate) require_addition(n.span);
            return LinearTerm(sign * value);
        }
        if (t.kind == Tok::Ident) {
            Var v = variable_name();
            if (negate) require_addition(t.span);
            return LinearTerm::variable(v, sign);
        }
        if (t.kind == Tok::LParen) {
            lex_.take();
            LinearTerm inner = term();
            expect(Tok::RParen, "expected ')' in term");
            if (negate) require_addition(t.span);
            return negate ? -inner : inner;
        }
        throw ParseError("expected a term", t.span);
    }

    bool sig_known_constant(const std::string& name) const {
        return sig_.constants.count(name) != 0;
    }

    void require_addition(SourceSpan at) const {
        if (!sig_.has_addition_function())
            throw SignatureError("compound terms need the addition function symbol");
        (void)at;
    }

    Token expect(Tok kind, const std::string& msg) {
        if (lex_.peek().kind != kind) throw ParseError(msg, lex_.peek().span);
        return lex_.take();
    }

    Lexer lex_;
    Signature sig_;
};

}  // namespace detail

inline Formula parse_formula(std::string_view text, const Signature& sig = Signature::presb()) {
    detail::Parser p(text, sig);
    return p.parse();
}

inline LinearTerm parse_term(std::string_view text, const Signature& sig = Signature::presb()) {
    std::string padded = std::string(text) + " = 0";
    Formula f = parse_formula(padded, sig);
    return f.as_atom().lhs();
}

}  // namespace countpa
