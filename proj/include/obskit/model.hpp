/**
 * @file model.hpp
 * @brief ODE model representation, the model-file parser, and the serializer.
 *
 * Model files are UTF-8 text with sections
 *
 *     states:          x1, x2
 *     parameters:      k1, k2, V = 47/10
 *     known_inputs:    u
 *     unknown_inputs:  w
 *     dynamics:        x1' = -k1*x1 + u
 *     outputs:         y1 = x1
 *     options:         u_deriv_bound.u = 0
 *
 * `#` starts a comment. Expressions use identifiers, integer/rational/decimal
 * literals, + - * / ^ (right-associative ^), parentheses, unary minus, and
 * the functions exp(.) and ln(.). Parameters declared as `name = value` are
 * known numeric constants: they are substituted into every expression at
 * parse time and are not analysis variables.
 */
#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "obskit/expr.hpp"
#include "obskit/subst.hpp"

namespace obskit {

struct Model {
    std::string name = "model";
    std::vector<Symbol> states;         ///< n_x, declaration order
    std::vector<Symbol> parameters;     ///< unknown parameters only
    std::vector<Symbol> known_inputs;   ///< order-0 input symbols
    std::vector<Symbol> unknown_inputs; ///< order-0 input symbols
    std::vector<Expr> dynamics;         ///< aligned with states
    std::vector<Expr> outputs;          ///< m >= 1
    std::vector<std::pair<std::string, Rational>> known_constants; ///< declaration order
    std::unordered_map<Symbol, int> u_deriv_bound; ///< -1 = unbounded (default)
    std::unordered_map<Symbol, int> w_deriv_bound; ///< highest nonzero order s (default 1)
    std::unordered_set<Symbol> excluded;           ///< skipped in classification

    std::size_t n_x() const { return states.size(); }
    std::size_t n_theta() const { return parameters.size(); }
    std::size_t n_u() const { return known_inputs.size(); }
    std::size_t n_w() const { return unknown_inputs.size(); }
    std::size_t n_outputs() const { return outputs.size(); }
};

/// Find a declared symbol by base name; nullptr when absent.
inline Symbol find_model_symbol(const Model &m, std::string_view name) {
    for (const auto *vec : {&m.states, &m.parameters, &m.known_inputs, &m.unknown_inputs})
        for (Symbol s : *vec)
            if (s->name == name) return s;
    return nullptr;
}

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct ExprToken {
    enum Type { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Type type;
    std::string text;  // Ident
    Rational value;    // Number
};

inline std::vector<ExprToken> lex_expr(const std::string &src, int line) {
    std::vector<ExprToken> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            out.push_back({ExprToken::Ident, src.substr(i, j - i), Rational()});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            long long ip = 0, num = 0, den = 1;
            try {
                for (std::size_t k = i; k < j; ++k) {
                    Rational r = Rational(ip) * Rational(10) + Rational(src[k] - '0');
                    ip = r.num();
                }
                num = ip;
                if (j < src.size() && src[j] == '.') {
                    ++j;
                    std::size_t fs = j;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                    if (j == fs) throw ParseError(line, "digits expected after decimal point");
                    for (std::size_t k = fs; k < j; ++k) {
                        Rational rn = Rational(num) * Rational(10) + Rational(src[k] - '0');
                        Rational rd = Rational(den) * Rational(10);
                        num = rn.num();
                        den = rd.num();
                    }
                }
                out.push_back({ExprToken::Number, "", Rational(num, den)});
            } catch (const OverflowError &) {
                throw ParseError(line, "numeric literal out of range");
            }
            i = j;
            continue;
        }
        switch (c) {
        case '+': out.push_back({ExprToken::Plus, "", Rational()}); break;
        case '-': out.push_back({ExprToken::Minus, "", Rational()}); break;
        case '*': out.push_back({ExprToken::Star, "", Rational()}); break;
        case '/': out.push_back({ExprToken::Slash, "", Rational()}); break;
        case '^': out.push_back({ExprToken::Caret, "", Rational()}); break;
        case '(': out.push_back({ExprToken::LParen, "", Rational()}); break;
        case ')': out.push_back({ExprToken::RParen, "", Rational()}); break;
        default: throw ParseError(line, std::string("unexpected character '") + c + "'");
        }
        ++i;
    }
    out.push_back({ExprToken::End, "", Rational()});
    return out;
}

/// Recursive-descent expression parser over the token stream.
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' factor)?
///   atom   := number | ident | ident '(' expr ')'   (exp/ln only) | '(' expr ')'
class ExprParser {
  public:
    using Resolver = Expr (*)(const std::string &, int, const void *);

    ExprParser(std::vector<ExprToken> toks, int line, Resolver resolve, const void *ctx)
      : toks_(std::move(toks)), line_(line), resolve_(resolve), ctx_(ctx) {}

    Expr parse() {
        Expr e = expr();
        if (peek().type != ExprToken::End) throw ParseError(line_, "unexpected trailing tokens");
        return e;
    }

  private:
    const ExprToken &peek() const { return toks_[pos_]; }
    ExprToken next() { return toks_[pos_++]; }
    bool accept(ExprToken::Type t) {
        if (peek().type == t) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept(ExprToken::Plus))
                e = add2(e, term());
            else if (accept(ExprToken::Minus))
                e = sub(e, term());
            else
                return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept(ExprToken::Star))
                e = mul2(e, factor());
            else if (accept(ExprToken::Slash)) {
                Expr d = factor();
                if (d->is_zero()) throw ParseError(line_, "division by zero");
                e = div_of(e, d);
            } else
                return e;
        }
    }

    Expr factor() {
        if (accept(ExprToken::Minus)) return neg(factor());
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (accept(ExprToken::Caret)) return pow_of(base, factor());
        return base;
    }

    Expr atom() {
        ExprToken t = next();
        switch (t.type) {
        case ExprToken::Number:
            return constant(t.value);
        case ExprToken::Ident: {
            if (t.text == "exp" || t.text == "ln") {
                if (!accept(ExprToken::LParen))
                    throw ParseError(line_, "'" + t.text + "' requires parentheses");
                Expr a = expr();
                if (!accept(ExprToken::RParen)) throw ParseError(line_, "missing ')'");
                return t.text == "exp" ? exp_of(a) : ln_of(a);
            }
            return resolve_(t.text, line_, ctx_);
        }
        case ExprToken::LParen: {
            Expr e = expr();
            if (!accept(ExprToken::RParen)) throw ParseError(line_, "missing ')'");
            return e;
        }
        default:
            throw ParseError(line_, "expression expected");
        }
    }

    std::vector<ExprToken> toks_;
    std::size_t pos_ = 0;
    int line_;
    Resolver resolve_;
    const void *ctx_;
};

struct ParseScope {
    std::unordered_map<std::string, Symbol> symbols;
    std::unordered_map<std::string, Rational> constants;
};

inline Expr resolve_in_scope(const std::string &name, int line, const void *ctx) {
    const auto &scope = *static_cast<const ParseScope *>(ctx);
    if (auto it = scope.symbols.find(name); it != scope.symbols.end()) return symref(it->second);
    if (auto it = scope.constants.find(name); it != scope.constants.end())
        return constant(it->second);
    throw UndeclaredSymbol(line, name);
}

inline Expr parse_expression(const std::string &src, int line, const ParseScope &scope) {
    ExprParser p(lex_expr(src, line), line, &resolve_in_scope, &scope);
    return p.parse();
}

/// Parse a purely numeric expression (constant declarations).
inline Rational parse_constant_value(const std::string &src, int line) {
    static const ParseScope empty;
    Expr e = parse_expression(src, line, empty);
    if (!e->is_constant()) throw ParseError(line, "numeric constant expected");
    return e->value;
}

inline void check_identifier(const std::string &name, int line) {
    if (name.empty() || !is_ident_start(name[0])) throw ParseError(line, "identifier expected");
    for (char c : name)
        if (!is_ident_char(c)) throw ParseError(line, "bad identifier '" + name + "'");
    if (name == "exp" || name == "ln") throw ParseError(line, "'" + name + "' is reserved");
}

/// Split a declaration line on commas/whitespace into identifiers.
inline std::vector<std::string> split_names(const std::string &line_text, int line) {
    std::vector<std::string> names;
    std::string cur;
    for (char c : line_text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                names.push_back(cur);
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) names.push_back(cur);
    for (const auto &n : names) check_identifier(n, line);
    return names;
}

} // namespace detail

/// Parse a model file. Throws ParseError, UndeclaredSymbol, or DuplicateSymbol.
inline Model parse_model(const std::string &text, const std::string &name = "model") {
    enum class Section { None, States, Parameters, KnownInputs, UnknownInputs, Dynamics, Outputs, Options };
    struct SectionLine {
        Section section;
        int line;
        std::string text;
    };

    // Pass 1: strip comments, classify lines into sections.
    std::vector<SectionLine> content;
    std::unordered_set<int> seen_sections;
    {
        Section cur = Section::None;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            std::string raw = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
            pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
            ++line_no;
            if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            std::string t = detail::trim(raw);
            if (t.empty()) continue;
            static const std::pair<const char *, Section> kSections[] = {
                {"states:", Section::States},
                {"parameters:", Section::Parameters},
                {"known_inputs:", Section::KnownInputs},
                {"unknown_inputs:", Section::UnknownInputs},
                {"dynamics:", Section::Dynamics},
                {"outputs:", Section::Outputs},
                {"options:", Section::Options},
            };
            bool is_header = false;
            for (const auto &[header, sec] : kSections) {
                if (t.rfind(header, 0) != 0) continue;
                if (!seen_sections.insert(static_cast<int>(sec)).second)
                    throw ParseError(line_no, std::string("duplicate section '") + header + "'");
                cur = sec;
                is_header = true;
                // Content may share the header's line: "states: x1, x2".
                std::string rest = detail::trim(t.substr(std::string(header).size()));
                if (!rest.empty()) content.push_back({cur, line_no, std::move(rest)});
                break;
            }
            if (is_header) continue;
            if (t.size() > 1 && t.back() == ':' && t.find(' ') == std::string::npos &&
                t.find('=') == std::string::npos)
                throw ParseError(line_no, "unknown section '" + t + "'");
            if (cur == Section::None) throw ParseError(line_no, "content before any section");
            content.push_back({cur, line_no, std::move(t)});
        }
    }

    Model m;
    m.name = name;
    detail::ParseScope scope;

    auto declare = [&](const std::string &nm, SymbolKind kind, int line) -> Symbol {
        detail::check_identifier(nm, line);
        if (scope.symbols.count(nm) || scope.constants.count(nm)) throw DuplicateSymbol(nm);
        Symbol s = intern_symbol(nm, kind, 0);
        scope.symbols.emplace(nm, s);
        return s;
    };

    // Pass 2a: declarations (so section order never matters for references).
    for (const auto &sl : content) {
        switch (sl.section) {
        case Section::States:
            for (const auto &nm : detail::split_names(sl.text, sl.line))
                m.states.push_back(declare(nm, SymbolKind::State, sl.line));
            break;
        case Section::Parameters: {
            // Comma-separated entries, each either a name or a known constant
            // "name = value" (constants fold into expressions at parse time).
            std::size_t start = 0;
            while (start <= sl.text.size()) {
                std::size_t comma = sl.text.find(',', start);
                std::string piece = detail::trim(
                  sl.text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
                start = comma == std::string::npos ? sl.text.size() + 1 : comma + 1;
                if (piece.empty()) continue;
                auto eq = piece.find('=');
                if (eq != std::string::npos) {
                    std::string nm = detail::trim(piece.substr(0, eq));
                    detail::check_identifier(nm, sl.line);
                    if (scope.symbols.count(nm) || scope.constants.count(nm))
                        throw DuplicateSymbol(nm);
                    Rational v =
                      detail::parse_constant_value(detail::trim(piece.substr(eq + 1)), sl.line);
                    scope.constants.emplace(nm, v);
                    m.known_constants.emplace_back(nm, v);
                } else {
                    for (const auto &nm : detail::split_names(piece, sl.line))
                        m.parameters.push_back(declare(nm, SymbolKind::Parameter, sl.line));
                }
            }
            break;
        }
        case Section::KnownInputs:
            for (const auto &nm : detail::split_names(sl.text, sl.line))
                m.known_inputs.push_back(declare(nm, SymbolKind::KnownInputDeriv, sl.line));
            break;
        case Section::UnknownInputs:
            for (const auto &nm : detail::split_names(sl.text, sl.line))
                m.unknown_inputs.push_back(declare(nm, SymbolKind::UnknownInputDeriv, sl.line));
            break;
        default:
            break;
        }
    }

    if (m.states.empty()) throw ParseError(1, "no states declared");

    // Pass 2b: dynamics, outputs, options.
    std::unordered_map<Symbol, Expr> dynamics_by_state;
    std::size_t output_index = 0;
    for (const auto &sl : content) {
        if (sl.section != Section::Dynamics && sl.section != Section::Outputs &&
            sl.section != Section::Options)
            continue;
        auto eq = sl.text.find('=');
        if (eq == std::string::npos) throw ParseError(sl.line, "'=' expected");
        std::string lhs = detail::trim(sl.text.substr(0, eq));
        std::string rhs = detail::trim(sl.text.substr(eq + 1));
        if (rhs.empty()) throw ParseError(sl.line, "empty right-hand side");

        switch (sl.section) {
        case Section::Dynamics: {
            if (lhs.size() < 2 || lhs.back() != '\'')
                throw ParseError(sl.line, "dynamics lines have the form <state>' = <expr>");
            std::string nm = detail::trim(lhs.substr(0, lhs.size() - 1));
            auto it = scope.symbols.find(nm);
            if (it == scope.symbols.end()) throw UndeclaredSymbol(sl.line, nm);
            if (it->second->kind != SymbolKind::State)
                throw ParseError(sl.line, "'" + nm + "' is not a state");
            if (dynamics_by_state.count(it->second))
                throw ParseError(sl.line, "duplicate dynamics for state '" + nm + "'");
            dynamics_by_state.emplace(it->second, detail::parse_expression(rhs, sl.line, scope));
            break;
        }
        case Section::Outputs: {
            ++output_index;
            if (lhs != "y" + std::to_string(output_index))
                throw ParseError(sl.line, "output lines must be labeled y1, y2, ... in order");
            m.outputs.push_back(detail::parse_expression(rhs, sl.line, scope));
            break;
        }
        case Section::Options: {
            auto dot = lhs.find('.');
            if (dot == std::string::npos) throw ParseError(sl.line, "unknown option '" + lhs + "'");
            std::string key = lhs.substr(0, dot);
            std::string nm = detail::trim(lhs.substr(dot + 1));
            auto it = scope.symbols.find(nm);
            if (key == "u_deriv_bound") {
                if (it == scope.symbols.end() || it->second->kind != SymbolKind::KnownInputDeriv)
                    throw UndeclaredSymbol(sl.line, nm);
                if (rhs == "unbounded") {
                    m.u_deriv_bound[it->second] = -1;
                } else {
                    Rational v = detail::parse_constant_value(rhs, sl.line);
                    if (!v.is_integer() || v < Rational(0))
                        throw ParseError(sl.line, "u_deriv_bound must be a nonnegative integer or 'unbounded'");
                    m.u_deriv_bound[it->second] = static_cast<int>(v.num());
                }
            } else if (key == "w_deriv_bound") {
                if (it == scope.symbols.end() || it->second->kind != SymbolKind::UnknownInputDeriv)
                    throw UndeclaredSymbol(sl.line, nm);
                if (rhs == "unbounded")
                    throw ParseError(sl.line, "w_deriv_bound must be a nonnegative integer");
                Rational v = detail::parse_constant_value(rhs, sl.line);
                if (!v.is_integer() || v < Rational(0))
                    throw ParseError(sl.line, "w_deriv_bound must be a nonnegative integer");
                m.w_deriv_bound[it->second] = static_cast<int>(v.num());
            } else {
                throw ParseError(sl.line, "unknown option '" + key + "'");
            }
            break;
        }
        default:
            break;
        }
    }

    for (Symbol s : m.states) {
        auto it = dynamics_by_state.find(s);
        if (it == dynamics_by_state.end())
            throw ParseError(1, "missing dynamics for state '" + s->name + "'");
        m.dynamics.push_back(it->second);
    }
    if (m.outputs.empty()) throw ParseError(1, "no outputs declared");

    // Fill default derivative bounds so the maps are total.
    for (Symbol u : m.known_inputs) m.u_deriv_bound.emplace(u, -1);
    for (Symbol w : m.unknown_inputs) m.w_deriv_bound.emplace(w, 1);
    return m;
}

/// Serialize a model to the file format; parse(write(m)) reproduces m.
inline std::string write_model(const Model &m) {
    std::string out;
    auto names = [](const std::vector<Symbol> &syms) {
        std::string s;
        for (std::size_t i = 0; i < syms.size(); ++i) {
            if (i) s += ", ";
            s += syms[i]->name;
        }
        return s;
    };
    out += "states:\n  " + names(m.states) + "\n";
    if (!m.parameters.empty() || !m.known_constants.empty()) {
        out += "parameters:\n";
        if (!m.parameters.empty()) out += "  " + names(m.parameters) + "\n";
        for (const auto &[nm, v] : m.known_constants) out += "  " + nm + " = " + v.str() + "\n";
    }
    if (!m.known_inputs.empty()) out += "known_inputs:\n  " + names(m.known_inputs) + "\n";
    if (!m.unknown_inputs.empty()) out += "unknown_inputs:\n  " + names(m.unknown_inputs) + "\n";
    out += "dynamics:\n";
    for (std::size_t i = 0; i < m.states.size(); ++i)
        out += "  " + m.states[i]->name + "' = " + to_string(m.dynamics[i]) + "\n";
    out += "outputs:\n";
    for (std::size_t i = 0; i < m.outputs.size(); ++i)
        out += "  y" + std::to_string(i + 1) + " = " + to_string(m.outputs[i]) + "\n";
    std::string options;
    for (Symbol u : m.known_inputs) {
        int b = m.u_deriv_bound.at(u);
        if (b != -1) options += "  u_deriv_bound." + u->name + " = " + std::to_string(b) + "\n";
    }
    for (Symbol w : m.unknown_inputs) {
        int b = m.w_deriv_bound.at(w);
        if (b != 1) options += "  w_deriv_bound." + w->name + " = " + std::to_string(b) + "\n";
    }
    if (!options.empty()) out += "options:\n" + options;
    return out;
}

/// Structural equality (used by round-trip tests).
inline bool model_equal(const Model &a, const Model &b) {
    return a.states == b.states && a.parameters == b.parameters &&
           a.known_inputs == b.known_inputs && a.unknown_inputs == b.unknown_inputs &&
           a.dynamics == b.dynamics && a.outputs == b.outputs &&
           a.known_constants == b.known_constants && a.u_deriv_bound == b.u_deriv_bound &&
           a.w_deriv_bound == b.w_deriv_bound;
}

} // namespace obskit
