#include "lof/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace lof::ltl {

namespace {

std::string render(Op op, const std::string& name, const std::vector<Formula>& kids) {
    switch (op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Prop: return name;
    case Op::Not: return "!" + kids[0].str();
    case Op::Next: return "X " + kids[0].str();
    case Op::Eventually: return "F " + kids[0].str();
    case Op::Always: return "G " + kids[0].str();
    case Op::Until: return "(" + kids[0].str() + " U " + kids[1].str() + ")";
    case Op::And:
    case Op::Or: {
        const char* sep = op == Op::And ? " & " : " | ";
        std::string out = "(";
        for (std::size_t i = 0; i < kids.size(); ++i) {
            if (i) out += sep;
            out += kids[i].str();
        }
        return out + ")";
    }
    }
    return {};
}

bool is_keyword(std::string_view id) {
    return id == "X" || id == "F" || id == "G" || id == "U" || id == "true" || id == "false" ||
           id == "True" || id == "False";
}

} // namespace

Formula Formula::make(Op op, std::string name, std::vector<Formula> children) {
    std::string text = render(op, name, children);
    return Formula(std::make_shared<const Node>(Node{op, std::move(name), std::move(children), std::move(text)}));
}

Formula::Formula() : Formula(top()) {}

Formula Formula::top() {
    static const Formula t = make(Op::True, {}, {});
    return t;
}
Formula Formula::bottom() {
    static const Formula f = make(Op::False, {}, {});
    return f;
}
Formula Formula::prop(std::string name) {
    if (name.empty()) throw Error("empty proposition name");
    return make(Op::Prop, std::move(name), {});
}
Formula Formula::negation(Formula c) { return make(Op::Not, {}, {std::move(c)}); }
Formula Formula::conjunction(std::vector<Formula> c) {
    if (c.size() < 2) throw Error("conjunction needs at least two operands");
    return make(Op::And, {}, std::move(c));
}
Formula Formula::disjunction(std::vector<Formula> c) {
    if (c.size() < 2) throw Error("disjunction needs at least two operands");
    return make(Op::Or, {}, std::move(c));
}
Formula Formula::next(Formula c) { return make(Op::Next, {}, {std::move(c)}); }
Formula Formula::until(Formula l, Formula r) { return make(Op::Until, {}, {std::move(l), std::move(r)}); }
Formula Formula::eventually(Formula c) { return make(Op::Eventually, {}, {std::move(c)}); }
Formula Formula::always(Formula c) { return make(Op::Always, {}, {std::move(c)}); }

bool Formula::is_temporal() const {
    return op() == Op::Next || op() == Op::Until || op() == Op::Eventually || op() == Op::Always;
}

bool Formula::is_literal() const {
    return op() == Op::Prop || (op() == Op::Not && child(0).op() == Op::Prop);
}

std::string to_string(const Formula& f) { return f.str(); }

ParseError::ParseError(const std::string& msg, std::size_t offset)
    : Error("parse error at byte " + std::to_string(offset) + ": " + msg), offset_(offset) {}

UndeclaredProposition::UndeclaredProposition(std::string name)
    : Error("undeclared proposition '" + name + "'"), name_(std::move(name)) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, True, False, Not, And, Or, Implies, Iff, Next, Until, Eventually, Always, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t offset;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, {}, pos_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(std::string_view s) {
        if (src_.substr(pos_, s.size()) == s) {
            pos_ += s.size();
            return true;
        }
        return false;
    }

    Token next() {
        const std::size_t start = pos_;
        auto tok = [&](Tok k) { return Token{k, std::string(src_.substr(start, pos_ - start)), start}; };

        // multi-byte and multi-char operators first
        if (eat("<->") || eat("<=>") || eat("↔")) return tok(Tok::Iff);
        if (eat("->") || eat("=>") || eat("→")) return tok(Tok::Implies);
        if (eat("<>") || eat("◇")) return tok(Tok::Eventually);
        if (eat("[]") || eat("□")) return tok(Tok::Always);
        if (eat("&&") || eat("/\\") || eat("∧") || eat("&")) return tok(Tok::And);
        if (eat("||") || eat("\\/") || eat("∨") || eat("|")) return tok(Tok::Or);
        if (eat("!") || eat("~") || eat("¬")) return tok(Tok::Not);
        if (eat("◯") || eat("○")) return tok(Tok::Next);
        if (eat("⊤")) return tok(Tok::True);
        if (eat("⊥")) return tok(Tok::False);
        if (eat("(")) return tok(Tok::LParen);
        if (eat(")")) return tok(Tok::RParen);

        const unsigned char c = static_cast<unsigned char>(src_[pos_]);
        if (std::isalpha(c) || c == '_') {
            while (pos_ < src_.size()) {
                const unsigned char d = static_cast<unsigned char>(src_[pos_]);
                if (!(std::isalnum(d) || d == '_')) break;
                ++pos_;
            }
            Token t = tok(Tok::Ident);
            if (t.text == "X") t.kind = Tok::Next;
            else if (t.text == "F") t.kind = Tok::Eventually;
            else if (t.text == "G") t.kind = Tok::Always;
            else if (t.text == "U") t.kind = Tok::Until;
            else if (t.text == "true" || t.text == "True") t.kind = Tok::True;
            else if (t.text == "false" || t.text == "False") t.kind = Tok::False;
            return t;
        }
        throw ParseError("unexpected character", start);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const std::set<std::string>& declared)
        : toks_(std::move(toks)), declared_(declared) {}

    Formula parse() {
        Formula f = implication();
        if (peek().kind != Tok::End) throw ParseError("unexpected token '" + peek().text + "'", peek().offset);
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    // a -> b == !a | b; a <-> b == (!a | b) & (a | !b)
    Formula implication() {
        Formula lhs = until();
        if (peek().kind == Tok::Implies) {
            take();
            Formula rhs = implication();
            return Formula::disjunction({Formula::negation(lhs), rhs});
        }
        if (peek().kind == Tok::Iff) {
            take();
            Formula rhs = implication();
            return Formula::conjunction({Formula::disjunction({Formula::negation(lhs), rhs}),
                                         Formula::disjunction({lhs, Formula::negation(rhs)})});
        }
        return lhs;
    }

    Formula until() {
        Formula lhs = disjunction();
        if (peek().kind == Tok::Until) {
            take();
            Formula rhs = until();
            return Formula::until(lhs, rhs);
        }
        return lhs;
    }

    Formula disjunction() {
        std::vector<Formula> parts{conjunction()};
        while (peek().kind == Tok::Or) {
            take();
            parts.push_back(conjunction());
        }
        return parts.size() == 1 ? parts.front() : Formula::disjunction(std::move(parts));
    }

    Formula conjunction() {
        std::vector<Formula> parts{unary()};
        while (peek().kind == Tok::And) {
            take();
            parts.push_back(unary());
        }
        return parts.size() == 1 ? parts.front() : Formula::conjunction(std::move(parts));
    }

    Formula unary() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Not: take(); return Formula::negation(unary());
        case Tok::Next: take(); return Formula::next(unary());
        case Tok::Eventually: take(); return Formula::eventually(unary());
        case Tok::Always: take(); return Formula::always(unary());
        default: return primary();
        }
    }

    Formula primary() {
        const Token t = take();
        switch (t.kind) {
        case Tok::True: return Formula::top();
        case Tok::False: return Formula::bottom();
        case Tok::Ident:
            if (!declared_.count(t.text)) throw UndeclaredProposition(t.text);
            return Formula::prop(t.text);
        case Tok::LParen: {
            Formula inner = implication();
            if (peek().kind != Tok::RParen) throw ParseError("expected ')'", peek().offset);
            take();
            return inner;
        }
        case Tok::End: throw ParseError("unexpected end of input", t.offset);
        default: throw ParseError("unexpected token '" + t.text + "'", t.offset);
        }
    }

    std::vector<Token> toks_;
    const std::set<std::string>& declared_;
    std::size_t pos_ = 0;
};

} // namespace

Formula parse_ltl(std::string_view text, const std::set<std::string>& declared) {
    bool blank = true;
    for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (blank) throw ParseError("empty formula", 0);
    for (const auto& p : declared)
        if (is_keyword(p)) throw Error("proposition name '" + p + "' is reserved");
    return Parser(Lexer(text).run(), declared).parse();
}

// ---------------------------------------------------------------------------
// Co-safety

namespace {

bool propositional_over(const Formula& f, const std::set<std::string>& props) {
    switch (f.op()) {
    case Op::True:
    case Op::False: return true;
    case Op::Prop: return props.count(f.name()) > 0;
    case Op::Not:
    case Op::And:
    case Op::Or:
        return std::all_of(f.children().begin(), f.children().end(),
                           [&](const Formula& c) { return propositional_over(c, props); });
    default: return false;
    }
}

bool walk_cosafe(const Formula& f, bool positive, const std::set<std::string>* invariants,
                 std::vector<std::size_t>& path, std::string& reason) {
    switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Prop: return true;
    case Op::Not:
        path.push_back(0);
        if (!walk_cosafe(f.child(0), !positive, invariants, path, reason)) return false;
        path.pop_back();
        return true;
    case Op::And:
    case Op::Or:
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            path.push_back(i);
            if (!walk_cosafe(f.child(i), positive, invariants, path, reason)) return false;
            path.pop_back();
        }
        return true;
    case Op::Always:
        if (positive && invariants && propositional_over(f.child(0), *invariants)) return true;
        reason = positive ? "G is not allowed in co-safe formulas" : "negated temporal operator";
        return false;
    case Op::Eventually:
    case Op::Next:
    case Op::Until:
        if (!positive) {
            reason = "negated temporal operator";
            return false;
        }
        for (std::size_t i = 0; i < f.children().size(); ++i) {
            path.push_back(i);
            if (!walk_cosafe(f.child(i), positive, invariants, path, reason)) return false;
            path.pop_back();
        }
        return true;
    }
    return true;
}

} // namespace

CosafeReport check_cosafe(const Formula& f) {
    CosafeReport r;
    r.cosafe = walk_cosafe(f, true, nullptr, r.path, r.reason);
    if (r.cosafe) r.path.clear();
    return r;
}

CosafeReport check_translatable(const Formula& f, const std::set<std::string>& invariant_props) {
    CosafeReport r;
    r.cosafe = walk_cosafe(f, true, &invariant_props, r.path, r.reason);
    if (r.cosafe) r.path.clear();
    return r;
}

SpecSplit split_spec(const Formula& f, const std::set<std::string>& safety_props,
                     const std::set<std::string>& invariant_props) {
    std::vector<Formula> conjuncts;
    std::function<void(const Formula&)> flatten = [&](const Formula& g) {
        if (g.op() == Op::And)
            for (const auto& c : g.children()) flatten(c);
        else
            conjuncts.push_back(g);
    };
    flatten(f);

    SpecSplit out;
    std::vector<Formula> live;
    for (const auto& c : conjuncts) {
        if (c.op() == Op::Always && c.child(0).op() == Op::Not && c.child(0).child(0).op() == Op::Prop &&
            safety_props.count(c.child(0).child(0).name())) {
            out.safety.push_back(c.child(0).child(0).name());
            continue;
        }
        for (const auto& p : propositions(c))
            if (safety_props.count(p))
                throw Error("non-factorable specification: safety proposition '" + p +
                            "' occurs outside a G !p conjunct in " + c.str());
        const CosafeReport rep = check_translatable(c, invariant_props);
        if (!rep.cosafe)
            throw Error("non-factorable specification: conjunct " + c.str() + " is neither co-safe nor G !p (" +
                        rep.reason + ")");
        live.push_back(c);
    }
    if (live.empty()) throw Error("non-factorable specification: empty liveness part");
    out.liveness = live.size() == 1 ? live.front() : Formula::conjunction(live);
    return out;
}

Formula reassemble(const SpecSplit& split) {
    std::vector<Formula> parts;
    if (split.liveness.op() == Op::And)
        parts = split.liveness.children();
    else
        parts.push_back(split.liveness);
    for (const auto& p : split.safety) parts.push_back(Formula::always(Formula::negation(Formula::prop(p))));
    return parts.size() == 1 ? parts.front() : Formula::conjunction(parts);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool complementary(const Formula& a, const Formula& b) {
    return (a.op() == Op::Not && a.child(0) == b) || (b.op() == Op::Not && b.child(0) == a);
}

Formula simplify_nary(Op op, std::vector<Formula> children) {
    const Op dual = op == Op::And ? Op::Or : Op::And;
    const Formula unit = op == Op::And ? Formula::top() : Formula::bottom();
    const Formula zero = op == Op::And ? Formula::bottom() : Formula::top();

    std::vector<Formula> flat;
    for (auto& c : children) {
        if (c.op() == op)
            flat.insert(flat.end(), c.children().begin(), c.children().end());
        else
            flat.push_back(std::move(c));
    }

    std::vector<Formula> kept;
    for (auto& c : flat) {
        if (c == zero) return zero;
        if (c == unit) continue;
        kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());

    for (std::size_t i = 0; i + 1 < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j)
            if (complementary(kept[i], kept[j])) return zero;

    // absorption: x & (x | y) -> x, x | (x & y) -> x
    std::vector<Formula> absorbed;
    for (const auto& c : kept) {
        bool drop = false;
        if (c.op() == dual) {
            for (const auto& other : kept) {
                if (other == c) continue;
                const auto& sub = c.children();
                if (std::find(sub.begin(), sub.end(), other) != sub.end()) {
                    drop = true;
                    break;
                }
            }
        }
        if (!drop) absorbed.push_back(c);
    }

    if (absorbed.empty()) return unit;
    if (absorbed.size() == 1) return absorbed.front();
    return op == Op::And ? Formula::conjunction(std::move(absorbed)) : Formula::disjunction(std::move(absorbed));
}

} // namespace

Formula simplify_and(std::vector<Formula> children) { return simplify_nary(Op::And, std::move(children)); }
Formula simplify_or(std::vector<Formula> children) { return simplify_nary(Op::Or, std::move(children)); }

Formula simplify_not(Formula child) {
    if (child.is_true()) return Formula::bottom();
    if (child.is_false()) return Formula::top();
    if (child.op() == Op::Not) return child.child(0);
    return Formula::negation(std::move(child));
}

Formula to_nnf(const Formula& f) {
    std::function<Formula(const Formula&, bool)> go = [&](const Formula& g, bool neg) -> Formula {
        switch (g.op()) {
        case Op::True: return neg ? Formula::bottom() : Formula::top();
        case Op::False: return neg ? Formula::top() : Formula::bottom();
        case Op::Prop: return neg ? Formula::negation(g) : g;
        case Op::Not: return go(g.child(0), !neg);
        case Op::And:
        case Op::Or: {
            std::vector<Formula> kids;
            for (const auto& c : g.children()) kids.push_back(go(c, neg));
            const bool conj = (g.op() == Op::And) != neg;
            return conj ? simplify_and(std::move(kids)) : simplify_or(std::move(kids));
        }
        case Op::Eventually:
            return neg ? Formula::always(go(g.child(0), true)) : Formula::eventually(go(g.child(0), false));
        case Op::Always:
            return neg ? Formula::eventually(go(g.child(0), true)) : Formula::always(go(g.child(0), false));
        case Op::Next:
            if (neg) throw Error("negated X has no normal form without weak next: " + g.str());
            return Formula::next(go(g.child(0), false));
        case Op::Until:
            if (neg) throw Error("negated U has no normal form without release: " + g.str());
            return Formula::until(go(g.child(0), false), go(g.child(1), false));
        }
        return g;
    };
    return go(f, false);
}

std::set<std::string> propositions(const Formula& f) {
    std::set<std::string> out;
    std::function<void(const Formula&)> go = [&](const Formula& g) {
        if (g.op() == Op::Prop) out.insert(g.name());
        for (const auto& c : g.children()) go(c);
    };
    go(f);
    return out;
}

// ---------------------------------------------------------------------------
// Progression

Formula progress(const Formula& f, const Valuation& truth) {
    switch (f.op()) {
    case Op::True:
    case Op::False: return f;
    case Op::Prop: return truth(f.name()) ? Formula::top() : Formula::bottom();
    case Op::Not: return simplify_not(progress(f.child(0), truth));
    case Op::And:
    case Op::Or: {
        std::vector<Formula> kids;
        kids.reserve(f.children().size());
        for (const auto& c : f.children()) {
            Formula p = progress(c, truth);
            // short-circuit on the absorbing constant
            if (f.op() == Op::And && p.is_false()) return p;
            if (f.op() == Op::Or && p.is_true()) return p;
            kids.push_back(std::move(p));
        }
        return f.op() == Op::And ? simplify_and(std::move(kids)) : simplify_or(std::move(kids));
    }
    case Op::Next:
        // the successor position must exist: F true holds exactly on non-empty suffixes
        return simplify_and({f.child(0), Formula::eventually(Formula::top())});
    case Op::Eventually: return simplify_or({progress(f.child(0), truth), f});
    case Op::Always: return simplify_and({progress(f.child(0), truth), f});
    case Op::Until:
        return simplify_or({progress(f.child(1), truth), simplify_and({progress(f.child(0), truth), f})});
    }
    return f;
}

Formula progress(const Formula& f, const std::set<std::string>& true_props) {
    return progress(f, [&](const std::string& p) { return true_props.count(p) > 0; });
}

bool accepts_empty(const Formula& r) {
    switch (r.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Always: return true;
    case Op::Eventually:
    case Op::Until:
    case Op::Next: return false;
    case Op::And:
        return std::all_of(r.children().begin(), r.children().end(), [](const Formula& c) { return accepts_empty(c); });
    case Op::Or:
        return std::any_of(r.children().begin(), r.children().end(), [](const Formula& c) { return accepts_empty(c); });
    case Op::Prop:
    case Op::Not: return false;
    }
    return false;
}

bool eval_propositional(const Formula& f, const Valuation& truth) {
    switch (f.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Prop: return truth(f.name());
    case Op::Not: return !eval_propositional(f.child(0), truth);
    case Op::And:
        for (const auto& c : f.children())
            if (!eval_propositional(c, truth)) return false;
        return true;
    case Op::Or:
        for (const auto& c : f.children())
            if (eval_propositional(c, truth)) return true;
        return false;
    default: throw Error("temporal operator in propositional context: " + f.str());
    }
}

std::size_t depth(const Formula& f) {
    std::size_t d = 0;
    for (const auto& c : f.children()) d = std::max(d, depth(c));
    return d + 1;
}

} // namespace lof::ltl
