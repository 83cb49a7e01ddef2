#include "lof/ltl.hpp"

#include <doctest.h>

#include <vector>

using namespace lof;
using namespace lof::ltl;

namespace {

const std::set<std::string> kProps{"a", "b", "c", "h", "o", "e", "can"};

Formula P(const std::string& s) { return parse_ltl(s, kProps); }

// Finite-trace truth at position i, straight from the definitions.
bool holds(const Formula& f, const std::vector<std::set<std::string>>& w, std::size_t i) {
    const std::size_t n = w.size();
    switch (f.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Prop: return w[i].count(f.name()) > 0;
    case Op::Not: return !holds(f.child(0), w, i);
    case Op::And:
        for (const auto& c : f.children())
            if (!holds(c, w, i)) return false;
        return true;
    case Op::Or:
        for (const auto& c : f.children())
            if (holds(c, w, i)) return true;
        return false;
    case Op::Next: return i + 1 < n && holds(f.child(0), w, i + 1);
    case Op::Eventually:
        for (std::size_t j = i; j < n; ++j)
            if (holds(f.child(0), w, j)) return true;
        return false;
    case Op::Always:
        for (std::size_t j = i; j < n; ++j)
            if (!holds(f.child(0), w, j)) return false;
        return true;
    case Op::Until:
        for (std::size_t j = i; j < n; ++j) {
            if (holds(f.child(1), w, j)) return true;
            if (!holds(f.child(0), w, j)) return false;
        }
        return false;
    }
    return false;
}

bool accepted(const Formula& f, const std::vector<std::set<std::string>>& w) {
    Formula r = f;
    for (const auto& l : w) r = progress(r, l);
    return accepts_empty(r);
}

} // namespace

TEST_CASE("parse builds the expected trees") {
    const auto seq = P("F(a & F(b & F(c & F h))) & G !o");
    CHECK(seq.op() == Op::And);
    CHECK(seq.str() == P("(F(a & F(b & F(c & F(h))))) & G(!o)").str());
    CHECK(P("a").op() == Op::Prop);
    CHECK(P("a").name() == "a");
    const auto f = P("F (a | b) & F c");
    REQUIRE(f.op() == Op::And);
    CHECK(f.children().size() == 2);
}

TEST_CASE("printed form reparses to the same tree") {
    for (const char* text : {"F(a & F(b & F(c & F h))) & G !o", "a U (b U c)", "X X a | !b", "a -> F b",
                             "((F(c & F a) & G !can) | (F a & F can)) & G !o"}) {
        const auto f = P(text);
        CHECK(P(f.str()) == f);
    }
}

TEST_CASE("unicode aliases match ascii") {
    CHECK(P("◇(a ∧ ◇ b) ∧ □ ¬o") == P("F(a & F b) & G !o"));
    CHECK(P("a → ◯ b") == P("a -> X b"));
}

TEST_CASE("precedence and associativity") {
    CHECK(P("a | b & c") == P("a | (b & c)"));
    CHECK(P("a U b U c") == P("a U (b U c)"));
    CHECK(P("!F a") == Formula::negation(P("F a")));
    CHECK(P("a -> b") == P("!a | b"));
}

TEST_CASE("parse errors carry offsets") {
    try {
        P("F (a &");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 6);
    }
    CHECK_THROWS_AS(P(""), ParseError);
    CHECK_THROWS_AS(P("a $ b"), ParseError);
    try {
        P("F zz");
        FAIL("expected undeclared proposition");
    } catch (const UndeclaredProposition& e) {
        CHECK(e.proposition() == "zz");
    }
}

TEST_CASE("co-safety check") {
    CHECK(check_cosafe(P("F a")).cosafe);
    const auto g = check_cosafe(P("G !o"));
    CHECK_FALSE(g.cosafe);
    CHECK(g.path.empty());
    const auto nf = check_cosafe(P("!(F a)"));
    CHECK_FALSE(nf.cosafe);
    CHECK(nf.path == std::vector<std::size_t>{0});
    CHECK(check_translatable(P("F a & G !can"), {"can"}).cosafe);
    CHECK_FALSE(check_translatable(P("F a & G !o"), {"can"}).cosafe);
}

TEST_CASE("split_spec separates safety") {
    const auto s = split_spec(P("F((a | b) & F c) & G !o"), {"o", "e"});
    CHECK(s.safety == std::vector<std::string>{"o"});
    CHECK(s.liveness == P("F((a | b) & F c)"));
    const auto plain = split_spec(P("F a"), {"o", "e"});
    CHECK(plain.safety.empty());
    CHECK(plain.liveness == P("F a"));
    CHECK_THROWS_AS(split_spec(P("G !o"), {"o", "e"}), Error);
    CHECK(reassemble(s) == P("F((a | b) & F c) & G !o"));
}

TEST_CASE("progression examples") {
    CHECK(progress(P("F a"), {"a"}).is_true());
    CHECK(progress(P("F a"), std::set<std::string>{}) == P("F a"));
    CHECK(progress(P("a U b"), {"a"}) == P("a U b"));
    CHECK(progress(P("a U b"), std::set<std::string>{}).is_false());
    CHECK(progress(P("G a"), std::set<std::string>{}).is_false());
}

TEST_CASE("a U b agrees with trace semantics on every two-step trace") {
    const auto f = P("a U b");
    const std::vector<std::set<std::string>> letters{{}, {"a"}, {"b"}, {"a", "b"}};
    for (const auto& x : letters)
        for (const auto& y : letters) {
            const std::vector<std::set<std::string>> w{x, y};
            CHECK(accepted(f, w) == holds(f, w, 0));
        }
}

TEST_CASE("next needs a successor position") {
    CHECK_FALSE(accepted(P("X G a"), {{"a"}}));
    CHECK(accepted(P("X G a"), {{"a"}, {"a"}}));
    CHECK_FALSE(accepted(P("X true"), {{}}));
    CHECK(accepted(P("X true"), {{}, {}}));
}

TEST_CASE("negation normal form") {
    CHECK(to_nnf(P("!(a & F b)")) == P("!a | G !b"));
    CHECK(to_nnf(P("!G a")) == P("F !a"));
    CHECK(to_nnf(P("!!a")) == P("a"));
    CHECK_THROWS_AS(to_nnf(P("!X a")), Error);
}

TEST_CASE("simplification canonicalizes") {
    CHECK(simplify_and({P("b"), P("a")}) == simplify_and({P("a"), P("b")}));
    CHECK(simplify_and({P("a"), P("!a")}).is_false());
    CHECK(simplify_or({P("a"), P("!a")}).is_true());
    CHECK(simplify_and({P("a"), P("a")}) == P("a"));
    CHECK(simplify_or({P("a"), simplify_and({P("a"), P("b")})}) == P("a"));
}

TEST_CASE("depth and propositions") {
    CHECK(depth(P("a")) == 1);
    CHECK(depth(P("F(a & F b)")) == 4);
    CHECK(propositions(P("F(a & F b) & G !o")) == std::set<std::string>{"a", "b", "o"});
}
