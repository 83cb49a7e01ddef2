#include "lof/automata.hpp"
#include "lof/ltl_translate.hpp"

#include <doctest.h>

using namespace lof;

namespace {

const PropositionPartition kP = delivery_partition();

ltl::Formula G(const std::string& s) { return ltl::parse_ltl(s, kP.all()); }

Fsa chain_ab() {
    Fsa f;
    f.states = {"init", "s1", "goal"};
    f.reward = {1, 1, 1};
    f.initial_states = {0};
    f.goal_states = {2};
    f.edges = {{0, 1, G("a")}, {1, 2, G("b")}};
    return f;
}

bool has_kind(const std::vector<Violation>& v, Violation::Kind k) {
    for (const auto& x : v)
        if (x.kind == k) return true;
    return false;
}

} // namespace

TEST_CASE("letters enumerate subgoal-or-none times events") {
    CHECK(kP.letter_count() == 10);
    for (std::size_t i = 0; i < kP.letter_count(); ++i) CHECK(letter_index(kP, letter_at(kP, i)) == i);
    CHECK(kP.overlaps().empty());
    PropositionPartition bad{{"a"}, {"a"}, {}};
    CHECK_FALSE(bad.overlaps().empty());
}

TEST_CASE("guard evaluation") {
    CHECK(eval_guard(G("a & can"), {"a"}, {{"can", true}}));
    CHECK(eval_guard(ltl::Formula::top(), std::set<std::string>{}, std::map<std::string, bool>{}));
    CHECK_FALSE(eval_guard(G("a & !can"), {"a"}, {{"can", true}}));
    CHECK(eval_guard(G("a | b"), kP, Letter{1, 0}));
}

TEST_CASE("fsa_step follows edges, self-loops otherwise") {
    const auto seq = hand_coded_task_fsas().at("sequential");
    const auto init = seq.index_of("init");
    CHECK(seq.states[fsa_step(seq, init, {"a"}, {})] == "s1");
    CHECK(fsa_step(seq, init, {"b"}, {}) == init);
    for (std::size_t l = 0; l < kP.letter_count(); ++l) CHECK(fsa_step(seq, kP, seq.goal(), letter_at(kP, l)) == seq.goal());
}

TEST_CASE("overlapping guards are nondeterministic") {
    auto f = chain_ab();
    f.edges.push_back({0, 2, G("a | b")});
    CHECK_THROWS_AS(fsa_step(f, kP, 0, Letter{0, 0}), NondeterminismError);
    CHECK(has_kind(validate_fsa(f, kP), Violation::Kind::Nondeterminism));
}

TEST_CASE("validate_fsa") {
    for (const auto& [name, fsa] : hand_coded_task_fsas()) CHECK_MESSAGE(validate_fsa(fsa, kP).empty(), name);

    auto stuck = chain_ab();
    stuck.states.push_back("trap");
    stuck.reward.push_back(1.0);
    stuck.edges = {{0, 1, G("a")}, {1, 2, G("b")}, {0, 3, G("c")}};
    const auto v = validate_fsa(stuck, kP);
    CHECK(v.size() == 1);
    CHECK(has_kind(v, Violation::Kind::GoalUnreachable));

    auto zero = chain_ab();
    zero.reward[1] = 0.0;
    CHECK(has_kind(validate_fsa(zero, kP), Violation::Kind::Reward));

    auto two = chain_ab();
    two.initial_states = {0, 1};
    CHECK(has_kind(validate_fsa(two, kP), Violation::Kind::InitialCount));
}

TEST_CASE("hand-coded automata") {
    const auto h = hand_coded_task_fsas();
    CHECK(h.at("sequential").size() == 5);
    CHECK(h.at("or").size() == 3);
    CHECK(h.at("if").size() == 5);
    const auto& comp = h.at("composite");
    CHECK(comp.size() == 7);
    // from init, a or b without the cancellation moves on; with it, a or b leads elsewhere
    const auto init = comp.initial();
    const auto after_a = fsa_step(comp, kP, init, Letter{0, 0});
    const auto after_b = fsa_step(comp, kP, init, Letter{1, 0});
    CHECK(after_a != init);
    CHECK(after_a == after_b);
    CHECK(fsa_step(comp, kP, init, Letter{0, 1}) != after_a);
}

TEST_CASE("translation of small formulas") {
    const auto fa = translate_cosafe_to_fsa(G("F a"), kP);
    CHECK(fa.size() == 2);
    REQUIRE(fa.edges.size() == 1);
    CHECK(fa.edges[0].guard == G("a"));

    const auto top = translate_cosafe_to_fsa(ltl::Formula::top(), kP);
    CHECK(top.size() == 1);
    CHECK(top.is_goal(top.initial()));

    CHECK_THROWS_AS(translate_cosafe_to_fsa(G("F(a & F(b & F(c & F h)))"), kP, TranslateOptions{3}), StateExplosion);
    CHECK_THROWS_AS(compile_task("F o", kP), Error);
}

TEST_CASE("translated tasks match the hand-coded automata") {
    const auto h = hand_coded_task_fsas();
    for (const auto& [name, text] : task_formulas()) {
        const auto fsa = compile_task(text, kP);
        CHECK_MESSAGE(validate_fsa(fsa, kP).empty(), name);
        std::string why;
        CHECK_MESSAGE(fsa_isomorphic(fsa, h.at(name), kP, &why), name << ": " << why);
    }
}

TEST_CASE("isomorphism notices a dropped edge") {
    auto mutated = hand_coded_task_fsas().at("sequential");
    mutated.edges.pop_back();
    std::string why;
    CHECK_FALSE(fsa_isomorphic(mutated, hand_coded_task_fsas().at("sequential"), kP, &why));
    CHECK_FALSE(why.empty());
}

TEST_CASE("minimize_cover") {
    // x0 | x1 over two variables
    const auto c = minimize_cover(2, {1, 2, 3}, {});
    CHECK(c.size() == 2);
    // don't-cares let a single literal cover
    const auto d = minimize_cover(2, {1}, {3});
    REQUIRE(d.size() == 1);
    CHECK(d[0].first == 1u);
    CHECK(minimize_cover(3, {}, {}).empty());
}

TEST_CASE("transition table matches fsa_step") {
    for (const auto& [name, fsa] : hand_coded_task_fsas()) {
        const TransitionTable t(fsa, kP);
        for (std::size_t f = 0; f < fsa.size(); ++f)
            for (std::size_t l = 0; l < kP.letter_count(); ++l)
                CHECK(t.next(f, letter_at(kP, l)) == fsa_step(fsa, kP, f, letter_at(kP, l)));
    }
}

TEST_CASE("FSA JSON round trip") {
    for (const auto& [name, fsa] : hand_coded_task_fsas()) {
        const auto j = fsa_to_json(fsa);
        CHECK(j.at("initial") == "init");
        CHECK(j.at("goal") == "goal");
        const auto back = fsa_from_json(j, kP.all());
        CHECK(fsa_isomorphic(back, fsa, kP));
    }
    CHECK_THROWS_AS(fsa_from_json(nlohmann::json{{"states", {"x"}}}, kP.all()), Error);
}

TEST_CASE("trivial safety automaton charges per proposition") {
    auto s = SafetyAutomaton::trivial({{"o", -1000.0}});
    s.finalize(kP);
    CHECK(s.size() == 1);
    CHECK_FALSE(s.sink().has_value());
    const std::uint32_t o = 1u << kP.safety_index("o"), e = 1u << kP.safety_index("e");
    CHECK(s.cost(0, o) == -1000.0);
    CHECK(s.cost(0, e) == 0.0);
    CHECK_FALSE(s.step(0, o, 0).violated);
}

TEST_CASE("incomplete safety automaton gets a violation sink") {
    SafetyAutomaton s;
    s.states = {"ok"};
    s.edges = {{0, 0, ltl::parse_ltl("!o", kP.safety_props())}};
    s.initial_states = {0};
    s.violation_cost = -50.0;
    s.finalize(kP);
    REQUIRE(s.sink().has_value());
    const std::uint32_t o = 1u << kP.safety_index("o");
    const auto st = s.step(0, o, 0);
    CHECK(st.violated);
    CHECK(st.next == *s.sink());
    CHECK_FALSE(s.step(0, 1u << kP.safety_index("e"), 0).violated);
    const auto back = safety_from_json(safety_to_json(s), kP.safety_props());
    CHECK(back.states.size() == 1);
    CHECK(back.violation_cost == -50.0);
}
