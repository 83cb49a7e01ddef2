#include "lof/ltl_translate.hpp"
#include "lof/planner.hpp"

#include <doctest.h>

#include <cmath>

using namespace lof;

namespace {

struct World {
    GridMap map;
    EnvironmentMdp env;
    std::vector<LogicalOption> options;

    explicit World(const GridMap& m, std::uint64_t seed = 1) : map(m), env(m, partition_for(m)) {
        OptionTrainConfig c;
        c.seed = seed;
        options = train_all_options(env, c);
    }
    explicit World(const std::string& text) : World(load_map(text)) {}
};

PlannerConfig fixed(std::uint32_t events = 0) {
    PlannerConfig pc;
    pc.events = {EventMode::Fixed, events};
    return pc;
}

World delivery() { return World(load_map_file(data_path("data/maps/delivery.txt"))); }

} // namespace

TEST_CASE("event config text") {
    const auto p = delivery_partition();
    CHECK(parse_event_config("dist", p).mode == EventMode::PerDecision);
    const auto f = parse_event_config("fixed:can=1", p);
    CHECK(f.mode == EventMode::Fixed);
    CHECK(f.fixed == 1u);
    CHECK(parse_event_config("fixed", p).fixed == 0u);
    CHECK_THROWS_AS(parse_event_config("sometimes", p), Error);
}

TEST_CASE("goal-only automaton has zero value") {
    const World w("a.b\n");
    const auto fsa = translate_cosafe_to_fsa(ltl::Formula::top(), w.env.partition());
    const auto mu = logical_value_iteration(fsa, w.options, w.env, fixed());
    for (int s : w.env.free_cells()) CHECK(mu.V(0, s) == 0.0);
    const auto h = hmdp_value_iteration(fsa, w.env, 0);
    for (int s : w.env.free_cells()) CHECK(h.V(0, s) == 0.0);
}

TEST_CASE("a then b on a row equals the flat optimum") {
    const World w("a...b\n");
    const auto fsa = compile_task("F(a & F b)", w.env.partition());
    const auto mu = logical_value_iteration(fsa, w.options, w.env, fixed());
    const auto h = hmdp_value_iteration(fsa, w.env, 0);
    CHECK(mu.converged);
    // from (2,0): two steps left to a, four steps right to b
    CHECK(mu.V(fsa.initial(), 2) == -6.0);
    CHECK(h.V(fsa.initial(), 2) == -6.0);
    for (int s : {1, 2, 3}) CHECK(std::fabs(mu.V(fsa.initial(), s) - h.V(fsa.initial(), s)) <= 1e-9);
}

TEST_CASE("shortest path oracle for a single subgoal") {
    const World w("..a\n");
    const auto fsa = compile_task("F a", w.env.partition());
    CHECK(hmdp_value_iteration(fsa, w.env, 0).V(fsa.initial(), 0) == -2.0);
}

TEST_CASE("LVI picks the globally cheaper branch of an OR") {
    const World w(load_map_file(data_path("data/maps/greedy_or.txt")));
    const auto& p = w.env.partition();
    const auto fsa = compile_task("F((a | b) & F c)", p);
    const auto mu = logical_value_iteration(fsa, w.options, w.env, fixed());
    const int start = w.env.default_start();
    const int o = mu.option(fsa.initial(), start);
    REQUIRE(o >= 0);
    CHECK(w.options[static_cast<std::size_t>(o)].subgoal == "b");
    const TransitionTable table(fsa, p);
    const int g = greedy_metapolicy(fsa, table, w.options, fsa.initial(), start, 0);
    REQUIRE(g >= 0);
    CHECK(w.options[static_cast<std::size_t>(g)].subgoal == "a");
}

TEST_CASE("greedy follows the only outgoing edge") {
    const auto w = delivery();
    const auto fsa = compile_task(task_formulas().at("sequential"), w.env.partition());
    const TransitionTable table(fsa, w.env.partition());
    const int g = greedy_metapolicy(fsa, table, w.options, fsa.initial(), w.env.default_start(), 0);
    REQUIRE(g >= 0);
    CHECK(w.options[static_cast<std::size_t>(g)].subgoal == "a");
    CHECK(greedy_metapolicy(fsa, table, w.options, fsa.goal(), w.env.default_start(), 0) == -1);
}

TEST_CASE("LVI matches the product oracle on the delivery map") {
    const auto w = delivery();
    const int start = w.env.default_start();
    for (const auto& [name, text] : task_formulas()) {
        const auto fsa = compile_task(text, w.env.partition());
        for (std::uint32_t can = 0; can < 2; ++can) {
            const auto mu = logical_value_iteration(fsa, w.options, w.env, fixed(can));
            const auto h = hmdp_value_iteration(fsa, w.env, can);
            CHECK_MESSAGE(std::fabs(mu.V(fsa.initial(), start) - h.V(fsa.initial(), start)) <= 1e-9, name);
            CHECK(mu.sweeps <= 50);
        }
    }
}

TEST_CASE("parallel kernels match the serial references") {
    const auto w = delivery();
    for (const auto& [name, text] : task_formulas()) {
        const auto fsa = compile_task(text, w.env.partition());
        const auto a = logical_value_iteration(fsa, w.options, w.env, fixed(1));
        const auto b = reference::lvi_serial(fsa, w.options, w.env, fixed(1));
        CHECK(a.v == b.v);
        CHECK(a.mu == b.mu);
        CHECK(a.sweeps == b.sweeps);
        const auto h = hmdp_value_iteration(fsa, w.env, 0);
        const auto hs = reference::hmdp_serial(fsa, w.env, 0);
        CHECK(h.v == hs.v);
    }
}

TEST_CASE("converged values are a fixed point") {
    const auto w = delivery();
    const auto fsa = compile_task(task_formulas().at("composite"), w.env.partition());
    LviSolver solver(fsa, w.options, w.env, fixed());
    solver.solve();
    CHECK(solver.policy().converged);
    CHECK(solver.sweep() <= 1e-9);
}

TEST_CASE("unreachable subgoal leaves unsatisfiable rows") {
    const World w("a.#b\n..#.\n");
    const auto fsa = compile_task("F(a & F b)", w.env.partition());
    LviSolver solver(fsa, w.options, w.env, fixed());
    const auto& mu = solver.solve();
    CHECK(mu.V(fsa.initial(), 1) == kNegInf);
    CHECK(mu.option(fsa.initial(), 1) == -1);
    CHECK(solver.unsatisfiable_count() > 0);
}

TEST_CASE("degenerate event distribution equals fixed mode") {
    for (const char* header : {"events: can=1\n", "events: can=0\n"}) {
        const auto m = load_map(std::string(header) + "a....\n.#.#.\n..c.h\n");
        const World w(m);
        const auto fsa = compile_task("(F(c & F a) & G !can) | (F a & F can)", w.env.partition());
        const std::uint32_t can = m.event_probs.at("can") > 0.5 ? 1 : 0;
        PlannerConfig dist;
        dist.events = {EventMode::PerDecision, 0};
        const auto a = logical_value_iteration(fsa, w.options, w.env, dist);
        const auto b = logical_value_iteration(fsa, w.options, w.env, fixed(can));
        CHECK(a.v == b.v);
        CHECK(a.q == b.q);
    }
}

TEST_CASE("LOF-QL with exact updates converges to the LVI fixed point") {
    const World w("a...\n.#..\n...b\n");
    const auto fsa = compile_task("F(a & F b)", w.env.partition());
    const auto lvi = logical_value_iteration(fsa, w.options, w.env, fixed());
    MetaQLConfig qc;
    qc.alpha = 1.0;
    qc.epsilon = 0.3;
    qc.episodes = 3000;
    qc.seed = 3;
    const auto ql = lof_q_learning(fsa, w.options, w.env, {EventMode::Fixed, 0}, qc);
    for (int s : w.env.start_cells())
        CHECK(std::fabs(ql.V(fsa.initial(), s) - lvi.V(fsa.initial(), s)) <= 1e-6);
}

TEST_CASE("LOF-QL without exploration can stall") {
    const World w("a...\n.#..\n...b\n");
    const auto fsa = compile_task("F(a & F b)", w.env.partition());
    MetaQLConfig qc;
    qc.epsilon = 0.0;
    qc.episodes = 5;
    const auto ql = lof_q_learning(fsa, w.options, w.env, {EventMode::Fixed, 0}, qc);
    CHECK(ql.q.size() == fsa.size() * w.env.size() * w.options.size());
}

TEST_CASE("meta-policy JSON") {
    const World w("a.b\n");
    const auto fsa = compile_task("F a", w.env.partition());
    const auto j = metapolicy_to_json(logical_value_iteration(fsa, w.options, w.env, fixed()));
    CHECK(j.at("fsa_states") == fsa.size());
    CHECK(j.contains("mu"));
}
