#include "lof/automata.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace lof {

namespace {

int find_index(const std::vector<std::string>& v, const std::string& name) {
    const auto it = std::find(v.begin(), v.end(), name);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

ltl::Valuation letter_valuation(const PropositionPartition& p, Letter l) {
    return [&p, l](const std::string& name) {
        if (l.subgoal >= 0 && p.subgoals[static_cast<std::size_t>(l.subgoal)] == name) return true;
        const int e = p.event_index(name);
        return e >= 0 && ((l.events >> e) & 1u);
    };
}

} // namespace

int PropositionPartition::subgoal_index(const std::string& name) const { return find_index(subgoals, name); }
int PropositionPartition::safety_index(const std::string& name) const { return find_index(safety, name); }
int PropositionPartition::event_index(const std::string& name) const { return find_index(events, name); }

std::set<std::string> PropositionPartition::all() const {
    std::set<std::string> out(subgoals.begin(), subgoals.end());
    out.insert(safety.begin(), safety.end());
    out.insert(events.begin(), events.end());
    return out;
}

std::set<std::string> PropositionPartition::liveness_props() const {
    std::set<std::string> out(subgoals.begin(), subgoals.end());
    out.insert(events.begin(), events.end());
    return out;
}

std::set<std::string> PropositionPartition::safety_props() const {
    std::set<std::string> out(safety.begin(), safety.end());
    out.insert(events.begin(), events.end());
    return out;
}

std::vector<std::string> PropositionPartition::overlaps() const {
    std::map<std::string, int> seen;
    for (const auto* list : {&subgoals, &safety, &events})
        for (const auto& n : *list) ++seen[n];
    std::vector<std::string> out;
    for (const auto& [n, count] : seen)
        if (count > 1) out.push_back(n);
    return out;
}

std::size_t letter_index(const PropositionPartition& p, Letter l) {
    return (static_cast<std::size_t>(l.subgoal + 1) << p.events.size()) + l.events;
}

Letter letter_at(const PropositionPartition& p, std::size_t index) {
    const std::size_t mask = (std::size_t{1} << p.events.size()) - 1;
    return Letter{static_cast<int>(index >> p.events.size()) - 1, static_cast<std::uint32_t>(index & mask)};
}

bool eval_guard(const Guard& g, const PropositionPartition& p, Letter l) {
    return ltl::eval_propositional(g, letter_valuation(p, l));
}

bool eval_guard(const Guard& g, const std::set<std::string>& subgoals_true,
                const std::map<std::string, bool>& events) {
    if (subgoals_true.size() > 1) throw Error("at most one subgoal may be true per step");
    return ltl::eval_propositional(g, [&](const std::string& name) {
        if (subgoals_true.count(name)) return true;
        const auto it = events.find(name);
        return it != events.end() && it->second;
    });
}

// ---------------------------------------------------------------------------

std::size_t Fsa::initial() const {
    if (initial_states.size() != 1) throw Error("automaton must have exactly one initial state");
    return initial_states.front();
}

std::size_t Fsa::goal() const {
    if (goal_states.size() != 1) throw Error("automaton must have exactly one goal state");
    return goal_states.front();
}

std::size_t Fsa::index_of(const std::string& name) const {
    const int i = find_index(states, name);
    if (i < 0) throw Error("unknown automaton state '" + name + "'");
    return static_cast<std::size_t>(i);
}

bool Fsa::is_goal(std::size_t f) const {
    return std::find(goal_states.begin(), goal_states.end(), f) != goal_states.end();
}

void Fsa::make_goal_absorbing() {
    std::erase_if(edges, [&](const FsaEdge& e) { return is_goal(e.from); });
}

std::size_t fsa_step(const Fsa& fsa, const PropositionPartition& p, std::size_t f, Letter l) {
    if (fsa.is_goal(f)) return f;
    const auto truth = letter_valuation(p, l);
    std::optional<std::size_t> target;
    for (const auto& e : fsa.edges) {
        if (e.from != f || e.to == f) continue;
        if (!ltl::eval_propositional(e.guard, truth)) continue;
        if (target && *target != e.to)
            throw NondeterminismError("state '" + fsa.states[f] + "' has several enabled edges");
        target = e.to;
    }
    return target.value_or(f);
}

std::size_t fsa_step(const Fsa& fsa, std::size_t f, const std::set<std::string>& subgoals_true,
                     const std::map<std::string, bool>& events) {
    if (fsa.is_goal(f)) return f;
    std::optional<std::size_t> target;
    for (const auto& e : fsa.edges) {
        if (e.from != f || e.to == f) continue;
        if (!eval_guard(e.guard, subgoals_true, events)) continue;
        if (target && *target != e.to)
            throw NondeterminismError("state '" + fsa.states[f] + "' has several enabled edges");
        target = e.to;
    }
    return target.value_or(f);
}

std::vector<Violation> validate_fsa(const Fsa& fsa, const PropositionPartition& p) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    const std::size_t n = fsa.size();

    if (n == 0) return {{K::Structure, "automaton has no states"}};
    if (fsa.reward.size() != n) out.push_back({K::Structure, "reward table size does not match state count"});
    for (const auto& e : fsa.edges)
        if (e.from >= n || e.to >= n) out.push_back({K::Structure, "edge references a missing state"});
    for (auto i : fsa.initial_states)
        if (i >= n) out.push_back({K::Structure, "initial state index out of range"});
    for (auto g : fsa.goal_states)
        if (g >= n) out.push_back({K::Structure, "goal state index out of range"});
    if (!out.empty()) return out;

    if (fsa.initial_states.size() != 1)
        out.push_back({K::InitialCount, "expected one initial state, found " + std::to_string(fsa.initial_states.size())});
    if (fsa.goal_states.size() != 1)
        out.push_back({K::GoalCount, "expected one goal state, found " + std::to_string(fsa.goal_states.size())});

    const auto allowed = p.liveness_props();
    bool props_ok = true;
    for (const auto& e : fsa.edges)
        for (const auto& name : ltl::propositions(e.guard))
            if (!allowed.count(name)) {
                props_ok = false;
                out.push_back({K::UnknownProposition, "edge " + fsa.states[e.from] + " -> " + fsa.states[e.to] +
                                                          " uses '" + name + "', not a subgoal or event"});
            }

    for (std::size_t f = 0; f < n; ++f) {
        if (!(std::isfinite(fsa.reward[f]) && fsa.reward[f] > 0.0))
            out.push_back({K::Reward, "state '" + fsa.states[f] + "' has non-positive reward"});
    }
    if (!props_ok) return out;

    for (std::size_t f = 0; f < n; ++f) {
        if (fsa.is_goal(f)) continue;
        for (std::size_t li = 0; li < p.letter_count(); ++li) {
            try {
                (void)fsa_step(fsa, p, f, letter_at(p, li));
            } catch (const NondeterminismError&) {
                out.push_back({K::Nondeterminism, "state '" + fsa.states[f] + "' is nondeterministic"});
                break;
            }
        }
    }

    if (fsa.goal_states.size() == 1 && std::none_of(out.begin(), out.end(), [](const Violation& v) {
            return v.kind == K::Nondeterminism;
        })) {
        // backward closure over subgoal-only letters
        std::vector<std::vector<std::size_t>> preds(n);
        for (std::size_t f = 0; f < n; ++f)
            for (int sg = -1; sg < static_cast<int>(p.subgoals.size()); ++sg)
                preds[fsa_step(fsa, p, f, Letter{sg, 0})].push_back(f);
        std::vector<char> reach(n, 0);
        std::deque<std::size_t> q{fsa.goal()};
        reach[fsa.goal()] = 1;
        while (!q.empty()) {
            const auto f = q.front();
            q.pop_front();
            for (auto pr : preds[f])
                if (!reach[pr]) {
                    reach[pr] = 1;
                    q.push_back(pr);
                }
        }
        for (std::size_t f = 0; f < n; ++f)
            if (!reach[f])
                out.push_back({K::GoalUnreachable, "goal not reachable from '" + fsa.states[f] + "' using subgoals only"});
    }
    return out;
}

TransitionTable::TransitionTable(const Fsa& fsa, const PropositionPartition& p)
    : states_(fsa.size()), letters_(p.letter_count()), n_events_(p.events.size()), table_(states_ * letters_) {
    for (std::size_t f = 0; f < states_; ++f)
        for (std::size_t li = 0; li < letters_; ++li)
            table_[f * letters_ + li] = static_cast<std::uint32_t>(fsa_step(fsa, p, f, letter_at(p, li)));
}

bool fsa_isomorphic(const Fsa& a, const Fsa& b, const PropositionPartition& p, std::string* why) {
    auto fail = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    if (a.size() != b.size())
        return fail("state counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    if (a.initial_states.size() != 1 || b.initial_states.size() != 1) return fail("initial state not unique");

    std::vector<long> fwd(a.size(), -1), bwd(b.size(), -1);
    std::deque<std::pair<std::size_t, std::size_t>> q;
    auto bind = [&](std::size_t x, std::size_t y) {
        if (fwd[x] < 0 && bwd[y] < 0) {
            fwd[x] = static_cast<long>(y);
            bwd[y] = static_cast<long>(x);
            q.emplace_back(x, y);
            return true;
        }
        return fwd[x] == static_cast<long>(y) && bwd[y] == static_cast<long>(x);
    };
    bind(a.initial(), b.initial());
    while (!q.empty()) {
        const auto [x, y] = q.front();
        q.pop_front();
        if (a.is_goal(x) != b.is_goal(y))
            return fail("goal status differs at '" + a.states[x] + "' / '" + b.states[y] + "'");
        for (std::size_t li = 0; li < p.letter_count(); ++li) {
            const Letter l = letter_at(p, li);
            const auto nx = fsa_step(a, p, x, l);
            const auto ny = fsa_step(b, p, y, l);
            if (!bind(nx, ny))
                return fail("successors of '" + a.states[x] + "' / '" + b.states[y] + "' disagree on letter " +
                            std::to_string(li));
        }
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (fwd[i] < 0) return fail("state '" + a.states[i] + "' unreachable");
    return true;
}

nlohmann::json fsa_to_json(const Fsa& fsa) {
    nlohmann::json j;
    j["states"] = fsa.states;
    j["initial"] = fsa.states.at(fsa.initial());
    j["goal"] = fsa.states.at(fsa.goal());
    nlohmann::json reward = nlohmann::json::object();
    for (std::size_t f = 0; f < fsa.size(); ++f) reward[fsa.states[f]] = fsa.reward.at(f);
    j["reward"] = reward;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : fsa.edges)
        edges.push_back({{"from", fsa.states[e.from]}, {"to", fsa.states[e.to]}, {"guard", e.guard.str()}});
    j["edges"] = edges;
    return j;
}

namespace {

std::vector<std::size_t> state_list(const nlohmann::json& v, const std::vector<std::string>& states) {
    std::vector<std::size_t> out;
    auto add = [&](const std::string& name) {
        const int i = find_index(states, name);
        if (i < 0) throw Error("unknown state '" + name + "'");
        out.push_back(static_cast<std::size_t>(i));
    };
    if (v.is_array())
        for (const auto& s : v) add(s.get<std::string>());
    else
        add(v.get<std::string>());
    return out;
}

std::vector<FsaEdge> edge_list(const nlohmann::json& j, const std::vector<std::string>& states,
                               const std::set<std::string>& props) {
    std::vector<FsaEdge> out;
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        const auto from = state_list(e.at("from"), states).front();
        const auto to = state_list(e.at("to"), states).front();
        out.push_back({from, to, ltl::parse_ltl(e.at("guard").get<std::string>(), props)});
    }
    return out;
}

} // namespace

Fsa fsa_from_json(const nlohmann::json& j, const std::set<std::string>& props) {
    Fsa fsa;
    try {
        fsa.states = j.at("states").get<std::vector<std::string>>();
        fsa.initial_states = state_list(j.at("initial"), fsa.states);
        fsa.goal_states = state_list(j.at("goal"), fsa.states);
        fsa.reward.assign(fsa.states.size(), 1.0);
        if (j.contains("reward"))
            for (const auto& [name, value] : j.at("reward").items())
                fsa.reward.at(state_list(name, fsa.states).front()) = value.get<double>();
        fsa.edges = edge_list(j, fsa.states, props);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed automaton JSON: ") + e.what());
    }
    fsa.make_goal_absorbing();
    return fsa;
}

// ---------------------------------------------------------------------------

SafetyAutomaton SafetyAutomaton::trivial(const std::map<std::string, double>& prop_costs) {
    SafetyAutomaton a;
    a.states = {"safe"};
    a.edges.push_back({0, 0, ltl::Formula::top()});
    for (const auto& [name, cost] : prop_costs) a.costs.push_back({0, {name}, cost});
    a.initial_states = {0};
    return a;
}

void SafetyAutomaton::finalize(const PropositionPartition& p) {
    if (states.empty()) throw Error("safety automaton has no states");
    if (initial_states.empty()) throw Error("safety automaton has no initial state");
    if (p.safety.size() + p.events.size() > 16) throw Error("too many safety/event propositions");
    safety_bits_ = p.safety.size();
    event_bits_ = p.events.size();
    const std::size_t base = states.size();
    const std::size_t masks = std::size_t{1} << safety_bits_;
    const std::size_t evs = std::size_t{1} << event_bits_;

    for (const auto& e : edges)
        for (const auto& name : ltl::propositions(e.guard))
            if (p.safety_index(name) < 0 && p.event_index(name) < 0)
                throw Error("safety guard uses '" + name + "', not a safety or event proposition");

    std::vector<std::int64_t> raw(base * masks * evs, -1);
    bool needs_sink = false;
    for (std::size_t fs = 0; fs < base; ++fs)
        for (std::size_t m = 0; m < masks; ++m)
            for (std::size_t ev = 0; ev < evs; ++ev) {
                const auto truth = [&](const std::string& name) {
                    const int si = p.safety_index(name);
                    if (si >= 0) return ((m >> si) & 1u) != 0;
                    const int ei = p.event_index(name);
                    return ei >= 0 && ((ev >> ei) & 1u);
                };
                std::optional<std::size_t> target;
                for (const auto& e : edges) {
                    if (e.from != fs || !ltl::eval_propositional(e.guard, truth)) continue;
                    if (target && *target != e.to)
                        throw NondeterminismError("safety state '" + states[fs] + "' has several enabled edges");
                    target = e.to;
                }
                if (target)
                    raw[(fs * masks + m) * evs + ev] = static_cast<std::int64_t>(*target);
                else
                    needs_sink = true;
            }

    sink_.reset();
    n_states_ = base;
    if (needs_sink) {
        sink_ = base;
        n_states_ = base + 1;
    }
    table_.assign(n_states_ * masks * evs, 0);
    for (std::size_t fs = 0; fs < n_states_; ++fs)
        for (std::size_t m = 0; m < masks; ++m)
            for (std::size_t ev = 0; ev < evs; ++ev) {
                const std::size_t idx = (fs * masks + m) * evs + ev;
                if (fs == base)
                    table_[idx] = static_cast<std::uint32_t>(base);
                else if (raw[idx] >= 0)
                    table_[idx] = static_cast<std::uint32_t>(raw[idx]);
                else
                    table_[idx] = static_cast<std::uint32_t>(base) | 0x80000000u;
            }

    cost_table_.assign(n_states_ * masks, 0.0);
    for (const auto& c : costs) {
        if (c.state >= base) throw Error("safety cost references a missing state");
        std::uint32_t m = 0;
        for (const auto& name : c.props) {
            const int si = p.safety_index(name);
            if (si < 0) throw Error("safety cost uses '" + name + "', not a safety proposition");
            m |= 1u << si;
        }
        if (!(c.cost <= 0.0) || !std::isfinite(c.cost)) throw Error("safety costs must be finite and non-positive");
        cost_table_[(c.state << safety_bits_) | m] = c.cost;
    }
    if (!(violation_cost <= 0.0) || !std::isfinite(violation_cost))
        throw Error("violation cost must be finite and non-positive");
}

nlohmann::json safety_to_json(const SafetyAutomaton& a) {
    nlohmann::json j;
    j["states"] = a.states;
    nlohmann::json init = nlohmann::json::array();
    for (auto i : a.initial_states) init.push_back(a.states.at(i));
    j["initial"] = init;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : a.edges)
        edges.push_back({{"from", a.states[e.from]}, {"to", a.states[e.to]}, {"guard", e.guard.str()}});
    j["edges"] = edges;
    nlohmann::json costs = nlohmann::json::array();
    for (const auto& c : a.costs) costs.push_back({{"state", a.states[c.state]}, {"props", c.props}, {"cost", c.cost}});
    j["costs"] = costs;
    j["violation_cost"] = a.violation_cost;
    return j;
}

SafetyAutomaton safety_from_json(const nlohmann::json& j, const std::set<std::string>& props) {
    SafetyAutomaton a;
    try {
        a.states = j.at("states").get<std::vector<std::string>>();
        a.initial_states = state_list(j.at("initial"), a.states);
        a.edges = edge_list(j, a.states, props);
        for (const auto& c : j.value("costs", nlohmann::json::array()))
            a.costs.push_back({state_list(c.at("state"), a.states).front(),
                               c.at("props").get<std::vector<std::string>>(), c.at("cost").get<double>()});
        a.violation_cost = j.value("violation_cost", -1000.0);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed safety automaton JSON: ") + e.what());
    }
    return a;
}

// ---------------------------------------------------------------------------

PropositionPartition delivery_partition() { return {{"a", "b", "c", "h"}, {"o", "e"}, {"can"}}; }

const std::map<std::string, std::string>& task_formulas() {
    static const std::map<std::string, std::string> tasks{
        {"sequential", "F(a & F(b & F(c & F h))) & G !o"},
        {"if", "((F(c & F a) & G !can) | (F a & F can)) & G !o"},
        {"or", "F((a | b) & F c) & G !o"},
        {"composite", "((F((a | b) & F(c & F h)) & G !can) | (F((a | b) & F h) & F can)) & G !o"},
    };
    return tasks;
}

namespace {

Fsa build(std::vector<std::string> states, const std::vector<std::tuple<std::string, std::string, std::string>>& edges) {
    const auto props = delivery_partition().all();
    Fsa fsa;
    fsa.states = std::move(states);
    fsa.reward.assign(fsa.states.size(), 1.0);
    fsa.initial_states = {fsa.index_of("init")};
    fsa.goal_states = {fsa.index_of("goal")};
    for (const auto& [from, to, guard] : edges)
        fsa.edges.push_back({fsa.index_of(from), fsa.index_of(to), ltl::parse_ltl(guard, props)});
    return fsa;
}

} // namespace

std::map<std::string, Fsa> hand_coded_task_fsas() {
    std::map<std::string, Fsa> out;
    out["sequential"] = build({"init", "s1", "s2", "s3", "goal"},
                              {{"init", "s1", "a"}, {"s1", "s2", "b"}, {"s2", "s3", "c"}, {"s3", "goal", "h"}});
    out["if"] = build({"init", "s1", "s2", "s3", "goal"}, {{"init", "s1", "a & !can"},
                                                          {"init", "s3", "c | (can & !a)"},
                                                          {"init", "goal", "a & can"},
                                                          {"s1", "s2", "c & !can"},
                                                          {"s1", "goal", "can"},
                                                          {"s2", "goal", "a | can"},
                                                          {"s3", "goal", "a"}});
    out["or"] = build({"init", "s1", "goal"}, {{"init", "s1", "a | b"}, {"s1", "goal", "c"}});
    out["composite"] = build({"init", "s1", "s2", "s3", "s4", "s5", "goal"}, {{"init", "s1", "(a | b) & !can"},
                                                                             {"init", "s4", "can & !a & !b"},
                                                                             {"init", "s5", "(a | b) & can"},
                                                                             {"s1", "s2", "h & !can"},
                                                                             {"s1", "s5", "c | (can & !h)"},
                                                                             {"s1", "goal", "h & can"},
                                                                             {"s2", "s3", "c & !can"},
                                                                             {"s2", "goal", "can"},
                                                                             {"s3", "goal", "h | can"},
                                                                             {"s4", "s5", "a | b"},
                                                                             {"s5", "goal", "h"}});
    return out;
}

} // namespace lof
