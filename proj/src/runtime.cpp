#include "lof/runtime.hpp"

#include <algorithm>
#include <cmath>

namespace lof {

std::string to_string(Terminal t) {
    switch (t) {
    case Terminal::GoalReached: return "goal-reached";
    case Terminal::StepCap: return "step-cap";
    case Terminal::Stuck: return "stuck";
    }
    return "?";
}

Controller metapolicy_controller(const MetaPolicy& mu, const std::vector<LogicalOption>& options) {
    Controller c;
    c.options = &options;
    c.select = [&mu](std::size_t f, std::size_t, int s, std::uint32_t) { return mu.option(f, s); };
    return c;
}

Controller general_controller(const MetaPolicy& mu, const std::vector<GeneralOption>& options) {
    Controller c;
    c.general = &options;
    c.select = [&mu](std::size_t f, std::size_t fs, int s, std::uint32_t) { return mu.option(f, s, fs); };
    return c;
}

Controller greedy_controller(const Fsa& fsa, const TransitionTable& table, const std::vector<LogicalOption>& options) {
    Controller c;
    c.options = &options;
    c.select = [&fsa, &table, &options](std::size_t f, std::size_t, int s, std::uint32_t events) {
        return greedy_metapolicy(fsa, table, options, f, s, events);
    };
    return c;
}

Controller flat_controller(const FlatOptionsPolicy& policy, const std::vector<LogicalOption>& options) {
    Controller c;
    c.options = &options;
    c.select = [&policy](std::size_t, std::size_t, int s, std::uint32_t) { return policy.select(s); };
    return c;
}

Controller qrm_controller(const QrmModel& model) {
    Controller c;
    c.act = [&model](std::size_t f, int s, std::uint32_t events) { return model.act(f, s, events); };
    return c;
}

Trace rollout(const RolloutSpec& spec, const Controller& c, std::uint32_t events, int start, std::uint64_t seed) {
    const EnvironmentMdp& env = *spec.env;
    const Fsa& fsa = *spec.fsa;
    const SafetyAutomaton* safety = spec.safety;
    if (safety && !safety->finalized()) throw Error("safety automaton must be finalized");
    if (c.general && !safety) throw Error("general options need a safety automaton");
    if (!env.map().free(start)) throw Error("rollout start is a wall");

    const TransitionTable table(fsa, env.partition());
    Rng rng(seed);
    Trace tr;
    tr.events = events;
    tr.start = start;
    int s = start;
    std::size_t fs = safety ? safety->initial_states.front() : 0;
    std::size_t f = table.next(fsa.initial(), Letter{env.subgoal_at(s), events});
    tr.f_start = f;
    tr.fs_start = fs;

    auto take = [&](int a, int option) {
        const int s2 = env.step(s, a, rng);
        const auto mask = env.safety_mask(s2);
        double r = 0.0;
        std::size_t fs2 = fs;
        if (safety) {
            const auto st = safety->step(fs, mask, events);
            r = env.step_reward() + safety->cost(fs, mask);
            if (st.violated) r += safety->violation_cost;
            fs2 = st.next;
        } else {
            r = env.step_reward() + env.cell_cost(s2);
        }
        const std::size_t f2 = table.next(f, Letter{env.subgoal_at(s2), events});
        tr.records.push_back({static_cast<int>(tr.records.size()), f, fs, s, a, s2, f2, fs2, r, option,
                              env.subgoal_at(s2), mask});
        tr.raw_return += r;
        s = s2;
        f = f2;
        fs = fs2;
    };
    auto at_cap = [&] { return static_cast<int>(tr.records.size()) >= spec.cap; };

    for (;;) {
        if (fsa.is_goal(f)) {
            tr.status = Terminal::GoalReached;
            break;
        }
        if (at_cap()) {
            tr.status = Terminal::StepCap;
            break;
        }
        if (c.act) {
            take(c.act(f, s, events), -1);
            continue;
        }
        const int o = c.select(f, fs, s, events);
        ++tr.decisions;
        int goal_cell = -1;
        if (o >= 0) goal_cell = c.general ? (*c.general)[static_cast<std::size_t>(o)].goal_cell
                                          : (*c.options)[static_cast<std::size_t>(o)].goal_cell;
        if (o < 0 || s == goal_cell) {
            // no usable option: idle in place until the cap
            while (!fsa.is_goal(f) && !at_cap()) take(static_cast<int>(Action::Stay), -1);
            tr.status = fsa.is_goal(f) ? Terminal::GoalReached : Terminal::Stuck;
            break;
        }
        // run the option to its subgoal
        while (s != goal_cell && !fsa.is_goal(f) && !at_cap()) {
            int a;
            if (c.general) {
                const auto& g = (*c.general)[static_cast<std::size_t>(o)];
                a = g.policy[fs * g.cells + static_cast<std::size_t>(s)];
            } else {
                a = (*c.options)[static_cast<std::size_t>(o)].policy[static_cast<std::size_t>(s)];
            }
            take(a, o);
        }
    }
    tr.f_final = f;
    return tr;
}

bool check_satisfaction(const Trace& trace, const Fsa& fsa, const EnvironmentMdp& env) {
    const auto& p = env.partition();
    std::size_t f = fsa_step(fsa, p, fsa.initial(), Letter{env.subgoal_at(trace.start), trace.events});
    if (f != trace.f_start) throw Error("replay mismatch at reset");
    int s = trace.start;
    for (const auto& r : trace.records) {
        if (r.f != f || r.s != s) throw Error("replay mismatch at step " + std::to_string(r.t));
        f = fsa_step(fsa, p, f, Letter{env.subgoal_at(r.s_next), trace.events});
        if (f != r.f_next) throw Error("replay mismatch after step " + std::to_string(r.t));
        s = r.s_next;
    }
    if (f != trace.f_final) throw Error("replay mismatch at the final state");
    const bool reached = fsa.is_goal(f);
    if (reached != (trace.status == Terminal::GoalReached)) throw Error("terminal status disagrees with replay");
    return reached;
}

std::vector<std::set<std::string>> label_word(const Trace& trace, const EnvironmentMdp& env) {
    const auto& p = env.partition();
    auto letter = [&](int cell) {
        std::set<std::string> out;
        if (env.subgoal_at(cell) >= 0) out.insert(p.subgoals[static_cast<std::size_t>(env.subgoal_at(cell))]);
        for (std::size_t k = 0; k < p.safety.size(); ++k)
            if ((env.safety_mask(cell) >> k) & 1u) out.insert(p.safety[k]);
        for (std::size_t k = 0; k < p.events.size(); ++k)
            if ((trace.events >> k) & 1u) out.insert(p.events[k]);
        return out;
    };
    std::vector<std::set<std::string>> word{letter(trace.start)};
    for (const auto& r : trace.records) word.push_back(letter(r.s_next));
    return word;
}

ReturnBounds task_bounds(const EnvironmentMdp& env, const Fsa& fsa, std::uint32_t events, int start, int cap) {
    const auto h = hmdp_value_iteration(fsa, env, events);
    const TransitionTable table(fsa, env.partition());
    const std::size_t f = table.next(fsa.initial(), Letter{env.subgoal_at(start), events});
    ReturnBounds b;
    b.max = h.V(f, start);
    b.min = cap * env.min_reward();
    if (!std::isfinite(b.max)) throw Error("task cannot be satisfied from the start cell");
    return b;
}

EpisodeReturn normalize_return(double raw, const ReturnBounds& b) {
    if (b.max == b.min) throw Error("degenerate return bounds");
    const double n = (raw - b.min) / (b.max - b.min);
    return {raw, std::clamp(n, 0.0, 1.0)};
}

namespace {

Trace one(const RolloutSpec& spec, const Controller& c, const BatchEvents& events, int start, std::uint64_t seed) {
    Rng rng(seed);
    const std::uint32_t e = events.sample ? spec.env->sample_events(rng) : events.fixed;
    return rollout(spec, c, e, start, rng());
}

} // namespace

std::vector<Trace> rollout_batch(const RolloutSpec& spec, const Controller& c, const BatchEvents& events, int start,
                                 std::uint64_t master, std::size_t count) {
    std::vector<Trace> out(count);
    const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = one(spec, c, events, start, derive_seed(master, static_cast<std::uint64_t>(i)));
    return out;
}

std::vector<Trace> rollout_batch_serial(const RolloutSpec& spec, const Controller& c, const BatchEvents& events,
                                        int start, std::uint64_t master, std::size_t count) {
    std::vector<Trace> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(one(spec, c, events, start, derive_seed(master, i)));
    return out;
}

void write_trace_jsonl(std::ostream& out, const Trace& trace, const EnvironmentMdp& env, const Fsa& fsa,
                       const std::string& tag) {
    const auto& p = env.partition();
    for (const auto& r : trace.records) {
        nlohmann::json j{{"t", r.t},
                         {"f", fsa.states[r.f]},
                         {"fs", r.fs},
                         {"x", env.map().x_of(r.s)},
                         {"y", env.map().y_of(r.s)},
                         {"a", r.a},
                         {"x_next", env.map().x_of(r.s_next)},
                         {"y_next", env.map().y_of(r.s_next)},
                         {"f_next", fsa.states[r.f_next]},
                         {"fs_next", r.fs_next},
                         {"reward", r.reward},
                         {"option", r.option},
                         {"subgoal", r.subgoal >= 0 ? p.subgoals[static_cast<std::size_t>(r.subgoal)] : ""},
                         {"events", format_event_mask(trace.events, p)}};
        if (!tag.empty()) j["episode"] = tag;
        out << j.dump() << '\n';
    }
}

} // namespace lof
