#pragma once

#include "lof/automata.hpp"
#include "lof/baselines.hpp"
#include "lof/gridworld.hpp"
#include "lof/options.hpp"
#include "lof/planner.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace lof {

enum class Terminal { GoalReached, StepCap, Stuck };
std::string to_string(Terminal t);

struct TraceRecord {
    int t = 0;
    std::size_t f = 0;
    std::size_t fs = 0;
    int s = 0;
    int a = 0;
    int s_next = 0;
    std::size_t f_next = 0;
    std::size_t fs_next = 0;
    double reward = 0.0;
    int option = -1;           ///< -1 for primitive controllers
    int subgoal = -1;          ///< subgoal label of s_next
    std::uint32_t safety = 0;  ///< safety mask of s_next
};

struct Trace {
    std::vector<TraceRecord> records;
    Terminal status = Terminal::StepCap;
    double raw_return = 0.0;
    std::uint32_t events = 0;
    int start = 0;
    std::size_t f_start = 0;  ///< automaton state after reading the start cell
    std::size_t fs_start = 0;
    std::size_t f_final = 0;
    int decisions = 0;
};

/// How a policy acts. Option controllers return an option index (or -1 when
/// stuck) and run that option to termination; primitive controllers return
/// an action every step.
struct Controller {
    std::function<int(std::size_t f, std::size_t fs, int s, std::uint32_t events)> select;
    std::function<int(std::size_t f, int s, std::uint32_t events)> act;
    const std::vector<LogicalOption>* options = nullptr;
    const std::vector<GeneralOption>* general = nullptr;
};

Controller metapolicy_controller(const MetaPolicy& mu, const std::vector<LogicalOption>& options);
Controller general_controller(const MetaPolicy& mu, const std::vector<GeneralOption>& options);
Controller greedy_controller(const Fsa& fsa, const TransitionTable& table, const std::vector<LogicalOption>& options);
Controller flat_controller(const FlatOptionsPolicy& policy, const std::vector<LogicalOption>& options);
Controller qrm_controller(const QrmModel& model);

struct RolloutSpec {
    const EnvironmentMdp* env = nullptr;
    const Fsa* fsa = nullptr;
    const SafetyAutomaton* safety = nullptr; ///< optional; finalized
    int cap = 400;
};

/// Runs one episode from `start` with frozen events. The automaton reads the
/// start cell's label at reset and then every entered cell's label. A stuck
/// option controller idles in place until the cap.
Trace rollout(const RolloutSpec& spec, const Controller& c, std::uint32_t events, int start, std::uint64_t seed);

/// Replays the trace's labels through the automaton; throws Error on any
/// mismatch with the recorded states.
bool check_satisfaction(const Trace& trace, const Fsa& fsa, const EnvironmentMdp& env);

/// True propositions per step: the start cell, then each entered cell,
/// plus the episode events.
std::vector<std::set<std::string>> label_word(const Trace& trace, const EnvironmentMdp& env);

struct ReturnBounds {
    double min = 0.0;
    double max = 0.0;
};

struct EpisodeReturn {
    double raw = 0.0;
    double normalized = 0.0;
};

/// max: optimal flat value from the reset state; min: cap times the worst
/// one-step reward.
ReturnBounds task_bounds(const EnvironmentMdp& env, const Fsa& fsa, std::uint32_t events, int start, int cap);
EpisodeReturn normalize_return(double raw, const ReturnBounds& b);

/// Event source for a batch: fixed, or drawn per rollout from its seed.
struct BatchEvents {
    bool sample = true;
    std::uint32_t fixed = 0;
};

/// Independent rollouts in parallel; rollout i uses derive_seed(master, i).
std::vector<Trace> rollout_batch(const RolloutSpec& spec, const Controller& c, const BatchEvents& events, int start,
                                 std::uint64_t master, std::size_t count);
std::vector<Trace> rollout_batch_serial(const RolloutSpec& spec, const Controller& c, const BatchEvents& events,
                                        int start, std::uint64_t master, std::size_t count);

void write_trace_jsonl(std::ostream& out, const Trace& trace, const EnvironmentMdp& env, const Fsa& fsa,
                       const std::string& tag = {});

} // namespace lof
