#pragma once

#include "lof/automata.hpp"
#include "lof/gridworld.hpp"
#include "lof/options.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lof {

enum class EventMode { Fixed, PerDecision };

/// Fixed: one assignment for the whole plan. PerDecision: every option
/// outcome is weighted by the map's event distribution.
struct EventConfig {
    EventMode mode = EventMode::Fixed;
    std::uint32_t fixed = 0;
};

/// "fixed:can=0", "fixed:" (all false) or "dist".
EventConfig parse_event_config(const std::string& text, const PropositionPartition& p);

struct PlannerConfig {
    int max_sweeps = 1000;
    double tolerance = 1e-9;
    EventConfig events;
};

/// Q/V tables over (f, f_s, s); the simple formulation has one safety
/// state. Entries of -inf mark states from which the goal cannot be
/// reached with the available options.
struct MetaPolicy {
    std::size_t fsa_states = 0;
    std::size_t safety_states = 1;
    std::size_t cells = 0;
    std::size_t options = 0;
    std::vector<double> q;
    std::vector<double> v;
    std::vector<int> mu;       ///< -1 where no option is usable
    std::vector<std::string> option_subgoals;
    int sweeps = 0;
    double residual = 0.0;
    bool converged = false;

    std::size_t index(std::size_t f, std::size_t fs, std::size_t s) const {
        return (f * safety_states + fs) * cells + s;
    }
    double V(std::size_t f, int s, std::size_t fs = 0) const { return v[index(f, fs, static_cast<std::size_t>(s))]; }
    double Q(std::size_t f, int s, std::size_t o, std::size_t fs = 0) const {
        return q[index(f, fs, static_cast<std::size_t>(s)) * options + o];
    }
    int option(std::size_t f, int s, std::size_t fs = 0) const {
        return mu[index(f, fs, static_cast<std::size_t>(s))];
    }
    /// Recomputes V and mu from Q (lowest index wins ties; -inf ignored).
    void refresh(const std::vector<char>& goal_rows);
};

nlohmann::json metapolicy_to_json(const MetaPolicy& m);

/// Synchronous Logical Value Iteration. One object covers both the simple
/// formulation and the general one over a safety automaton.
class LviSolver {
public:
    LviSolver(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
              const PlannerConfig& cfg);
    /// General formulation; `safety` must be finalized and options trained
    /// under cfg.events.fixed (only fixed events are supported here).
    LviSolver(const Fsa& fsa, const SafetyAutomaton& safety, const std::vector<GeneralOption>& options,
              const EnvironmentMdp& env, const PlannerConfig& cfg);

    /// One parallel sweep; returns the sup-norm change of V.
    double sweep();
    /// Sweeps until tolerance or the sweep cap.
    const MetaPolicy& solve();
    const MetaPolicy& policy() const { return meta_; }

    /// (f, f_s, s) rows with no path to the goal.
    std::size_t unsatisfiable_count() const;

private:
    struct Outcome {
        double prob;
        std::uint32_t events;
    };
    void setup(const Fsa& fsa, const EnvironmentMdp& env, const PlannerConfig& cfg,
               const std::vector<std::string>& subgoals);
    void reachability();

    PlannerConfig cfg_;
    MetaPolicy meta_;
    std::vector<Outcome> outcomes_;
    std::vector<double> reward_f_;
    std::vector<char> goal_;
    std::vector<char> free_;
    std::vector<char> good_;
    // per (o, fs, s): reward, mass, terminal cell, terminal f_s (-1 if unusable)
    std::vector<double> opt_reward_;
    std::vector<double> opt_mass_;
    std::vector<int> opt_cell_;
    std::vector<int> opt_fs_;
    // per (f, o, outcome): FSA successor after the option's terminal label
    std::vector<std::uint32_t> next_f_;
    std::vector<double> v_old_;
};

MetaPolicy logical_value_iteration(const Fsa& fsa, const std::vector<LogicalOption>& options,
                                   const EnvironmentMdp& env, const PlannerConfig& cfg);
MetaPolicy logical_value_iteration_general(const Fsa& fsa, const SafetyAutomaton& safety,
                                           const std::vector<GeneralOption>& options, const EnvironmentMdp& env,
                                           const PlannerConfig& cfg);

/// Flat value iteration over primitive actions on F x S (or F x F_S x S).
struct HmdpResult {
    std::size_t fsa_states = 0;
    std::size_t safety_states = 1;
    std::size_t cells = 0;
    std::vector<double> v;
    std::vector<int> action;
    int sweeps = 0;
    bool converged = false;

    double V(std::size_t f, int s, std::size_t fs = 0) const {
        return v[(f * safety_states + fs) * cells + static_cast<std::size_t>(s)];
    }
};

HmdpResult hmdp_value_iteration(const Fsa& fsa, const EnvironmentMdp& env, std::uint32_t events,
                                double tolerance = 1e-9, int max_sweeps = 100000);
HmdpResult hmdp_value_iteration_general(const Fsa& fsa, const SafetyAutomaton& safety, const EnvironmentMdp& env,
                                        std::uint32_t events, double tolerance = 1e-9, int max_sweeps = 100000);

struct MetaQLConfig {
    int episodes = 500;
    int max_options = 50; ///< option decisions per episode
    double alpha = 0.5;
    double epsilon = 0.15;
    std::uint64_t seed = 0;
};

/// Option-level epsilon-greedy Q-learning with the FSA sampled step by step.
class LofQLearner {
public:
    LofQLearner(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                const EventConfig& events, const MetaQLConfig& cfg);
    void run_episode();
    int episodes_run() const { return episodes_; }
    const MetaPolicy& policy() const { return meta_; }
    /// Swaps in retrained options (same subgoals, same order); Q entries of
    /// options that became usable start at 0, unusable ones drop to -inf.
    void set_options(const std::vector<LogicalOption>& options);

private:
    const Fsa& fsa_;
    const std::vector<LogicalOption>* options_;
    const EnvironmentMdp& env_;
    EventConfig events_;
    MetaQLConfig cfg_;
    TransitionTable table_;
    MetaPolicy meta_;
    Rng rng_;
    int episodes_ = 0;
};

MetaPolicy lof_q_learning(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                          const EventConfig& events, const MetaQLConfig& cfg);

/// Cheapest usable option whose subgoal moves f forward under `events`;
/// -1 when none exists.
int greedy_metapolicy(const Fsa& fsa, const TransitionTable& table, const std::vector<LogicalOption>& options,
                      std::size_t f, int s, std::uint32_t events);

/// Serial references with the automaton stepped through its guards.
namespace reference {

/// One synchronous LVI sweep; V tables indexed (f * cells + s).
double lvi_sweep_serial(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                        const EventConfig& events, const std::vector<double>& v_old, std::vector<double>& v_new,
                        std::vector<double>* q_out = nullptr);

MetaPolicy lvi_serial(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                      const PlannerConfig& cfg);

HmdpResult hmdp_serial(const Fsa& fsa, const EnvironmentMdp& env, std::uint32_t events, double tolerance = 1e-9,
                       int max_sweeps = 100000);

} // namespace reference

} // namespace lof
