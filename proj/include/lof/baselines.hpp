#pragma once

#include "lof/automata.hpp"
#include "lof/gridworld.hpp"
#include "lof/options.hpp"
#include "lof/planner.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace lof {

struct QrmConfig {
    int max_steps = 100; ///< per training episode
    double alpha = 1.0;
    double epsilon = 0.15;
    double gamma = 1.0;
    std::uint64_t seed = 0;
};

/// One Q table per (event assignment, automaton state); goal tables stay
/// zero. Events are observed, so they index the tables like f does.
struct QrmModel {
    std::vector<QTable> q;
    std::size_t fsa_states = 0;
    std::size_t goal = 0;

    QTable& table(std::size_t f, std::uint32_t events) { return q[events * fsa_states + f]; }
    const QTable& table(std::size_t f, std::uint32_t events) const { return q[events * fsa_states + f]; }
    int act(std::size_t f, int s, std::uint32_t events) const {
        return table(f, events).greedy(static_cast<std::size_t>(s));
    }
};

/// Tabular Q-learning for reward machines with counterfactual updates of
/// every non-goal automaton state on each environment step.
class QrmTrainer {
public:
    QrmTrainer(const EnvironmentMdp& env, const Fsa& fsa, const EventConfig& events, const QrmConfig& cfg);

    /// Runs one episode, stopping early once `budget` steps have been taken
    /// in total (0 = no limit). Returns the steps taken.
    std::size_t run_episode(std::size_t budget = 0);
    std::size_t steps() const { return steps_; }
    std::size_t updates() const { return updates_; }
    const QrmModel& model() const { return model_; }

private:
    const EnvironmentMdp& env_;
    const Fsa& fsa_;
    EventConfig events_;
    QrmConfig cfg_;
    TransitionTable table_;
    QrmModel model_;
    Rng rng_;
    std::size_t steps_ = 0;
    std::size_t updates_ = 0;
};

QrmModel train_qrm(const EnvironmentMdp& env, const Fsa& fsa, const EventConfig& events, const QrmConfig& cfg,
                   int episodes);

struct FlatConfig {
    int max_options = 50; ///< option decisions per training episode
    double alpha = 0.5;
    double epsilon = 0.15;
    double gamma = 0.95;
    std::uint64_t seed = 0;
};

/// Q(s, o) over environment states only.
struct FlatOptionsPolicy {
    QTable q;

    int select(int s) const;
};

class FlatTrainer {
public:
    FlatTrainer(const EnvironmentMdp& env, const std::vector<LogicalOption>& options, const FlatConfig& cfg);
    /// Returns the environment steps consumed by the episode's options.
    std::size_t run_episode();
    const FlatOptionsPolicy& policy() const { return policy_; }
    std::size_t steps() const { return steps_; }
    /// Swaps in retrained options (same subgoals, same order).
    void set_options(const std::vector<LogicalOption>& options);

private:
    const EnvironmentMdp& env_;
    const std::vector<LogicalOption>* options_;
    FlatConfig cfg_;
    FlatOptionsPolicy policy_;
    Rng rng_;
    std::size_t steps_ = 0;
};

FlatOptionsPolicy train_flat_options(const EnvironmentMdp& env, const std::vector<LogicalOption>& options,
                                     const FlatConfig& cfg, int episodes);

nlohmann::json qrm_to_json(const QrmModel& m);
nlohmann::json flat_to_json(const FlatOptionsPolicy& p);

} // namespace lof
