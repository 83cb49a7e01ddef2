#pragma once

#include "lof/automata.hpp"
#include "lof/gridworld.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lof {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct OptionTrainConfig {
    int episodes = 1600;
    int max_steps = 100;
    double alpha = 1.0;
    double epsilon = 0.15;
    bool decay = false;          ///< linear decay of epsilon to epsilon_final
    double epsilon_final = 0.01;
    double gamma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

nlohmann::json to_json(const OptionTrainConfig& c);
OptionTrainConfig option_config_from_json(const nlohmann::json& j);

struct QTable {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::vector<double> q;
    std::vector<std::uint32_t> visits;

    QTable() = default;
    QTable(std::size_t n_states, std::size_t n_actions)
        : states(n_states), actions(n_actions), q(n_states * n_actions, 0.0), visits(n_states * n_actions, 0) {}
    double& at(std::size_t s, std::size_t a) { return q[s * actions + a]; }
    double at(std::size_t s, std::size_t a) const { return q[s * actions + a]; }
    /// Greedy action, ties to the lowest index.
    int greedy(std::size_t s) const;
    double max(std::size_t s) const;
};

/// Exact models of a deterministic option on every (product) state:
/// cumulative discounted reward to termination, terminal state, gamma^k and
/// k. Non-terminating states carry reward -inf and terminal -1.
struct OptionModel {
    std::vector<double> reward;
    std::vector<int> terminal;
    std::vector<double> discount;
    std::vector<int> duration;

    bool usable(std::size_t x) const { return terminal[x] >= 0 && duration[x] > 0; }
};

struct LogicalOption {
    std::string subgoal;
    int subgoal_index = -1;  ///< into the partition's subgoal list
    int goal_cell = -1;
    std::vector<int> policy; ///< action per cell
    OptionModel model;       ///< terminal is always goal_cell when reachable
    OptionTrainConfig config;
    std::size_t training_steps = 0;

    bool terminates(int s) const { return s == goal_cell; }
};

/// Option over (f_s, s), trained under a safety automaton and a fixed event
/// assignment. Product index x = f_s * cells + s; the model terminal holds
/// the terminal f_s (the terminal cell is always goal_cell).
struct GeneralOption {
    std::string subgoal;
    int subgoal_index = -1;
    int goal_cell = -1;
    std::size_t safety_states = 1;
    std::size_t cells = 0;
    std::uint32_t events = 0;
    std::vector<int> policy;
    OptionModel model;
    OptionTrainConfig config;
    std::size_t training_steps = 0;
};

/// Incremental epsilon-greedy Q-learning of one option, one episode at a
/// time. Without a safety automaton this is the simple formulation.
class OptionTrainer {
public:
    OptionTrainer(const EnvironmentMdp& env, const std::string& subgoal, const OptionTrainConfig& cfg,
                  const SafetyAutomaton* safety = nullptr, std::uint32_t events = 0);

    /// Runs one episode; returns the number of environment steps taken.
    std::size_t run_episode();
    bool done() const { return episode_ >= cfg_.episodes; }
    int episodes_run() const { return episode_; }
    std::size_t steps() const { return steps_; }
    const QTable& q() const { return q_; }

    LogicalOption option() const;
    GeneralOption general_option() const;

private:
    const EnvironmentMdp& env_;
    const SafetyAutomaton* safety_;
    OptionTrainConfig cfg_;
    std::string subgoal_;
    int subgoal_index_;
    int goal_;
    std::uint32_t events_;
    std::size_t n_fs_;
    QTable q_;
    std::vector<int> starts_; ///< every free cell except the subgoal's
    Rng rng_;
    int episode_ = 0;
    std::size_t steps_ = 0;
};

struct TrainResult {
    QTable q;
    LogicalOption option;
};

TrainResult train_option(const EnvironmentMdp& env, const std::string& subgoal, const OptionTrainConfig& cfg);

struct GeneralTrainResult {
    QTable q;
    GeneralOption option;
};

/// `safety` must be finalized.
GeneralTrainResult train_option_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                        const std::string& subgoal, std::uint32_t events,
                                        const OptionTrainConfig& cfg);

OptionModel evaluate_option_models(const EnvironmentMdp& env, const std::vector<int>& policy, int goal_cell,
                                   double gamma);
OptionModel evaluate_option_models_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                           std::uint32_t events, const std::vector<int>& policy, int goal_cell,
                                           double gamma);

/// Free cells from which the option's policy never reaches its subgoal.
std::vector<int> verify_option(const EnvironmentMdp& env, const LogicalOption& option);

/// Trains one option per subgoal present on the map. Options for distinct
/// subgoals train in parallel with seeds derived from cfg.seed.
std::vector<LogicalOption> train_all_options(const EnvironmentMdp& env, const OptionTrainConfig& cfg);
std::vector<GeneralOption> train_all_options_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                                     std::uint32_t events, const OptionTrainConfig& cfg);

/// Option for the simple formulation built from a policy table.
LogicalOption make_option(const EnvironmentMdp& env, const std::string& subgoal, std::vector<int> policy);

nlohmann::json options_to_json(const std::vector<LogicalOption>& options);
std::vector<LogicalOption> options_from_json(const nlohmann::json& j);
nlohmann::json general_options_to_json(const std::vector<GeneralOption>& options);
std::vector<GeneralOption> general_options_from_json(const nlohmann::json& j);

} // namespace lof
