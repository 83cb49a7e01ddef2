#pragma once

#include "lof/automata.hpp"
#include "lof/baselines.hpp"
#include "lof/gridworld.hpp"
#include "lof/options.hpp"
#include "lof/planner.hpp"
#include "lof/runtime.hpp"

#include <json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace lof {

struct TaskSpec {
    std::string name;
    std::string formula;
};

struct ExperimentConfig {
    std::string map;
    std::vector<TaskSpec> tasks;
    std::vector<std::string> methods;
    int seeds = 10;
    std::uint64_t master_seed = 1;
    OptionTrainConfig option_training;
    MetaQLConfig meta_training;       ///< LOF-QL; `episodes` is per evaluation point
    FlatConfig flat;
    int flat_episodes_per_eval = 50;
    QrmConfig qrm;
    std::size_t qrm_budget = 1000000; ///< environment steps
    std::size_t eval_every = 2000;
    int rollouts_per_eval = 10;
    int episode_cap = 400;
    int lvi_sweeps = 50;              ///< composability: retraining steps for LOF-VI
    int ql_episodes = 300;            ///< composability: retraining steps for LOF-QL
    bool write_traces = true;

    void validate() const;
};

/// Reads a config; relative paths resolve against the working directory,
/// then the source tree. Task entries are names of shipped tasks or
/// {"name", "formula"} objects.
ExperimentConfig load_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
std::string resolve_path(const std::string& path);

inline constexpr const char* kMethods[] = {"LOF-VI", "LOF-QL", "Greedy", "Flat", "QRM"};

struct MetricsRow {
    std::string experiment;
    std::string method;
    std::string task;
    int seed = 0;
    std::size_t training_steps = 0;
    double mean_return = 0.0; ///< normalized
    double std_return = 0.0;
    double mean_raw_return = 0.0;
    double satisfaction_rate = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "experiment,method,task,seed,training_steps,mean_return,std_return,mean_raw_return,satisfaction_rate";
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

struct EpisodeRow {
    std::string experiment;
    std::string method;
    std::string task;
    int seed = 0;
    std::size_t training_steps = 0;
    int rollout = 0;
    std::string events;
    std::size_t steps = 0;
    double raw_return = 0.0;
    double normalized_return = 0.0;
    bool satisfied = false;
    std::string status;
};

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);

/// Everything a protocol produces, also written to the output directory
/// when one is given.
struct ExperimentResult {
    std::vector<MetricsRow> metrics;
    std::vector<EpisodeRow> episodes;
    /// method/task/seed -> steps of environment interaction spent training
    /// options (LOF methods and Flat).
    std::map<std::string, std::size_t> option_steps;
};

/// Loaded map, partition and per-task automata shared by the protocols.
struct Workspace {
    GridMap map;
    EnvironmentMdp env;
    std::vector<std::string> task_names;
    std::vector<Fsa> fsas;
    std::vector<std::vector<ReturnBounds>> bounds; ///< [task][event mask]
    int start = 0;

    explicit Workspace(const ExperimentConfig& cfg);
};

ExperimentResult run_satisfaction(const ExperimentConfig& cfg, const std::string& out_dir = {});
ExperimentResult run_composability(const ExperimentConfig& cfg, const std::string& out_dir = {},
                                   const std::vector<LogicalOption>* bundle = nullptr);

struct OracleCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// LVI-vs-oracle value equality, option reachability and translation isomorphism
/// over the configured map and tasks.
std::vector<OracleCheck> run_oracle_suite(const ExperimentConfig& cfg);

/// Evaluation of one controller: rollouts_per_eval episodes with events
/// drawn from derived seeds.
struct EvalSummary {
    double mean_return = 0.0;
    double std_return = 0.0;
    double mean_raw = 0.0;
    double satisfaction = 0.0;
    std::vector<Trace> traces;
};

EvalSummary evaluate(const Workspace& ws, std::size_t task, const Controller& c, std::uint64_t seed, int rollouts,
                     int cap);

/// One LVI meta-policy per event assignment; the controller picks the one
/// matching the episode's events.
struct LviPolicies {
    std::vector<MetaPolicy> by_events;
    int sweeps = 0;
};
LviPolicies plan_per_event(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                           int max_sweeps = 1000);
Controller lvi_controller(const LviPolicies& p, const std::vector<LogicalOption>& options);

} // namespace lof
