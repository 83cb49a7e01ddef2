#include "lof/harness.hpp"

#include "lof/ltl_translate.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace lof {

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    throw Error("empty task file");
}

} // namespace

std::string resolve_path(const std::string& path) {
    if (fs::path(path).is_absolute() || fs::exists(path)) return path;
    const std::string shipped = data_path(path);
    if (fs::exists(shipped)) return shipped;
    return path;
}

void ExperimentConfig::validate() const {
    if (map.empty()) throw Error("config: map is required");
    if (!fs::exists(resolve_path(map))) throw Error("config: map file not found: " + map);
    if (tasks.empty()) throw Error("config: task list is empty");
    if (methods.empty()) throw Error("config: method list is empty");
    for (const auto& m : methods)
        if (std::find(std::begin(kMethods), std::end(kMethods), m) == std::end(kMethods))
            throw Error("config: unknown method '" + m + "'");
    if (seeds < 1) throw Error("config: seeds must be at least 1");
    if (eval_every < 1) throw Error("config: eval_every must be at least 1");
    if (rollouts_per_eval < 1) throw Error("config: rollouts_per_eval must be at least 1");
    if (episode_cap < 0) throw Error("config: episode_cap must be non-negative");
    option_training.validate();
}

ExperimentConfig load_config(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.map = j.at("map").get<std::string>();
        const auto& shipped = task_formulas();
        for (const auto& t : j.at("tasks")) {
            if (t.is_string()) {
                const auto name = t.get<std::string>();
                const auto file = resolve_path("data/tasks/" + name + ".ltl");
                if (fs::exists(file)) {
                    c.tasks.push_back({name, first_line(read_text(file))});
                } else if (shipped.count(name)) {
                    c.tasks.push_back({name, shipped.at(name)});
                } else {
                    throw Error("config: unknown task '" + name + "'");
                }
            } else {
                c.tasks.push_back({t.at("name").get<std::string>(), t.at("formula").get<std::string>()});
            }
        }
        if (j.contains("methods"))
            c.methods = j.at("methods").get<std::vector<std::string>>();
        else
            c.methods.assign(std::begin(kMethods), std::end(kMethods));
        c.seeds = j.value("seeds", c.seeds);
        c.master_seed = j.value("master_seed", c.master_seed);
        if (j.contains("option_training")) c.option_training = option_config_from_json(j.at("option_training"));
        if (j.contains("meta_training")) {
            const auto& m = j.at("meta_training");
            c.meta_training.episodes = m.value("episodes_per_eval", 50);
            c.meta_training.max_options = m.value("max_options", c.meta_training.max_options);
            c.meta_training.alpha = m.value("alpha", c.meta_training.alpha);
            c.meta_training.epsilon = m.value("epsilon", c.meta_training.epsilon);
        } else {
            c.meta_training.episodes = 50;
        }
        if (j.contains("flat")) {
            const auto& m = j.at("flat");
            c.flat_episodes_per_eval = m.value("episodes_per_eval", c.flat_episodes_per_eval);
            c.flat.max_options = m.value("max_options", c.flat.max_options);
            c.flat.alpha = m.value("alpha", c.flat.alpha);
            c.flat.epsilon = m.value("epsilon", c.flat.epsilon);
            c.flat.gamma = m.value("gamma", c.flat.gamma);
        }
        if (j.contains("qrm")) {
            const auto& m = j.at("qrm");
            c.qrm.max_steps = m.value("max_steps", c.qrm.max_steps);
            c.qrm.alpha = m.value("alpha", c.qrm.alpha);
            c.qrm.epsilon = m.value("epsilon", c.qrm.epsilon);
            c.qrm.gamma = m.value("gamma", c.qrm.gamma);
            c.qrm_budget = m.value("budget", c.qrm_budget);
        }
        c.eval_every = j.value("eval_every", c.eval_every);
        c.rollouts_per_eval = j.value("rollouts_per_eval", c.rollouts_per_eval);
        c.episode_cap = j.value("episode_cap", c.episode_cap);
        if (j.contains("composability")) {
            c.lvi_sweeps = j.at("composability").value("lvi_sweeps", c.lvi_sweeps);
            c.ql_episodes = j.at("composability").value("ql_episodes", c.ql_episodes);
        }
        c.write_traces = j.value("write_traces", c.write_traces);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    try {
        return load_config(nlohmann::json::parse(read_text(resolve_path(path))));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("config " + path + " is not valid JSON: " + e.what());
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kMetricsHeader << '\n' << std::setprecision(12);
    for (const auto& r : rows)
        out << r.experiment << ',' << r.method << ',' << r.task << ',' << r.seed << ',' << r.training_steps << ','
            << r.mean_return << ',' << r.std_return << ',' << r.mean_raw_return << ',' << r.satisfaction_rate << '\n';
}

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeRow>& rows) {
    out << "experiment,method,task,seed,training_steps,rollout,events,steps,raw_return,normalized_return,satisfied,"
           "status\n"
        << std::setprecision(12);
    for (const auto& r : rows)
        out << r.experiment << ',' << r.method << ',' << r.task << ',' << r.seed << ',' << r.training_steps << ','
            << r.rollout << ",\"" << r.events << "\"," << r.steps << ',' << r.raw_return << ','
            << r.normalized_return << ',' << (r.satisfied ? 1 : 0) << ',' << r.status << '\n';
}

// ---------------------------------------------------------------------------

Workspace::Workspace(const ExperimentConfig& cfg)
    : map(load_map_file(resolve_path(cfg.map))), env(map, partition_for(map)), start(env.default_start()) {
    for (const auto& t : cfg.tasks) {
        task_names.push_back(t.name);
        try {
            fsas.push_back(compile_task(t.formula, env.partition()));
        } catch (const Error& e) {
            throw Error("task '" + t.name + "': " + e.what());
        }
        std::vector<ReturnBounds> b;
        for (std::uint32_t m = 0; m < (1u << env.event_count()); ++m) {
            try {
                b.push_back(task_bounds(env, fsas.back(), m, start, cfg.episode_cap));
            } catch (const Error&) {
                b.push_back({std::nan(""), std::nan("")});
            }
        }
        bounds.push_back(std::move(b));
    }
}

EvalSummary evaluate(const Workspace& ws, std::size_t task, const Controller& c, std::uint64_t seed, int rollouts,
                     int cap) {
    RolloutSpec spec{&ws.env, &ws.fsas[task], nullptr, cap};
    EvalSummary out;
    out.traces = rollout_batch(spec, c, BatchEvents{}, ws.start, seed, static_cast<std::size_t>(rollouts));
    std::vector<double> norm;
    double sat = 0.0, raw = 0.0;
    for (const auto& t : out.traces) {
        const auto& b = ws.bounds[task][t.events];
        if (std::isnan(b.max)) throw Error("task '" + ws.task_names[task] + "' is unsatisfiable under drawn events");
        norm.push_back(normalize_return(t.raw_return, b).normalized);
        raw += t.raw_return;
        if (check_satisfaction(t, ws.fsas[task], ws.env)) sat += 1.0;
    }
    const double n = static_cast<double>(out.traces.size());
    double mean = 0.0;
    for (double x : norm) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : norm) var += (x - mean) * (x - mean);
    out.mean_return = mean;
    out.std_return = std::sqrt(var / n);
    out.mean_raw = raw / n;
    out.satisfaction = sat / n;
    return out;
}

LviPolicies plan_per_event(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                           int max_sweeps) {
    LviPolicies p;
    for (std::uint32_t m = 0; m < (1u << env.event_count()); ++m) {
        PlannerConfig cfg;
        cfg.max_sweeps = max_sweeps;
        cfg.events = {EventMode::Fixed, m};
        p.by_events.push_back(logical_value_iteration(fsa, options, env, cfg));
        p.sweeps = std::max(p.sweeps, p.by_events.back().sweeps);
    }
    return p;
}

Controller lvi_controller(const LviPolicies& p, const std::vector<LogicalOption>& options) {
    Controller c;
    c.options = &options;
    c.select = [&p](std::size_t f, std::size_t, int s, std::uint32_t events) {
        return p.by_events.at(events).option(f, s);
    };
    return c;
}

namespace {

struct RunCell {
    std::string method;
    std::size_t task;
    int seed;
};

struct CellOutput {
    std::vector<MetricsRow> metrics;
    std::vector<EpisodeRow> episodes;
    std::vector<Trace> last_traces;
    std::vector<LogicalOption> options;
    std::size_t option_steps = 0;
};

void record(CellOutput& out, const std::string& experiment, const RunCell& cell, const Workspace& ws,
            std::size_t steps, const EvalSummary& ev) {
    const std::string& task = ws.task_names[cell.task];
    out.metrics.push_back({experiment, cell.method, task, cell.seed, steps, ev.mean_return, ev.std_return, ev.mean_raw,
                           ev.satisfaction});
    for (std::size_t i = 0; i < ev.traces.size(); ++i) {
        const auto& t = ev.traces[i];
        out.episodes.push_back({experiment, cell.method, task, cell.seed, steps, static_cast<int>(i),
                                format_event_mask(t.events, ws.env.partition()), t.records.size(), t.raw_return,
                                normalize_return(t.raw_return, ws.bounds[cell.task][t.events]).normalized,
                                t.status == Terminal::GoalReached, to_string(t.status)});
    }
    out.last_traces = ev.traces;
}

std::uint64_t seed_value(const ExperimentConfig& cfg, int k) {
    return derive_seed(cfg.master_seed, static_cast<std::uint64_t>(k));
}

// Options for every subgoal on the map, trained round-robin one episode at a
// time; `on_eval` runs whenever the shared step count crosses the cadence.
template <class OnEval>
std::size_t train_options_round_robin(const ExperimentConfig& cfg, const Workspace& ws, std::uint64_t seed,
                                      OnEval on_eval) {
    std::vector<OptionTrainer> trainers;
    std::size_t i = 0;
    for (const auto& sg : ws.env.partition().subgoals) {
        if (!ws.map.subgoal_cells.count(sg)) continue;
        OptionTrainConfig c = cfg.option_training;
        c.seed = derive_seed(seed, i++);
        trainers.emplace_back(ws.env, sg, c);
    }
    auto snapshot = [&] {
        std::vector<LogicalOption> out;
        for (const auto& t : trainers) out.push_back(t.option());
        return out;
    };
    std::size_t steps = 0, next_eval = cfg.eval_every, last_eval = 0;
    bool any = true;
    while (any) {
        any = false;
        for (auto& t : trainers) {
            if (t.done()) continue;
            any = true;
            steps += t.run_episode();
            if (steps >= next_eval) {
                on_eval(steps, snapshot());
                last_eval = steps;
                while (next_eval <= steps) next_eval += cfg.eval_every;
            }
        }
    }
    if (last_eval != steps) on_eval(steps, snapshot());
    return steps;
}

CellOutput run_satisfaction_cell(const ExperimentConfig& cfg, const Workspace& ws, const RunCell& cell) {
    CellOutput out;
    const std::uint64_t seed = seed_value(cfg, cell.seed);
    const std::uint64_t eval_seed = derive_seed(seed, 7777);
    const Fsa& fsa = ws.fsas[cell.task];
    const TransitionTable table(fsa, ws.env.partition());
    const std::string& m = cell.method;

    if (m == "QRM") {
        QrmConfig qc = cfg.qrm;
        qc.seed = derive_seed(seed, 99);
        QrmTrainer trainer(ws.env, fsa, EventConfig{EventMode::PerDecision, 0}, qc);
        std::size_t next_eval = cfg.eval_every;
        while (trainer.steps() < cfg.qrm_budget) {
            trainer.run_episode();
            if (trainer.steps() >= next_eval) {
                const auto ev = evaluate(ws, cell.task, qrm_controller(trainer.model()), eval_seed,
                                         cfg.rollouts_per_eval, cfg.episode_cap);
                record(out, "satisfaction", cell, ws, trainer.steps(), ev);
                while (next_eval <= trainer.steps()) next_eval += cfg.eval_every;
            }
        }
        return out;
    }

    std::vector<LogicalOption> options;
    std::unique_ptr<LofQLearner> ql;
    std::unique_ptr<FlatTrainer> flat;
    out.option_steps = train_options_round_robin(cfg, ws, seed, [&](std::size_t steps, std::vector<LogicalOption> snap) {
        options = std::move(snap);
        EvalSummary ev;
        if (m == "LOF-VI") {
            const auto plans = plan_per_event(fsa, options, ws.env);
            ev = evaluate(ws, cell.task, lvi_controller(plans, options), eval_seed, cfg.rollouts_per_eval,
                          cfg.episode_cap);
        } else if (m == "LOF-QL") {
            if (!ql) {
                MetaQLConfig qc = cfg.meta_training;
                qc.seed = derive_seed(seed, 55);
                ql = std::make_unique<LofQLearner>(fsa, options, ws.env, EventConfig{EventMode::PerDecision, 0}, qc);
            } else {
                ql->set_options(options);
            }
            for (int k = 0; k < cfg.meta_training.episodes; ++k) ql->run_episode();
            ev = evaluate(ws, cell.task, metapolicy_controller(ql->policy(), options), eval_seed,
                          cfg.rollouts_per_eval, cfg.episode_cap);
        } else if (m == "Greedy") {
            ev = evaluate(ws, cell.task, greedy_controller(fsa, table, options), eval_seed, cfg.rollouts_per_eval,
                          cfg.episode_cap);
        } else if (m == "Flat") {
            if (!flat) {
                FlatConfig fc = cfg.flat;
                fc.seed = derive_seed(seed, 66);
                flat = std::make_unique<FlatTrainer>(ws.env, options, fc);
            } else {
                flat->set_options(options);
            }
            for (int k = 0; k < cfg.flat_episodes_per_eval; ++k) flat->run_episode();
            ev = evaluate(ws, cell.task, flat_controller(flat->policy(), options), eval_seed, cfg.rollouts_per_eval,
                          cfg.episode_cap);
        }
        record(out, "satisfaction", cell, ws, steps, ev);
    });
    out.options = options;
    return out;
}

void write_outputs(const std::string& dir, const std::string& experiment, const ExperimentConfig& cfg,
                   const Workspace& ws, const std::vector<RunCell>& cells, const std::vector<CellOutput>& outs,
                   const ExperimentResult& result) {
    if (dir.empty()) return;
    fs::create_directories(fs::path(dir) / "traces");
    fs::create_directories(fs::path(dir) / "artifacts");
    {
        std::ofstream f(fs::path(dir) / "metrics.csv");
        write_metrics_csv(f, result.metrics);
    }
    {
        std::ofstream f(fs::path(dir) / "episodes.csv");
        write_episodes_csv(f, result.episodes);
    }
    for (std::size_t t = 0; t < ws.fsas.size(); ++t) {
        std::ofstream f(fs::path(dir) / "artifacts" / ("fsa_" + ws.task_names[t] + ".json"));
        f << fsa_to_json(ws.fsas[t]).dump(2) << '\n';
    }
    nlohmann::json summary{{"experiment", experiment}, {"map", cfg.map}, {"master_seed", cfg.master_seed},
                           {"option_steps", result.option_steps}};
    std::ofstream(fs::path(dir) / "artifacts" / "summary.json") << summary.dump(2) << '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const std::string stem = c.method + "_" + ws.task_names[c.task] + "_seed" + std::to_string(c.seed);
        if (cfg.write_traces) {
            std::ofstream f(fs::path(dir) / "traces" / (stem + ".jsonl"));
            for (std::size_t r = 0; r < outs[i].last_traces.size(); ++r)
                write_trace_jsonl(f, outs[i].last_traces[r], ws.env, ws.fsas[c.task], std::to_string(r));
        }
        if (c.method == "LOF-VI" && !outs[i].options.empty()) {
            std::ofstream f(fs::path(dir) / "artifacts" / ("options_" + stem + ".json"));
            f << options_to_json(outs[i].options).dump() << '\n';
        }
    }
}

ExperimentResult merge_cells(const std::vector<RunCell>& cells, std::vector<CellOutput>& outs, const Workspace& ws) {
    ExperimentResult r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        r.metrics.insert(r.metrics.end(), outs[i].metrics.begin(), outs[i].metrics.end());
        r.episodes.insert(r.episodes.end(), outs[i].episodes.begin(), outs[i].episodes.end());
        if (outs[i].option_steps)
            r.option_steps[cells[i].method + "/" + ws.task_names[cells[i].task] + "/" +
                           std::to_string(cells[i].seed)] = outs[i].option_steps;
    }
    return r;
}

} // namespace

ExperimentResult run_satisfaction(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const Workspace ws(cfg);
    std::vector<RunCell> cells;
    for (const auto& m : cfg.methods)
        for (std::size_t t = 0; t < ws.fsas.size(); ++t)
            for (int k = 0; k < cfg.seeds; ++k) cells.push_back({m, t, k});
    std::vector<CellOutput> outs(cells.size());
    std::vector<std::string> errors(cells.size());
    const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto& c = cells[static_cast<std::size_t>(i)];
        try {
            outs[static_cast<std::size_t>(i)] = run_satisfaction_cell(cfg, ws, c);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] =
                c.method + "/" + ws.task_names[c.task] + "/seed " + std::to_string(c.seed) + ": " + e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);
    auto result = merge_cells(cells, outs, ws);
    write_outputs(out_dir, "satisfaction", cfg, ws, cells, outs, result);
    return result;
}

ExperimentResult run_composability(const ExperimentConfig& cfg, const std::string& out_dir,
                                   const std::vector<LogicalOption>* bundle) {
    cfg.validate();
    const Workspace ws(cfg);
    std::vector<LogicalOption> trained;
    if (!bundle) {
        OptionTrainConfig oc = cfg.option_training;
        oc.seed = cfg.master_seed;
        trained = train_all_options(ws.env, oc);
        bundle = &trained;
    }
    const std::vector<LogicalOption>& options = *bundle;

    std::vector<RunCell> cells;
    for (const auto& m : cfg.methods)
        if (m == "LOF-VI" || m == "LOF-QL" || m == "Greedy")
            for (std::size_t t = 0; t < ws.fsas.size(); ++t)
                for (int k = 0; k < cfg.seeds; ++k) cells.push_back({m, t, k});
    std::vector<CellOutput> outs(cells.size());
    std::vector<std::string> errors(cells.size());
    const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto& c = cells[static_cast<std::size_t>(i)];
        auto& out = outs[static_cast<std::size_t>(i)];
        try {
            const std::uint64_t seed = seed_value(cfg, c.seed);
            const std::uint64_t eval_seed = derive_seed(seed, 5555);
            const Fsa& fsa = ws.fsas[c.task];
            auto eval = [&](const Controller& ctl) {
                return evaluate(ws, c.task, ctl, eval_seed, cfg.rollouts_per_eval, cfg.episode_cap);
            };
            if (c.method == "LOF-VI") {
                std::vector<std::unique_ptr<LviSolver>> solvers;
                LviPolicies plans;
                for (std::uint32_t m = 0; m < (1u << ws.env.event_count()); ++m) {
                    PlannerConfig pc;
                    pc.events = {EventMode::Fixed, m};
                    solvers.push_back(std::make_unique<LviSolver>(fsa, options, ws.env, pc));
                    plans.by_events.push_back(solvers.back()->policy());
                }
                for (int k = 0; k <= cfg.lvi_sweeps; ++k) {
                    if (k > 0)
                        for (std::size_t m = 0; m < solvers.size(); ++m) {
                            solvers[m]->sweep();
                            plans.by_events[m] = solvers[m]->policy();
                        }
                    record(out, "composability", c, ws, static_cast<std::size_t>(k),
                           eval(lvi_controller(plans, options)));
                }
            } else if (c.method == "LOF-QL") {
                MetaQLConfig qc = cfg.meta_training;
                qc.seed = derive_seed(seed, 6666);
                LofQLearner ql(fsa, options, ws.env, EventConfig{EventMode::PerDecision, 0}, qc);
                for (int k = 0; k <= cfg.ql_episodes; ++k) {
                    if (k > 0) ql.run_episode();
                    record(out, "composability", c, ws, static_cast<std::size_t>(k),
                           eval(metapolicy_controller(ql.policy(), options)));
                }
            } else {
                const TransitionTable table(fsa, ws.env.partition());
                const auto ev = eval(greedy_controller(fsa, table, options));
                for (int k = 0; k <= cfg.lvi_sweeps; ++k)
                    record(out, "composability", c, ws, static_cast<std::size_t>(k), ev);
            }
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] =
                c.method + "/" + ws.task_names[c.task] + "/seed " + std::to_string(c.seed) + ": " + e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);
    auto result = merge_cells(cells, outs, ws);
    if (!out_dir.empty()) {
        write_outputs(out_dir, "composability", cfg, ws, cells, outs, result);
        std::ofstream f(fs::path(out_dir) / "artifacts" / "options_bundle.json");
        f << options_to_json(options).dump() << '\n';
    }
    return result;
}

std::vector<OracleCheck> run_oracle_suite(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<OracleCheck> checks;
    const Workspace ws(cfg);
    const auto hand = hand_coded_task_fsas();

    for (std::size_t t = 0; t < ws.fsas.size(); ++t) {
        const auto& name = ws.task_names[t];
        OracleCheck c{"translation/" + name, false, ""};
        const auto violations = validate_fsa(ws.fsas[t], ws.env.partition());
        if (!violations.empty()) {
            c.detail = violations.front().message;
        } else if (hand.count(name)) {
            std::string why;
            c.pass = fsa_isomorphic(ws.fsas[t], hand.at(name), ws.env.partition(), &why);
            c.detail = c.pass ? std::to_string(ws.fsas[t].size()) + " states, isomorphic to the reference" : why;
        } else {
            c.pass = true;
            c.detail = std::to_string(ws.fsas[t].size()) + " states, valid (no reference automaton)";
        }
        checks.push_back(c);
    }

    OptionTrainConfig oc = cfg.option_training;
    oc.seed = cfg.master_seed;
    const auto options = train_all_options(ws.env, oc);
    for (const auto& o : options) {
        const auto fail = verify_option(ws.env, o);
        std::string detail = fail.empty() ? "reaches subgoal from all " + std::to_string(ws.env.free_cells().size()) +
                                                " free cells"
                                          : std::to_string(fail.size()) + " failing cells:";
        for (int s : fail)
            detail += " (" + std::to_string(ws.map.x_of(s)) + "," + std::to_string(ws.map.y_of(s)) + ")";
        checks.push_back({"reach/" + o.subgoal, fail.empty(), detail});
    }

    for (std::size_t t = 0; t < ws.fsas.size(); ++t)
        for (std::uint32_t m = 0; m < (1u << ws.env.event_count()); ++m) {
            const auto& fsa = ws.fsas[t];
            OracleCheck c{"optimality/" + ws.task_names[t] + "/" + format_event_mask(m, ws.env.partition()), false, ""};
            try {
                PlannerConfig pc;
                pc.events = {EventMode::Fixed, m};
                const auto mu = logical_value_iteration(fsa, options, ws.env, pc);
                const auto h = hmdp_value_iteration(fsa, ws.env, m);
                const double a = mu.V(fsa.initial(), ws.start), b = h.V(fsa.initial(), ws.start);
                c.pass = std::isfinite(a) && std::isfinite(b) && std::fabs(a - b) <= 1e-9;
                std::ostringstream d;
                d << std::setprecision(12) << "LVI " << a << " HMDP " << b << " (" << mu.sweeps << " sweeps)";
                c.detail = d.str();
            } catch (const Error& e) {
                c.detail = e.what();
            }
            checks.push_back(c);
        }
    return checks;
}

} // namespace lof
