#include "lof/harness.hpp"
#include "lof/ltl_translate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace lof;

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(resolve_path(path));
    if (!in) throw Error("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string read_formula(const std::string& path) {
    std::ifstream in(resolve_path(path));
    if (!in) throw Error("cannot open " + path);
    std::string line;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    throw Error(path + " holds no formula");
}

PropositionPartition read_props(const std::string& path) {
    const auto j = read_json(path);
    PropositionPartition p;
    p.subgoals = j.value("subgoals", std::vector<std::string>{});
    p.safety = j.value("safety", std::vector<std::string>{});
    p.events = j.value("events", std::vector<std::string>{});
    if (const auto bad = p.overlaps(); !bad.empty()) throw Error("proposition listed twice: " + bad.front());
    return p;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

SafetyAutomaton map_safety(const GridMap& map, const PropositionPartition& p) {
    auto s = SafetyAutomaton::trivial(map.safety_costs);
    s.finalize(p);
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Logical Options Framework"};
    app.require_subcommand(1);

    std::string spec_file, props_file, out;
    auto* compile = app.add_subcommand("compile", "Translate a co-safe LTL task to an automaton");
    compile->add_option("--spec", spec_file, "file holding one formula")->required();
    compile->add_option("--props", props_file, "proposition partition JSON")->required();
    compile->add_option("--out", out, "output FSA JSON (stdout if omitted)");

    std::string map_file, mode = "simple", events_text = "fixed";
    OptionTrainConfig train_cfg;
    auto* train = app.add_subcommand("train", "Learn one logical option per subgoal on a map");
    train->add_option("--map", map_file)->required();
    train->add_option("--out", out, "option bundle JSON")->required();
    train->add_option("--seed", train_cfg.seed);
    train->add_option("--episodes", train_cfg.episodes);
    train->add_option("--max-steps", train_cfg.max_steps);
    train->add_option("--mode", mode)->check(CLI::IsMember({"simple", "general"}));
    train->add_option("--events", events_text, "fixed:can=0 (general mode)");

    std::string fsa_file, options_file;
    auto* plan = app.add_subcommand("plan", "Logical value iteration over a trained option bundle");
    plan->add_option("--fsa", fsa_file)->required();
    plan->add_option("--options", options_file)->required();
    plan->add_option("--map", map_file)->required();
    plan->add_option("--mode", mode)->check(CLI::IsMember({"simple", "general"}));
    plan->add_option("--events", events_text, "fixed:can=0 | fixed | dist");
    plan->add_option("--out", out)->required();

    std::string protocol, config_file;
    auto* experiment = app.add_subcommand("experiment", "Run the satisfaction or composability protocol");
    experiment->add_option("protocol", protocol)->required()->check(CLI::IsMember({"satisfaction", "composability"}));
    experiment->add_option("--config", config_file)->required();
    experiment->add_option("--out", out, "output directory")->required();
    experiment->add_option("--options", options_file, "reuse a bundle (composability)");

    auto* oracle = app.add_subcommand("oracle", "Planner optimality, option and translation checks");
    oracle->add_option("--config", config_file)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compile) {
            const auto p = read_props(props_file);
            write_json(out, fsa_to_json(compile_task(read_formula(spec_file), p)));
        } else if (*train) {
            train_cfg.validate();
            const auto map = load_map_file(resolve_path(map_file));
            const EnvironmentMdp env(map, partition_for(map));
            if (mode == "simple") {
                write_json(out, options_to_json(train_all_options(env, train_cfg)));
            } else {
                const auto ev = parse_event_config(events_text, env.partition());
                if (ev.mode != EventMode::Fixed) throw Error("general options need fixed events");
                write_json(out, general_options_to_json(
                                    train_all_options_general(env, map_safety(map, env.partition()), ev.fixed, train_cfg)));
            }
        } else if (*plan) {
            const auto map = load_map_file(resolve_path(map_file));
            const EnvironmentMdp env(map, partition_for(map));
            const auto fsa = fsa_from_json(read_json(fsa_file), env.partition().all());
            PlannerConfig pc;
            pc.events = parse_event_config(events_text, env.partition());
            MetaPolicy mu;
            if (mode == "simple") {
                mu = logical_value_iteration(fsa, options_from_json(read_json(options_file)), env, pc);
            } else {
                mu = logical_value_iteration_general(fsa, map_safety(map, env.partition()),
                                                     general_options_from_json(read_json(options_file)), env, pc);
            }
            if (!mu.converged) std::cerr << "warning: no convergence after " << mu.sweeps << " sweeps\n";
            write_json(out, metapolicy_to_json(mu));
        } else if (*experiment) {
            const auto cfg = load_config_file(config_file);
            ExperimentResult r;
            if (protocol == "satisfaction") {
                r = run_satisfaction(cfg, out);
            } else {
                std::vector<LogicalOption> bundle;
                if (!options_file.empty()) bundle = options_from_json(read_json(options_file));
                r = run_composability(cfg, out, options_file.empty() ? nullptr : &bundle);
            }
            std::cout << r.metrics.size() << " metric rows written to " << out << "/metrics.csv\n";
        } else if (*oracle) {
            const auto checks = run_oracle_suite(load_config_file(config_file));
            bool ok = true;
            for (const auto& c : checks) {
                std::cout << (c.pass ? "ok   " : "FAIL ") << c.name << "  " << c.detail << '\n';
                ok = ok && c.pass;
            }
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "lof: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
