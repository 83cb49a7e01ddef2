#include "lof/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lof;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny() {
    return nlohmann::json::parse(R"({
        "map": "data/maps/delivery.txt",
        "tasks": ["sequential"],
        "methods": ["LOF-VI"],
        "seeds": 1,
        "option_training": {"episodes": 30, "max_steps": 100},
        "eval_every": 3000,
        "rollouts_per_eval": 2,
        "episode_cap": 200
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lof_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config errors") {
    auto j = tiny();
    j["methods"] = {"LOF-XX"};
    CHECK_THROWS_AS(load_config(j), Error);

    j = tiny();
    j["tasks"] = {"no-such-task"};
    CHECK_THROWS_AS(load_config(j), Error);

    j = tiny();
    j["seeds"] = 0;
    CHECK_THROWS_AS(load_config(j), Error);

    j = tiny();
    j["map"] = "data/maps/missing.txt";
    CHECK_THROWS_AS(load_config(j), Error);

    j = tiny();
    j["tasks"] = {{{"name", "custom"}, {"formula", "F a & F c"}}};
    const auto cfg = load_config(j);
    REQUIRE(cfg.tasks.size() == 1);
    CHECK(cfg.tasks[0].formula == "F a & F c");
}

TEST_CASE("metrics header") {
    std::ostringstream out;
    write_metrics_csv(out, {});
    CHECK(out.str() == std::string(kMetricsHeader) + "\n");
}

TEST_CASE("a small satisfaction run writes its outputs") {
    const auto cfg = load_config(tiny());
    const auto dir = scratch("smoke");
    const auto r = run_satisfaction(cfg, dir.string());
    CHECK_FALSE(r.metrics.empty());
    for (const auto& m : r.metrics) {
        CHECK(m.method == "LOF-VI");
        CHECK(m.mean_return >= 0.0);
        CHECK(m.mean_return <= 1.0);
    }
    CHECK(r.episodes.size() == r.metrics.size() * 2);
    const auto csv = slurp(dir / "metrics.csv");
    CHECK(csv.rfind(kMetricsHeader, 0) == 0);
    CHECK(fs::exists(dir / "episodes.csv"));
    fs::remove_all(dir);
}

TEST_CASE("runs are reproducible") {
    auto j = tiny();
    j["methods"] = {"LOF-QL", "QRM"};
    j["qrm"] = {{"budget", 3000}};
    j["seeds"] = 2;
    const auto cfg = load_config(j);
    const auto a = scratch("det_a"), b = scratch("det_b");
    run_satisfaction(cfg, a.string());
    run_satisfaction(cfg, b.string());
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    CHECK(slurp(a / "episodes.csv") == slurp(b / "episodes.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("composability rows start at zero") {
    auto j = tiny();
    j["methods"] = {"LOF-VI", "Greedy"};
    j["composability"] = {{"lvi_sweeps", 3}, {"ql_episodes", 2}};
    const auto r = run_composability(load_config(j));
    std::size_t zero = 0;
    for (const auto& m : r.metrics) {
        CHECK(m.experiment == "composability");
        if (m.training_steps == 0) ++zero;
    }
    CHECK(zero == 2);
}

TEST_CASE("oracle suite") {
    auto j = tiny();
    j["tasks"] = {"sequential", "if", "or", "composite"};
    j["option_training"] = {{"episodes", 1600}};
    for (const auto& c : run_oracle_suite(load_config(j))) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.pass);
    }

    // subgoal a walled off: its option can never reach it
    const auto dir = scratch("walled");
    fs::create_directories(dir);
    {
        std::ofstream m(dir / "map.txt");
        m << "@...#a\n"
             "....##\n"
             "b.c.h.\n";
    }
    j = tiny();
    j["map"] = (dir / "map.txt").string();
    j["tasks"] = {{{"name", "ab"}, {"formula", "F b"}}};
    bool reach_failed = false;
    for (const auto& c : run_oracle_suite(load_config(j)))
        if (c.name.rfind("reach/", 0) == 0 && !c.pass) reach_failed = true;
    CHECK(reach_failed);
    fs::remove_all(dir);
}
