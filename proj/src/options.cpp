#include "lof/options.hpp"

#include <cmath>

namespace lof {

void OptionTrainConfig::validate() const {
    if (episodes < 1 || max_steps < 1) throw Error("option training needs at least one episode and one step");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");
    if (!(epsilon_final >= 0.0 && epsilon_final <= 1.0)) throw Error("final epsilon must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("gamma must lie in (0, 1]");
}

nlohmann::json to_json(const OptionTrainConfig& c) {
    return {{"episodes", c.episodes}, {"max_steps", c.max_steps}, {"alpha", c.alpha},
            {"epsilon", c.epsilon},   {"decay", c.decay},         {"epsilon_final", c.epsilon_final},
            {"gamma", c.gamma},       {"seed", c.seed}};
}

OptionTrainConfig option_config_from_json(const nlohmann::json& j) {
    OptionTrainConfig c;
    c.episodes = j.value("episodes", c.episodes);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.alpha = j.value("alpha", c.alpha);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.decay = j.value("decay", c.decay);
    c.epsilon_final = j.value("epsilon_final", c.epsilon_final);
    c.gamma = j.value("gamma", c.gamma);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

int QTable::greedy(std::size_t s) const {
    std::size_t best = 0;
    for (std::size_t a = 1; a < actions; ++a)
        if (at(s, a) > at(s, best)) best = a;
    return static_cast<int>(best);
}

double QTable::max(std::size_t s) const { return at(s, static_cast<std::size_t>(greedy(s))); }

// ---------------------------------------------------------------------------

namespace {

int subgoal_goal_cell(const EnvironmentMdp& env, const std::string& subgoal) {
    const auto it = env.map().subgoal_cells.find(subgoal);
    if (it == env.map().subgoal_cells.end()) throw Error("subgoal '" + subgoal + "' is not on the map");
    return it->second;
}

} // namespace

OptionTrainer::OptionTrainer(const EnvironmentMdp& env, const std::string& subgoal, const OptionTrainConfig& cfg,
                             const SafetyAutomaton* safety, std::uint32_t events)
    : env_(env), safety_(safety), cfg_(cfg), subgoal_(subgoal), subgoal_index_(env.partition().subgoal_index(subgoal)),
      goal_(subgoal_goal_cell(env, subgoal)), events_(events), n_fs_(safety ? safety->size() : 1),
      q_(n_fs_ * env.size(), kActions), rng_(cfg.seed) {
    cfg_.validate();
    if (safety_ && !safety_->finalized()) throw Error("safety automaton must be finalized before training");
    for (int c : env.free_cells())
        if (c != goal_) starts_.push_back(c);
}

std::size_t OptionTrainer::run_episode() {
    const std::size_t n_s = env_.size();
    double eps = cfg_.epsilon;
    if (cfg_.decay && cfg_.episodes > 1)
        eps = cfg_.epsilon + (cfg_.epsilon_final - cfg_.epsilon) * episode_ / (cfg_.episodes - 1);

    // episodes start anywhere in the product so every safety state is covered
    std::size_t fs = 0;
    if (n_fs_ > 1) fs = uniform_index(rng_, n_fs_);
    int s = starts_[uniform_index(rng_, starts_.size())];

    std::size_t taken = 0;
    for (int t = 0; t < cfg_.max_steps; ++t) {
        const std::size_t x = fs * n_s + static_cast<std::size_t>(s);
        int a = q_.greedy(x);
        if (uniform_unit(rng_) < eps) a = static_cast<int>(uniform_index(rng_, kActions));

        const int s2 = env_.step(s, a, rng_);
        double r = 0.0;
        std::size_t fs2 = fs;
        if (safety_) {
            const auto mask = env_.safety_mask(s2);
            const auto st = safety_->step(fs, mask, events_);
            r = env_.step_reward() + safety_->cost(fs, mask);
            if (st.violated) r += safety_->violation_cost;
            fs2 = st.next;
        } else {
            r = env_.step_reward() + env_.cell_cost(s2);
        }
        const bool terminal = s2 == goal_;
        const std::size_t x2 = fs2 * n_s + static_cast<std::size_t>(s2);
        const double target = r + (terminal ? 0.0 : cfg_.gamma * q_.max(x2));
        double& q = q_.at(x, static_cast<std::size_t>(a));
        q += cfg_.alpha * (target - q);
        ++q_.visits[x * kActions + static_cast<std::size_t>(a)];
        ++taken;
        s = s2;
        fs = fs2;
        if (terminal) break;
    }
    ++episode_;
    steps_ += taken;
    return taken;
}

LogicalOption OptionTrainer::option() const {
    if (safety_) throw Error("trainer has a safety automaton; use general_option()");
    std::vector<int> policy(env_.size());
    for (std::size_t s = 0; s < env_.size(); ++s) policy[s] = q_.greedy(s);
    LogicalOption o = make_option(env_, subgoal_, std::move(policy));
    o.model = evaluate_option_models(env_, o.policy, goal_, cfg_.gamma);
    o.config = cfg_;
    o.training_steps = steps_;
    return o;
}

GeneralOption OptionTrainer::general_option() const {
    if (!safety_) throw Error("trainer has no safety automaton; use option()");
    GeneralOption o;
    o.subgoal = subgoal_;
    o.subgoal_index = subgoal_index_;
    o.goal_cell = goal_;
    o.safety_states = n_fs_;
    o.cells = env_.size();
    o.events = events_;
    o.policy.resize(q_.states);
    for (std::size_t x = 0; x < q_.states; ++x) o.policy[x] = q_.greedy(x);
    o.model = evaluate_option_models_general(env_, *safety_, events_, o.policy, goal_, cfg_.gamma);
    o.config = cfg_;
    o.training_steps = steps_;
    return o;
}

TrainResult train_option(const EnvironmentMdp& env, const std::string& subgoal, const OptionTrainConfig& cfg) {
    OptionTrainer trainer(env, subgoal, cfg);
    while (!trainer.done()) trainer.run_episode();
    return {trainer.q(), trainer.option()};
}

GeneralTrainResult train_option_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                        const std::string& subgoal, std::uint32_t events,
                                        const OptionTrainConfig& cfg) {
    OptionTrainer trainer(env, subgoal, cfg, &safety, events);
    while (!trainer.done()) trainer.run_episode();
    return {trainer.q(), trainer.general_option()};
}

// ---------------------------------------------------------------------------

OptionModel evaluate_option_models(const EnvironmentMdp& env, const std::vector<int>& policy, int goal_cell,
                                   double gamma) {
    const std::size_t n = env.size();
    OptionModel m{std::vector<double>(n, kNegInf), std::vector<int>(n, -1), std::vector<double>(n, 0.0),
                  std::vector<int>(n, -1)};
    std::vector<int> seen(n, -1);
    for (int start : env.free_cells()) {
        double total = 0.0, disc = 1.0;
        int s = start, k = 0;
        while (s != goal_cell && seen[static_cast<std::size_t>(s)] != start) {
            seen[static_cast<std::size_t>(s)] = start;
            const int a = policy[static_cast<std::size_t>(s)];
            total += disc * env.reward(s, a);
            disc *= gamma;
            s = env.step(s, a);
            ++k;
        }
        if (s != goal_cell) continue;
        const auto i = static_cast<std::size_t>(start);
        m.reward[i] = total;
        m.terminal[i] = goal_cell;
        m.discount[i] = disc;
        m.duration[i] = k;
    }
    return m;
}

OptionModel evaluate_option_models_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                           std::uint32_t events, const std::vector<int>& policy, int goal_cell,
                                           double gamma) {
    const std::size_t n_s = env.size();
    const std::size_t n = safety.size() * n_s;
    OptionModel m{std::vector<double>(n, kNegInf), std::vector<int>(n, -1), std::vector<double>(n, 0.0),
                  std::vector<int>(n, -1)};
    std::vector<long> seen(n, -1);
    for (std::size_t fs0 = 0; fs0 < safety.size(); ++fs0)
        for (int start : env.free_cells()) {
            const std::size_t x0 = fs0 * n_s + static_cast<std::size_t>(start);
            double total = 0.0, disc = 1.0;
            std::size_t fs = fs0;
            int s = start, k = 0;
            while (s != goal_cell) {
                const std::size_t x = fs * n_s + static_cast<std::size_t>(s);
                if (seen[x] == static_cast<long>(x0)) break;
                seen[x] = static_cast<long>(x0);
                const int a = policy[x];
                const int s2 = env.step(s, a);
                const auto mask = env.safety_mask(s2);
                const auto st = safety.step(fs, mask, events);
                double r = env.step_reward() + safety.cost(fs, mask);
                if (st.violated) r += safety.violation_cost;
                total += disc * r;
                disc *= gamma;
                s = s2;
                fs = st.next;
                ++k;
            }
            if (s != goal_cell) continue;
            m.reward[x0] = total;
            m.terminal[x0] = static_cast<int>(fs);
            m.discount[x0] = disc;
            m.duration[x0] = k;
        }
    return m;
}

std::vector<int> verify_option(const EnvironmentMdp& env, const LogicalOption& option) {
    const OptionModel& m = option.model.terminal.empty()
                               ? evaluate_option_models(env, option.policy, option.goal_cell, 1.0)
                               : option.model;
    std::vector<int> failures;
    for (int s : env.free_cells())
        if (m.terminal[static_cast<std::size_t>(s)] != option.goal_cell) failures.push_back(s);
    return failures;
}

std::vector<LogicalOption> train_all_options(const EnvironmentMdp& env, const OptionTrainConfig& cfg) {
    std::vector<std::string> names;
    for (const auto& sg : env.partition().subgoals)
        if (env.map().subgoal_cells.count(sg)) names.push_back(sg);
    std::vector<LogicalOption> out(names.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < names.size(); ++i) {
        OptionTrainConfig c = cfg;
        c.seed = derive_seed(cfg.seed, i);
        out[i] = train_option(env, names[i], c).option;
    }
    return out;
}

std::vector<GeneralOption> train_all_options_general(const EnvironmentMdp& env, const SafetyAutomaton& safety,
                                                     std::uint32_t events, const OptionTrainConfig& cfg) {
    std::vector<std::string> names;
    for (const auto& sg : env.partition().subgoals)
        if (env.map().subgoal_cells.count(sg)) names.push_back(sg);
    std::vector<GeneralOption> out(names.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < names.size(); ++i) {
        OptionTrainConfig c = cfg;
        c.seed = derive_seed(cfg.seed, i);
        out[i] = train_option_general(env, safety, names[i], events, c).option;
    }
    return out;
}

LogicalOption make_option(const EnvironmentMdp& env, const std::string& subgoal, std::vector<int> policy) {
    if (policy.size() != env.size()) throw Error("policy size does not match the map");
    LogicalOption o;
    o.subgoal = subgoal;
    o.subgoal_index = env.partition().subgoal_index(subgoal);
    o.goal_cell = subgoal_goal_cell(env, subgoal);
    o.policy = std::move(policy);
    o.model = evaluate_option_models(env, o.policy, o.goal_cell, env.gamma());
    return o;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json reals(const std::vector<double>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return out;
}

std::vector<double> reals_from(const nlohmann::json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(x.is_null() ? kNegInf : x.get<double>());
    return out;
}

nlohmann::json model_json(const OptionModel& m) {
    return {{"reward", reals(m.reward)}, {"terminal", m.terminal}, {"discount", m.discount}, {"duration", m.duration}};
}

OptionModel model_from(const nlohmann::json& j) {
    OptionModel m;
    m.reward = reals_from(j.at("reward"));
    m.terminal = j.at("terminal").get<std::vector<int>>();
    m.discount = j.at("discount").get<std::vector<double>>();
    m.duration = j.at("duration").get<std::vector<int>>();
    return m;
}

} // namespace

nlohmann::json options_to_json(const std::vector<LogicalOption>& options) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& o : options)
        list.push_back({{"subgoal", o.subgoal},
                        {"subgoal_index", o.subgoal_index},
                        {"goal_cell", o.goal_cell},
                        {"policy", o.policy},
                        {"model", model_json(o.model)},
                        {"config", to_json(o.config)},
                        {"seed", o.config.seed},
                        {"training_steps", o.training_steps}});
    return {{"kind", "options"}, {"options", list}};
}

std::vector<LogicalOption> options_from_json(const nlohmann::json& j) {
    std::vector<LogicalOption> out;
    try {
        if (j.value("kind", std::string("options")) != "options") throw Error("bundle is not an options bundle");
        for (const auto& e : j.at("options")) {
            LogicalOption o;
            o.subgoal = e.at("subgoal").get<std::string>();
            o.subgoal_index = e.at("subgoal_index").get<int>();
            o.goal_cell = e.at("goal_cell").get<int>();
            o.policy = e.at("policy").get<std::vector<int>>();
            o.model = model_from(e.at("model"));
            o.config = option_config_from_json(e.value("config", nlohmann::json::object()));
            o.training_steps = e.value("training_steps", std::size_t{0});
            out.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed options bundle: ") + e.what());
    }
    return out;
}

nlohmann::json general_options_to_json(const std::vector<GeneralOption>& options) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& o : options)
        list.push_back({{"subgoal", o.subgoal},
                        {"subgoal_index", o.subgoal_index},
                        {"goal_cell", o.goal_cell},
                        {"safety_states", o.safety_states},
                        {"cells", o.cells},
                        {"events", o.events},
                        {"policy", o.policy},
                        {"model", model_json(o.model)},
                        {"config", to_json(o.config)},
                        {"training_steps", o.training_steps}});
    return {{"kind", "general_options"}, {"options", list}};
}

std::vector<GeneralOption> general_options_from_json(const nlohmann::json& j) {
    std::vector<GeneralOption> out;
    try {
        if (j.value("kind", std::string()) != "general_options") throw Error("bundle is not a general options bundle");
        for (const auto& e : j.at("options")) {
            GeneralOption o;
            o.subgoal = e.at("subgoal").get<std::string>();
            o.subgoal_index = e.at("subgoal_index").get<int>();
            o.goal_cell = e.at("goal_cell").get<int>();
            o.safety_states = e.at("safety_states").get<std::size_t>();
            o.cells = e.at("cells").get<std::size_t>();
            o.events = e.at("events").get<std::uint32_t>();
            o.policy = e.at("policy").get<std::vector<int>>();
            o.model = model_from(e.at("model"));
            o.config = option_config_from_json(e.value("config", nlohmann::json::object()));
            o.training_steps = e.value("training_steps", std::size_t{0});
            out.push_back(std::move(o));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed general options bundle: ") + e.what());
    }
    return out;
}

} // namespace lof
