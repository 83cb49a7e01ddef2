#include "lof/baselines.hpp"

#include <cmath>

namespace lof {

QrmTrainer::QrmTrainer(const EnvironmentMdp& env, const Fsa& fsa, const EventConfig& events, const QrmConfig& cfg)
    : env_(env), fsa_(fsa), events_(events), cfg_(cfg), table_(fsa, env.partition()), rng_(cfg.seed) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");
    if (cfg.max_steps < 1) throw Error("QRM episodes need at least one step");
    model_.fsa_states = fsa.size();
    model_.q.assign(fsa.size() << env.event_count(), QTable(env.size(), kActions));
    model_.goal = fsa.goal();
}

std::size_t QrmTrainer::run_episode(std::size_t budget) {
    const std::uint32_t events = events_.mode == EventMode::Fixed ? events_.fixed : env_.sample_events(rng_);
    const auto& starts = env_.start_cells();
    int s = starts[uniform_index(rng_, starts.size())];
    std::size_t f = table_.next(fsa_.initial(), Letter{env_.subgoal_at(s), events});
    std::size_t taken = 0;

    for (int t = 0; t < cfg_.max_steps && !fsa_.is_goal(f); ++t) {
        if (budget && steps_ + taken >= budget) break;
        auto& qf = model_.table(f, events);
        int a = qf.greedy(static_cast<std::size_t>(s));
        if (uniform_unit(rng_) < cfg_.epsilon) a = static_cast<int>(uniform_index(rng_, kActions));
        const int s2 = env_.step(s, a, rng_);
        const double r = env_.step_reward() + env_.cell_cost(s2);
        const Letter l{env_.subgoal_at(s2), events};

        for (std::size_t u = 0; u < fsa_.size(); ++u) {
            if (fsa_.is_goal(u)) continue;
            const std::size_t u2 = table_.next(u, l);
            const double target =
                r + (fsa_.is_goal(u2) ? 0.0 : cfg_.gamma * model_.table(u2, events).max(static_cast<std::size_t>(s2)));
            double& q = model_.table(u, events).at(static_cast<std::size_t>(s), static_cast<std::size_t>(a));
            q += cfg_.alpha * (target - q);
            ++model_.table(u, events).visits[static_cast<std::size_t>(s) * kActions + static_cast<std::size_t>(a)];
            ++updates_;
        }
        f = table_.next(f, l);
        s = s2;
        ++taken;
    }
    steps_ += taken;
    return taken;
}

QrmModel train_qrm(const EnvironmentMdp& env, const Fsa& fsa, const EventConfig& events, const QrmConfig& cfg,
                   int episodes) {
    QrmTrainer trainer(env, fsa, events, cfg);
    for (int k = 0; k < episodes; ++k) trainer.run_episode();
    return trainer.model();
}

// ---------------------------------------------------------------------------

int FlatOptionsPolicy::select(int s) const {
    const auto row = static_cast<std::size_t>(s);
    int best = -1;
    for (std::size_t o = 0; o < q.actions; ++o)
        if (std::isfinite(q.at(row, o)) && (best < 0 || q.at(row, o) > q.at(row, static_cast<std::size_t>(best))))
            best = static_cast<int>(o);
    return best;
}

FlatTrainer::FlatTrainer(const EnvironmentMdp& env, const std::vector<LogicalOption>& options, const FlatConfig& cfg)
    : env_(env), options_(&options), cfg_(cfg), rng_(cfg.seed) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw Error("flat options need gamma in (0, 1)");
    policy_.q = QTable(env.size(), options.size());
    for (std::size_t s = 0; s < env.size(); ++s)
        for (std::size_t o = 0; o < options.size(); ++o)
            if (!options[o].model.usable(s)) policy_.q.at(s, o) = kNegInf;
}

void FlatTrainer::set_options(const std::vector<LogicalOption>& options) {
    if (options.size() != policy_.q.actions) throw Error("option set size changed");
    options_ = &options;
    for (std::size_t s = 0; s < env_.size(); ++s)
        for (std::size_t o = 0; o < options.size(); ++o) {
            double& q = policy_.q.at(s, o);
            if (!options[o].model.usable(s)) q = kNegInf;
            else if (!std::isfinite(q)) q = 0.0;
        }
}

std::size_t FlatTrainer::run_episode() {
    const auto& starts = env_.start_cells();
    int s = starts[uniform_index(rng_, starts.size())];
    std::size_t taken = 0;
    std::vector<std::size_t> avail;
    auto& q = policy_.q;
    for (int j = 0; j < cfg_.max_options; ++j) {
        avail.clear();
        for (std::size_t o = 0; o < options_->size(); ++o)
            if ((*options_)[o].model.usable(static_cast<std::size_t>(s))) avail.push_back(o);
        if (avail.empty()) break;
        std::size_t o = static_cast<std::size_t>(policy_.select(s));
        if (uniform_unit(rng_) < cfg_.epsilon) o = avail[uniform_index(rng_, avail.size())];
        const auto& m = (*options_)[o].model;
        const auto row = static_cast<std::size_t>(s);
        const int g = m.terminal[row];
        const int next = policy_.select(g);
        const double future = next < 0 ? 0.0 : q.at(static_cast<std::size_t>(g), static_cast<std::size_t>(next));
        double& cell = q.at(row, o);
        cell += cfg_.alpha * (m.reward[row] + cfg_.gamma * future - cell);
        ++q.visits[row * q.actions + o];
        taken += static_cast<std::size_t>(m.duration[row]);
        s = g;
    }
    steps_ += taken;
    return taken;
}

FlatOptionsPolicy train_flat_options(const EnvironmentMdp& env, const std::vector<LogicalOption>& options,
                                     const FlatConfig& cfg, int episodes) {
    FlatTrainer trainer(env, options, cfg);
    for (int k = 0; k < episodes; ++k) trainer.run_episode();
    return trainer.policy();
}

nlohmann::json qrm_to_json(const QrmModel& m) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : m.q) tables.push_back(t.q);
    return {{"kind", "qrm"}, {"fsa_states", m.fsa_states}, {"goal", m.goal}, {"actions", kActions}, {"q", tables}};
}

nlohmann::json flat_to_json(const FlatOptionsPolicy& p) {
    nlohmann::json q = nlohmann::json::array();
    for (double x : p.q.q) q.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return {{"kind", "flat"}, {"options", p.q.actions}, {"q", q}};
}

} // namespace lof
