#include "lof/planner.hpp"

#include <algorithm>
#include <cmath>

namespace lof {

EventConfig parse_event_config(const std::string& text, const PropositionPartition& p) {
    if (text == "dist") return {EventMode::PerDecision, 0};
    if (text.rfind("fixed:", 0) == 0) return {EventMode::Fixed, parse_event_mask(text.substr(6), p)};
    if (text == "fixed") return {EventMode::Fixed, 0};
    throw Error("event mode must be 'fixed:<assignments>' or 'dist', got '" + text + "'");
}

void MetaPolicy::refresh(const std::vector<char>& goal_rows) {
    const std::size_t rows = fsa_states * safety_states * cells;
    v.assign(rows, kNegInf);
    mu.assign(rows, -1);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t f = r / (safety_states * cells);
        if (goal_rows[f]) {
            v[r] = 0.0;
            continue;
        }
        for (std::size_t o = 0; o < options; ++o)
            if (q[r * options + o] > v[r]) {
                v[r] = q[r * options + o];
                mu[r] = static_cast<int>(o);
            }
    }
}

nlohmann::json metapolicy_to_json(const MetaPolicy& m) {
    auto reals = [](const std::vector<double>& xs) {
        nlohmann::json out = nlohmann::json::array();
        for (double x : xs) out.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
        return out;
    };
    return {{"fsa_states", m.fsa_states}, {"safety_states", m.safety_states},
            {"cells", m.cells},           {"options", m.option_subgoals},
            {"sweeps", m.sweeps},         {"residual", m.residual},
            {"converged", m.converged},   {"V", reals(m.v)},
            {"mu", m.mu},                 {"Q", reals(m.q)}};
}

// ---------------------------------------------------------------------------

namespace {

void require_options(const Fsa& fsa, const PropositionPartition& p, const std::vector<std::string>& have) {
    for (const auto& e : fsa.edges)
        for (const auto& name : ltl::propositions(e.guard))
            if (p.subgoal_index(name) >= 0 && std::find(have.begin(), have.end(), name) == have.end())
                throw Error("no option for subgoal '" + name + "' used by the automaton");
}

double sup_change(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b);
}

} // namespace

void LviSolver::setup(const Fsa& fsa, const EnvironmentMdp& env, const PlannerConfig& cfg,
                      const std::vector<std::string>& subgoals) {
    if (!(cfg.tolerance > 0.0)) throw Error("planner tolerance must be positive");
    if (fsa.initial_states.size() != 1 || fsa.goal_states.size() != 1)
        throw Error("automaton needs exactly one initial and one goal state");
    require_options(fsa, env.partition(), subgoals);
    cfg_ = cfg;
    meta_.fsa_states = fsa.size();
    meta_.cells = env.size();
    meta_.options = subgoals.size();
    meta_.option_subgoals = subgoals;

    if (cfg.events.mode == EventMode::Fixed) {
        outcomes_ = {{1.0, cfg.events.fixed}};
    } else {
        for (std::uint32_t m = 0; m < (1u << env.event_count()); ++m)
            if (const double p = env.event_probability(m); p > 0.0) outcomes_.push_back({p, m});
    }
    reward_f_ = fsa.reward;
    goal_.assign(fsa.size(), 0);
    for (auto g : fsa.goal_states) goal_[g] = 1;
    free_.assign(env.size(), 0);
    for (int s : env.free_cells()) free_[static_cast<std::size_t>(s)] = 1;

    const TransitionTable table(fsa, env.partition());
    next_f_.resize(fsa.size() * subgoals.size() * outcomes_.size());
    for (std::size_t f = 0; f < fsa.size(); ++f)
        for (std::size_t o = 0; o < subgoals.size(); ++o)
            for (std::size_t k = 0; k < outcomes_.size(); ++k)
                next_f_[(f * subgoals.size() + o) * outcomes_.size() + k] = static_cast<std::uint32_t>(
                    table.next(f, Letter{env.partition().subgoal_index(subgoals[o]), outcomes_[k].events}));

    const std::size_t rows = meta_.fsa_states * meta_.safety_states * meta_.cells;
    meta_.q.assign(rows * meta_.options, kNegInf);
    meta_.mu.assign(rows, -1);
    reachability();
    meta_.v.assign(rows, kNegInf);
    for (std::size_t r = 0; r < rows; ++r)
        if (good_[r]) meta_.v[r] = 0.0;
    v_old_ = meta_.v;
}

LviSolver::LviSolver(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                     const PlannerConfig& cfg) {
    std::vector<std::string> names;
    const std::size_t n = env.size();
    opt_reward_.assign(options.size() * n, kNegInf);
    opt_mass_.assign(options.size() * n, 0.0);
    opt_cell_.assign(options.size() * n, -1);
    opt_fs_.assign(options.size() * n, -1);
    for (std::size_t o = 0; o < options.size(); ++o) {
        names.push_back(options[o].subgoal);
        const auto& m = options[o].model;
        if (m.reward.size() != n) throw Error("option '" + options[o].subgoal + "' does not match the map");
        for (std::size_t s = 0; s < n; ++s) {
            if (!m.usable(s)) continue;
            opt_reward_[o * n + s] = m.reward[s];
            opt_mass_[o * n + s] = m.discount[s];
            opt_cell_[o * n + s] = m.terminal[s];
            opt_fs_[o * n + s] = 0;
        }
    }
    setup(fsa, env, cfg, names);
}

LviSolver::LviSolver(const Fsa& fsa, const SafetyAutomaton& safety, const std::vector<GeneralOption>& options,
                     const EnvironmentMdp& env, const PlannerConfig& cfg) {
    if (!safety.finalized()) throw Error("safety automaton must be finalized");
    if (cfg.events.mode != EventMode::Fixed) throw Error("the general formulation supports fixed events only");
    meta_.safety_states = safety.size();
    const std::size_t n = env.size(), nfs = safety.size();
    std::vector<std::string> names;
    opt_reward_.assign(options.size() * nfs * n, kNegInf);
    opt_mass_.assign(options.size() * nfs * n, 0.0);
    opt_cell_.assign(options.size() * nfs * n, -1);
    opt_fs_.assign(options.size() * nfs * n, -1);
    for (std::size_t o = 0; o < options.size(); ++o) {
        const auto& opt = options[o];
        names.push_back(opt.subgoal);
        if (opt.cells != n || opt.safety_states != nfs)
            throw Error("general option '" + opt.subgoal + "' does not match the map and safety automaton");
        if (opt.events != cfg.events.fixed)
            throw Error("general option '" + opt.subgoal + "' was trained under different events");
        for (std::size_t x = 0; x < nfs * n; ++x) {
            if (!opt.model.usable(x)) continue;
            const std::size_t j = o * nfs * n + x;
            opt_reward_[j] = opt.model.reward[x];
            opt_mass_[j] = opt.model.discount[x];
            opt_cell_[j] = opt.goal_cell;
            opt_fs_[j] = opt.model.terminal[x];
        }
    }
    setup(fsa, env, cfg, names);
}

void LviSolver::reachability() {
    const std::size_t nf = meta_.fsa_states, nfs = meta_.safety_states, n = meta_.cells, no = meta_.options;
    const std::size_t K = outcomes_.size();
    good_.assign(nf * nfs * n, 0);
    for (std::size_t f = 0; f < nf; ++f)
        if (goal_[f])
            for (std::size_t fs = 0; fs < nfs; ++fs)
                for (std::size_t s = 0; s < n; ++s) good_[meta_.index(f, fs, s)] = free_[s];
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t f = 0; f < nf; ++f) {
            if (goal_[f]) continue;
            for (std::size_t fs = 0; fs < nfs; ++fs)
                for (std::size_t s = 0; s < n; ++s) {
                    const std::size_t r = meta_.index(f, fs, s);
                    if (good_[r] || !free_[s]) continue;
                    for (std::size_t o = 0; o < no && !good_[r]; ++o) {
                        const std::size_t j = (o * nfs + fs) * n + s;
                        if (opt_fs_[j] < 0) continue;
                        bool all = true;
                        for (std::size_t k = 0; k < K && all; ++k)
                            all = good_[meta_.index(next_f_[(f * no + o) * K + k], static_cast<std::size_t>(opt_fs_[j]),
                                                    static_cast<std::size_t>(opt_cell_[j]))];
                        if (all) {
                            good_[r] = 1;
                            changed = true;
                        }
                    }
                }
        }
    }
}

double LviSolver::sweep() {
    v_old_.swap(meta_.v);
    const std::size_t nfs = meta_.safety_states, n = meta_.cells, no = meta_.options;
    const std::size_t K = outcomes_.size();
    const long rows = static_cast<long>(meta_.fsa_states * nfs * n);
    double res = 0.0;

#pragma omp parallel for schedule(static) reduction(max : res)
    for (long r = 0; r < rows; ++r) {
        const auto row = static_cast<std::size_t>(r);
        const std::size_t f = row / (nfs * n);
        const std::size_t fs = (row / n) % nfs;
        const std::size_t s = row % n;
        double* q = &meta_.q[row * no];
        double best = kNegInf;
        int arg = -1;
        if (goal_[f]) {
            std::fill(q, q + no, 0.0);
            best = 0.0;
        } else if (good_[row]) {
            for (std::size_t o = 0; o < no; ++o) {
                const std::size_t j = (o * nfs + fs) * n + s;
                if (opt_fs_[j] < 0) {
                    q[o] = kNegInf;
                    continue;
                }
                const std::size_t g = static_cast<std::size_t>(opt_cell_[j]);
                const std::size_t gfs = static_cast<std::size_t>(opt_fs_[j]);
                double sum = 0.0;
                for (std::size_t k = 0; k < K; ++k)
                    sum += outcomes_[k].prob * v_old_[(next_f_[(f * no + o) * K + k] * nfs + gfs) * n + g];
                q[o] = reward_f_[f] * opt_reward_[j] + opt_mass_[j] * sum;
                if (q[o] > best) {
                    best = q[o];
                    arg = static_cast<int>(o);
                }
            }
        }
        meta_.v[row] = best;
        meta_.mu[row] = arg;
        res = std::max(res, sup_change(best, v_old_[row]));
    }
    ++meta_.sweeps;
    meta_.residual = res;
    meta_.converged = res < cfg_.tolerance;
    return res;
}

const MetaPolicy& LviSolver::solve() {
    while (meta_.sweeps < cfg_.max_sweeps && !meta_.converged) sweep();
    return meta_;
}

std::size_t LviSolver::unsatisfiable_count() const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < good_.size(); ++r)
        if (!good_[r] && free_[r % meta_.cells]) ++n;
    return n;
}

MetaPolicy logical_value_iteration(const Fsa& fsa, const std::vector<LogicalOption>& options,
                                   const EnvironmentMdp& env, const PlannerConfig& cfg) {
    LviSolver solver(fsa, options, env, cfg);
    return solver.solve();
}

MetaPolicy logical_value_iteration_general(const Fsa& fsa, const SafetyAutomaton& safety,
                                           const std::vector<GeneralOption>& options, const EnvironmentMdp& env,
                                           const PlannerConfig& cfg) {
    LviSolver solver(fsa, safety, options, env, cfg);
    return solver.solve();
}

// ---------------------------------------------------------------------------

namespace {

// Shared flat value iteration over (f, fs, s) with a caller-supplied
// primitive transition.
template <class Step>
HmdpResult flat_value_iteration(const Fsa& fsa, std::size_t nfs, const EnvironmentMdp& env, double tolerance,
                                int max_sweeps, Step step) {
    HmdpResult out;
    out.fsa_states = fsa.size();
    out.safety_states = nfs;
    out.cells = env.size();
    const std::size_t n = env.size();
    const std::size_t rows = fsa.size() * nfs * n;
    const double gamma = env.gamma();

    std::vector<char> free(n, 0);
    for (int s : env.free_cells()) free[static_cast<std::size_t>(s)] = 1;
    std::vector<std::size_t> succ(rows * kActions);
    std::vector<double> rew(rows * kActions);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t f = r / (nfs * n), fs = (r / n) % nfs, s = r % n;
        for (int a = 0; a < kActions; ++a) {
            const auto [f2, fs2, s2, reward] = step(f, fs, static_cast<int>(s), a);
            succ[r * kActions + static_cast<std::size_t>(a)] = (f2 * nfs + fs2) * n + static_cast<std::size_t>(s2);
            rew[r * kActions + static_cast<std::size_t>(a)] = fsa.reward[f] * reward;
        }
    }

    std::vector<char> good(rows, 0);
    for (std::size_t r = 0; r < rows; ++r)
        if (fsa.is_goal(r / (nfs * n)) && free[r % n]) good[r] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t r = 0; r < rows; ++r) {
            if (good[r] || !free[r % n]) continue;
            for (int a = 0; a < kActions; ++a)
                if (good[succ[r * kActions + static_cast<std::size_t>(a)]]) {
                    good[r] = 1;
                    changed = true;
                    break;
                }
        }
    }

    out.v.assign(rows, kNegInf);
    out.action.assign(rows, -1);
    for (std::size_t r = 0; r < rows; ++r)
        if (good[r]) out.v[r] = 0.0;
    std::vector<double> old(rows);
    const long nrows = static_cast<long>(rows);
    while (out.sweeps < max_sweeps) {
        old.swap(out.v);
        double res = 0.0;
#pragma omp parallel for schedule(static) reduction(max : res)
        for (long i = 0; i < nrows; ++i) {
            const auto r = static_cast<std::size_t>(i);
            double best = kNegInf;
            int arg = -1;
            if (good[r]) {
                if (fsa.is_goal(r / (nfs * n))) {
                    best = 0.0;
                } else {
                    for (int a = 0; a < kActions; ++a) {
                        const std::size_t k = r * kActions + static_cast<std::size_t>(a);
                        const double val = rew[k] + gamma * old[succ[k]];
                        if (val > best) {
                            best = val;
                            arg = a;
                        }
                    }
                }
            }
            out.v[r] = best;
            out.action[r] = arg;
            res = std::max(res, sup_change(best, old[r]));
        }
        ++out.sweeps;
        if (res < tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

struct FlatStep {
    std::size_t f;
    std::size_t fs;
    int s;
    double reward;
};

} // namespace

HmdpResult hmdp_value_iteration(const Fsa& fsa, const EnvironmentMdp& env, std::uint32_t events, double tolerance,
                                int max_sweeps) {
    const TransitionTable table(fsa, env.partition());
    return flat_value_iteration(fsa, 1, env, tolerance, max_sweeps, [&](std::size_t f, std::size_t, int s, int a) {
        const int s2 = env.step(s, a);
        const std::size_t f2 = fsa.is_goal(f) ? f : table.next(f, Letter{env.subgoal_at(s2), events});
        return FlatStep{f2, 0, s2, env.reward(s, a)};
    });
}

HmdpResult hmdp_value_iteration_general(const Fsa& fsa, const SafetyAutomaton& safety, const EnvironmentMdp& env,
                                        std::uint32_t events, double tolerance, int max_sweeps) {
    if (!safety.finalized()) throw Error("safety automaton must be finalized");
    const TransitionTable table(fsa, env.partition());
    return flat_value_iteration(
        fsa, safety.size(), env, tolerance, max_sweeps, [&](std::size_t f, std::size_t fs, int s, int a) {
            const int s2 = env.step(s, a);
            const auto mask = env.safety_mask(s2);
            const auto st = safety.step(fs, mask, events);
            double r = env.step_reward() + safety.cost(fs, mask);
            if (st.violated) r += safety.violation_cost;
            const std::size_t f2 = fsa.is_goal(f) ? f : table.next(f, Letter{env.subgoal_at(s2), events});
            return FlatStep{f2, st.next, s2, r};
        });
}

// ---------------------------------------------------------------------------

LofQLearner::LofQLearner(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                         const EventConfig& events, const MetaQLConfig& cfg)
    : fsa_(fsa), options_(&options), env_(env), events_(events), cfg_(cfg), table_(fsa, env.partition()),
      rng_(cfg.seed) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw Error("epsilon must lie in [0, 1]");
    std::vector<std::string> names;
    for (const auto& o : options) names.push_back(o.subgoal);
    require_options(fsa, env.partition(), names);
    meta_.fsa_states = fsa.size();
    meta_.cells = env.size();
    meta_.options = options.size();
    meta_.option_subgoals = names;
    const std::size_t rows = fsa.size() * env.size();
    meta_.q.assign(rows * options.size(), kNegInf);
    for (std::size_t f = 0; f < fsa.size(); ++f)
        for (int s : env.free_cells())
            for (std::size_t o = 0; o < options.size(); ++o)
                if (options[o].model.usable(static_cast<std::size_t>(s)))
                    meta_.q[(f * env.size() + static_cast<std::size_t>(s)) * options.size() + o] = 0.0;
    // V starts at 0 everywhere, as in the algorithm
    meta_.v.assign(rows, 0.0);
    meta_.mu.assign(rows, -1);
}

void LofQLearner::set_options(const std::vector<LogicalOption>& options) {
    if (options.size() != meta_.options) throw Error("option set size changed");
    options_ = &options;
    const std::size_t no = options.size();
    for (std::size_t f = 0; f < meta_.fsa_states; ++f)
        for (int s : env_.free_cells())
            for (std::size_t o = 0; o < no; ++o) {
                double& q = meta_.q[(f * env_.size() + static_cast<std::size_t>(s)) * no + o];
                const bool usable = options[o].model.usable(static_cast<std::size_t>(s));
                if (!usable) q = kNegInf;
                else if (!std::isfinite(q)) q = 0.0;
            }
}

void LofQLearner::run_episode() {
    const std::uint32_t events = events_.mode == EventMode::Fixed ? events_.fixed : env_.sample_events(rng_);
    const auto& starts = env_.start_cells();
    int s = starts[uniform_index(rng_, starts.size())];
    std::size_t f = table_.next(fsa_.initial(), Letter{env_.subgoal_at(s), events});
    const std::size_t no = options_->size();
    std::vector<std::size_t> avail;

    for (int j = 0; j < cfg_.max_options && !fsa_.is_goal(f); ++j) {
        const std::size_t row = f * env_.size() + static_cast<std::size_t>(s);
        avail.clear();
        for (std::size_t o = 0; o < no; ++o)
            if ((*options_)[o].model.usable(static_cast<std::size_t>(s))) avail.push_back(o);
        if (avail.empty()) break;
        std::size_t o = avail.front();
        for (auto c : avail)
            if (meta_.q[row * no + c] > meta_.q[row * no + o]) o = c;
        if (uniform_unit(rng_) < cfg_.epsilon) o = avail[uniform_index(rng_, avail.size())];

        const auto& m = (*options_)[o].model;
        const int g = m.terminal[static_cast<std::size_t>(s)];
        const std::size_t f2 = table_.next(f, Letter{(*options_)[o].subgoal_index, events});
        const double target = fsa_.reward[f] * m.reward[static_cast<std::size_t>(s)] +
                              m.discount[static_cast<std::size_t>(s)] * meta_.v[f2 * env_.size() + static_cast<std::size_t>(g)];
        double& q = meta_.q[row * no + o];
        q += cfg_.alpha * (target - q);

        double best = kNegInf;
        int arg = -1;
        for (auto c : avail)
            if (meta_.q[row * no + c] > best) {
                best = meta_.q[row * no + c];
                arg = static_cast<int>(c);
            }
        meta_.v[row] = best;
        meta_.mu[row] = arg;
        f = f2;
        s = g;
    }
    ++episodes_;
    meta_.sweeps = episodes_;
}

MetaPolicy lof_q_learning(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                          const EventConfig& events, const MetaQLConfig& cfg) {
    LofQLearner learner(fsa, options, env, events, cfg);
    for (int k = 0; k < cfg.episodes; ++k) learner.run_episode();
    return learner.policy();
}

int greedy_metapolicy(const Fsa& fsa, const TransitionTable& table, const std::vector<LogicalOption>& options,
                      std::size_t f, int s, std::uint32_t events) {
    if (fsa.is_goal(f)) return -1;
    int best = -1;
    double best_r = kNegInf;
    for (std::size_t o = 0; o < options.size(); ++o) {
        const auto& m = options[o].model;
        if (!m.usable(static_cast<std::size_t>(s))) continue;
        if (table.next(f, Letter{options[o].subgoal_index, events}) == f) continue;
        if (best < 0 || m.reward[static_cast<std::size_t>(s)] > best_r) {
            best = static_cast<int>(o);
            best_r = m.reward[static_cast<std::size_t>(s)];
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

namespace reference {

namespace {

std::vector<std::pair<double, std::uint32_t>> outcome_list(const EnvironmentMdp& env, const EventConfig& events) {
    if (events.mode == EventMode::Fixed) return {{1.0, events.fixed}};
    std::vector<std::pair<double, std::uint32_t>> out;
    for (std::uint32_t m = 0; m < (1u << env.event_count()); ++m)
        if (env.event_probability(m) > 0.0) out.emplace_back(env.event_probability(m), m);
    return out;
}

std::vector<char> lvi_good(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                           const std::vector<std::pair<double, std::uint32_t>>& outcomes) {
    const std::size_t n = env.size();
    std::vector<char> good(fsa.size() * n, 0);
    for (int s : env.free_cells()) good[fsa.goal() * n + static_cast<std::size_t>(s)] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t f = 0; f < fsa.size(); ++f)
            for (int s : env.free_cells()) {
                auto& cell = good[f * n + static_cast<std::size_t>(s)];
                if (cell) continue;
                for (const auto& o : options) {
                    if (!o.model.usable(static_cast<std::size_t>(s))) continue;
                    bool all = true;
                    for (const auto& [p, e] : outcomes) {
                        const auto f2 = fsa_step(fsa, env.partition(), f, Letter{o.subgoal_index, e});
                        all = all && good[f2 * n + static_cast<std::size_t>(o.goal_cell)];
                    }
                    if (all) {
                        cell = 1;
                        changed = true;
                        break;
                    }
                }
            }
    }
    return good;
}

} // namespace

double lvi_sweep_serial(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                        const EventConfig& events, const std::vector<double>& v_old, std::vector<double>& v_new,
                        std::vector<double>* q_out) {
    const std::size_t n = env.size();
    const auto outcomes = outcome_list(env, events);
    v_new.assign(fsa.size() * n, kNegInf);
    if (q_out) q_out->assign(fsa.size() * n * options.size(), kNegInf);
    double res = 0.0;
    for (std::size_t f = 0; f < fsa.size(); ++f)
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t row = f * n + s;
            double best = kNegInf;
            if (fsa.is_goal(f)) {
                best = 0.0;
                if (q_out)
                    for (std::size_t o = 0; o < options.size(); ++o) (*q_out)[row * options.size() + o] = 0.0;
            } else if (std::isfinite(v_old[row])) {
                for (std::size_t o = 0; o < options.size(); ++o) {
                    const auto& m = options[o].model;
                    if (!m.usable(s)) continue;
                    double sum = 0.0;
                    for (const auto& [p, e] : outcomes) {
                        const auto f2 = fsa_step(fsa, env.partition(), f, Letter{options[o].subgoal_index, e});
                        sum += p * v_old[f2 * n + static_cast<std::size_t>(m.terminal[s])];
                    }
                    const double q = fsa.reward[f] * m.reward[s] + m.discount[s] * sum;
                    if (q_out) (*q_out)[row * options.size() + o] = q;
                    best = std::max(best, q);
                }
            }
            v_new[row] = best;
            if (best != v_old[row]) res = std::max(res, std::fabs(best - v_old[row]));
        }
    return res;
}

MetaPolicy lvi_serial(const Fsa& fsa, const std::vector<LogicalOption>& options, const EnvironmentMdp& env,
                      const PlannerConfig& cfg) {
    const std::size_t n = env.size();
    const auto good = lvi_good(fsa, options, env, outcome_list(env, cfg.events));
    MetaPolicy m;
    m.fsa_states = fsa.size();
    m.cells = n;
    m.options = options.size();
    for (const auto& o : options) m.option_subgoals.push_back(o.subgoal);
    std::vector<double> v(fsa.size() * n, kNegInf), next;
    for (std::size_t r = 0; r < v.size(); ++r)
        if (good[r]) v[r] = 0.0;
    while (m.sweeps < cfg.max_sweeps) {
        m.residual = lvi_sweep_serial(fsa, options, env, cfg.events, v, next, &m.q);
        v.swap(next);
        ++m.sweeps;
        if (m.residual < cfg.tolerance) {
            m.converged = true;
            break;
        }
    }
    std::vector<char> goal_rows(fsa.size(), 0);
    goal_rows[fsa.goal()] = 1;
    m.refresh(goal_rows);
    return m;
}

HmdpResult hmdp_serial(const Fsa& fsa, const EnvironmentMdp& env, std::uint32_t events, double tolerance,
                       int max_sweeps) {
    const std::size_t n = env.size();
    const double gamma = env.gamma();
    HmdpResult out;
    out.fsa_states = fsa.size();
    out.cells = n;
    auto next_f = [&](std::size_t f, int s2) {
        return fsa_step(fsa, env.partition(), f, Letter{env.subgoal_at(s2), events});
    };
    std::vector<char> good(fsa.size() * n, 0);
    for (int s : env.free_cells()) good[fsa.goal() * n + static_cast<std::size_t>(s)] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t f = 0; f < fsa.size(); ++f)
            for (int s : env.free_cells()) {
                if (good[f * n + static_cast<std::size_t>(s)]) continue;
                for (int a = 0; a < kActions; ++a) {
                    const int s2 = env.step(s, a);
                    if (good[next_f(f, s2) * n + static_cast<std::size_t>(s2)]) {
                        good[f * n + static_cast<std::size_t>(s)] = 1;
                        changed = true;
                        break;
                    }
                }
            }
    }
    out.v.assign(fsa.size() * n, kNegInf);
    out.action.assign(fsa.size() * n, -1);
    for (std::size_t r = 0; r < out.v.size(); ++r)
        if (good[r]) out.v[r] = 0.0;
    while (out.sweeps < max_sweeps) {
        std::vector<double> v = out.v;
        double res = 0.0;
        for (std::size_t f = 0; f < fsa.size(); ++f) {
            if (fsa.is_goal(f)) continue;
            for (int s : env.free_cells()) {
                const std::size_t row = f * n + static_cast<std::size_t>(s);
                if (!good[row]) continue;
                double best = kNegInf;
                for (int a = 0; a < kActions; ++a) {
                    const int s2 = env.step(s, a);
                    const double val = fsa.reward[f] * env.reward(s, a) +
                                       gamma * out.v[next_f(f, s2) * n + static_cast<std::size_t>(s2)];
                    if (val > best) {
                        best = val;
                        out.action[row] = a;
                    }
                }
                v[row] = best;
                res = std::max(res, std::fabs(best - out.v[row]));
            }
        }
        out.v.swap(v);
        ++out.sweeps;
        if (res < tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace reference

} // namespace lof
