#include "lof/ltl_translate.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

namespace lof {

using Cube = std::pair<std::uint32_t, std::uint32_t>; // (care mask, value)

std::vector<Cube> minimize_cover(std::size_t n_vars, const std::vector<std::uint32_t>& on,
                                 const std::vector<std::uint32_t>& dont_care) {
    if (on.empty()) return {};
    const std::uint32_t full = n_vars >= 32 ? ~0u : ((1u << n_vars) - 1);

    std::set<Cube> current;
    for (auto m : on) current.insert({full, m});
    for (auto m : dont_care) current.insert({full, m});

    std::set<Cube> primes;
    while (!current.empty()) {
        std::set<Cube> next;
        std::set<Cube> merged;
        for (auto i = current.begin(); i != current.end(); ++i)
            for (auto j = std::next(i); j != current.end(); ++j) {
                if (i->first != j->first) continue;
                const std::uint32_t diff = i->second ^ j->second;
                if (std::popcount(diff) != 1) continue;
                next.insert({i->first & ~diff, i->second & ~diff});
                merged.insert(*i);
                merged.insert(*j);
            }
        for (const auto& c : current)
            if (!merged.count(c)) primes.insert(c);
        current = std::move(next);
    }

    auto covers = [](const Cube& c, std::uint32_t m) { return (m & c.first) == c.second; };
    std::vector<Cube> useful;
    for (const auto& c : primes)
        if (std::any_of(on.begin(), on.end(), [&](std::uint32_t m) { return covers(c, m); })) useful.push_back(c);
    std::sort(useful.begin(), useful.end(), [](const Cube& a, const Cube& b) {
        const int la = std::popcount(a.first), lb = std::popcount(b.first);
        return la != lb ? la < lb : a < b;
    });

    auto covered_by = [&](const std::vector<std::size_t>& pick) {
        return std::all_of(on.begin(), on.end(), [&](std::uint32_t m) {
            return std::any_of(pick.begin(), pick.end(), [&](std::size_t k) { return covers(useful[k], m); });
        });
    };

    // exact search by increasing cover size; fewest literals wins ties
    if (useful.size() <= 20) {
        for (std::size_t k = 1; k <= useful.size(); ++k) {
            std::vector<std::size_t> pick(k), best;
            int best_lits = 1 << 30;
            std::function<void(std::size_t, std::size_t)> go = [&](std::size_t depth, std::size_t from) {
                if (depth == k) {
                    if (!covered_by(pick)) return;
                    int lits = 0;
                    for (auto i : pick) lits += std::popcount(useful[i].first);
                    if (lits < best_lits) {
                        best_lits = lits;
                        best = pick;
                    }
                    return;
                }
                for (std::size_t i = from; i < useful.size(); ++i) {
                    pick[depth] = i;
                    go(depth + 1, i + 1);
                }
            };
            go(0, 0);
            if (!best.empty()) {
                std::vector<Cube> out;
                for (auto i : best) out.push_back(useful[i]);
                return out;
            }
        }
    }

    std::vector<Cube> out;
    std::vector<std::uint32_t> left = on;
    while (!left.empty()) {
        std::size_t best = 0, best_n = 0;
        for (std::size_t i = 0; i < useful.size(); ++i) {
            const auto n = static_cast<std::size_t>(
                std::count_if(left.begin(), left.end(), [&](std::uint32_t m) { return covers(useful[i], m); }));
            if (n > best_n) {
                best_n = n;
                best = i;
            }
        }
        out.push_back(useful[best]);
        std::erase_if(left, [&](std::uint32_t m) { return covers(useful[best], m); });
    }
    return out;
}

namespace {

constexpr long kGoal = -1;
constexpr long kDead = -2;

} // namespace

Fsa translate_cosafe_to_fsa(const ltl::Formula& f, const PropositionPartition& p, const TranslateOptions& opts) {
    const ltl::Formula start = ltl::to_nnf(f);

    Fsa fsa;
    if (start.is_true()) {
        fsa.states = {"goal"};
        fsa.reward = {1.0};
        fsa.initial_states = {0};
        fsa.goal_states = {0};
        return fsa;
    }

    const auto used = ltl::propositions(start);
    std::vector<int> subgoals;
    std::vector<int> events;
    for (const auto& name : used) {
        if (p.subgoal_index(name) < 0 && p.event_index(name) < 0)
            throw Error("proposition '" + name + "' is not a subgoal or event");
    }
    for (std::size_t i = 0; i < p.subgoals.size(); ++i)
        if (used.count(p.subgoals[i])) subgoals.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < p.events.size(); ++i)
        if (used.count(p.events[i])) events.push_back(static_cast<int>(i));

    // letters over the relevant propositions, and their guard-variable codes
    const std::size_t ns = subgoals.size();
    const std::size_t n_vars = ns + events.size();
    std::vector<Letter> letters;
    std::vector<std::uint32_t> codes;
    for (int sg = -1; sg < static_cast<int>(ns); ++sg)
        for (std::uint32_t em = 0; em < (1u << events.size()); ++em) {
            Letter l{sg < 0 ? -1 : subgoals[static_cast<std::size_t>(sg)], 0};
            std::uint32_t code = sg < 0 ? 0u : (1u << sg);
            for (std::size_t k = 0; k < events.size(); ++k)
                if ((em >> k) & 1u) {
                    l.events |= 1u << events[k];
                    code |= 1u << (ns + k);
                }
            letters.push_back(l);
            codes.push_back(code);
        }

    auto valuation = [&](Letter l) {
        return [&p, l](const std::string& name) {
            if (l.subgoal >= 0 && p.subgoals[static_cast<std::size_t>(l.subgoal)] == name) return true;
            const int e = p.event_index(name);
            return e >= 0 && ((l.events >> e) & 1u);
        };
    };

    // breadth-first exploration of residuals
    std::vector<ltl::Formula> residual{start};
    std::unordered_map<std::string, long> index{{start.str(), 0}};
    std::vector<std::vector<long>> succ;
    for (std::size_t i = 0; i < residual.size(); ++i) {
        std::vector<long> row;
        row.reserve(letters.size());
        for (const auto& l : letters) {
            const ltl::Formula r = ltl::progress(residual[i], valuation(l));
            if (ltl::accepts_empty(r)) {
                row.push_back(kGoal);
            } else if (r.is_false()) {
                row.push_back(kDead);
            } else {
                auto [it, fresh] = index.try_emplace(r.str(), static_cast<long>(residual.size()));
                if (fresh) {
                    if (residual.size() >= opts.state_cap)
                        throw StateExplosion("translation exceeded " + std::to_string(opts.state_cap) + " states");
                    residual.push_back(r);
                }
                row.push_back(it->second);
            }
        }
        succ.push_back(std::move(row));
    }

    // dense indices: residuals, then goal, then dead
    const std::size_t n = residual.size();
    const std::size_t goal = n, dead = n + 1, total = n + 2;
    auto idx = [&](long code) -> std::size_t {
        return code == kGoal ? goal : code == kDead ? dead : static_cast<std::size_t>(code);
    };
    std::vector<std::vector<std::size_t>> delta(total, std::vector<std::size_t>(letters.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < letters.size(); ++l) delta[i][l] = idx(succ[i][l]);
    for (std::size_t l = 0; l < letters.size(); ++l) {
        delta[goal][l] = goal;
        delta[dead][l] = dead;
    }

    // residuals that can never reach the goal are dead
    std::vector<char> live(total, 0);
    live[goal] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i)
            if (!live[i] && std::any_of(delta[i].begin(), delta[i].end(), [&](std::size_t t) { return live[t]; })) {
                live[i] = 1;
                changed = true;
            }
    }
    if (!live[0]) throw Error("formula cannot be satisfied: " + f.str());
    for (auto& row : delta)
        for (auto& t : row)
            if (!live[t]) t = dead;

    // Moore refinement
    std::vector<std::size_t> cls(total, 2);
    cls[goal] = 0;
    cls[dead] = 1;
    std::size_t n_classes = 0;
    for (;;) {
        std::map<std::vector<std::size_t>, std::size_t> ids;
        std::vector<std::size_t> next(total);
        for (std::size_t i = 0; i < total; ++i) {
            std::vector<std::size_t> sig{cls[i]};
            for (auto t : delta[i]) sig.push_back(cls[t]);
            next[i] = ids.try_emplace(std::move(sig), ids.size()).first->second;
        }
        cls = std::move(next);
        if (ids.size() == n_classes) break;
        n_classes = ids.size();
    }

    // name classes in breadth-first order from the initial residual
    std::vector<long> order(n_classes, -1);
    std::vector<std::size_t> rep(n_classes, 0);
    for (std::size_t i = total; i-- > 0;) rep[cls[i]] = i;
    std::vector<std::size_t> bfs{cls[0]};
    order[cls[0]] = 0;
    for (std::size_t k = 0; k < bfs.size(); ++k)
        for (auto t : delta[rep[bfs[k]]]) {
            const auto c = cls[t];
            if (order[c] >= 0 || c == cls[dead] || c == cls[goal]) continue;
            order[c] = static_cast<long>(bfs.size());
            bfs.push_back(c);
        }
    const std::size_t goal_id = bfs.size();
    order[cls[goal]] = static_cast<long>(goal_id);

    fsa.states.push_back("init");
    for (std::size_t k = 1; k < bfs.size(); ++k) fsa.states.push_back("s" + std::to_string(k));
    fsa.states.push_back("goal");
    fsa.reward.assign(fsa.states.size(), 1.0);
    fsa.initial_states = {0};
    fsa.goal_states = {goal_id};

    std::vector<std::uint32_t> dont_care;
    for (std::uint32_t a = 0; a < (1u << n_vars); ++a)
        if (std::popcount(a & ((1u << ns) - 1)) > 1) dont_care.push_back(a);

    std::vector<std::string> var_names;
    for (auto s : subgoals) var_names.push_back(p.subgoals[static_cast<std::size_t>(s)]);
    for (auto e : events) var_names.push_back(p.events[static_cast<std::size_t>(e)]);

    for (std::size_t k = 0; k < bfs.size(); ++k) {
        const auto& row = delta[rep[bfs[k]]];
        std::map<std::size_t, std::vector<std::uint32_t>> by_target;
        for (std::size_t l = 0; l < letters.size(); ++l) {
            const auto c = cls[row[l]];
            if (c == cls[dead] || c == bfs[k]) continue;
            by_target[static_cast<std::size_t>(order[c])].push_back(codes[l]);
        }
        for (const auto& [target, on] : by_target) {
            std::vector<ltl::Formula> terms;
            for (const auto& [care, value] : minimize_cover(n_vars, on, dont_care)) {
                std::vector<ltl::Formula> lits;
                for (std::size_t v = 0; v < n_vars; ++v) {
                    if (!((care >> v) & 1u)) continue;
                    auto atom = ltl::Formula::prop(var_names[v]);
                    lits.push_back(((value >> v) & 1u) ? atom : ltl::Formula::negation(atom));
                }
                terms.push_back(ltl::simplify_and(std::move(lits)));
            }
            fsa.edges.push_back({k, target, ltl::simplify_or(std::move(terms))});
        }
    }
    return fsa;
}

Fsa compile_task(const std::string& text, const PropositionPartition& p, const TranslateOptions& opts) {
    const auto formula = ltl::parse_ltl(text, p.all());
    const std::set<std::string> safety(p.safety.begin(), p.safety.end());
    const std::set<std::string> events(p.events.begin(), p.events.end());
    const auto split = ltl::split_spec(formula, safety, events);
    return translate_cosafe_to_fsa(split.liveness, p, opts);
}

} // namespace lof
