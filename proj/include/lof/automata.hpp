#pragma once

#include "lof/ltl.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lof {

/// Subgoal, safety and event propositions. Order is significant: indices
/// into these lists are used for labels, letters and bit masks.
struct PropositionPartition {
    std::vector<std::string> subgoals;
    std::vector<std::string> safety;
    std::vector<std::string> events;

    int subgoal_index(const std::string& name) const;
    int safety_index(const std::string& name) const;
    int event_index(const std::string& name) const;

    std::set<std::string> all() const;
    std::set<std::string> liveness_props() const; ///< subgoals and events
    std::set<std::string> safety_props() const;   ///< safety and events

    /// Empty when the three lists are pairwise disjoint and duplicate-free.
    std::vector<std::string> overlaps() const;

    /// Number of legal liveness letters: at most one subgoal true, any events.
    std::size_t letter_count() const { return (subgoals.size() + 1) << events.size(); }
};

/// One step's liveness observation: the (single) true subgoal, or -1, and
/// the event bit mask.
struct Letter {
    int subgoal = -1;
    std::uint32_t events = 0;
};

std::size_t letter_index(const PropositionPartition& p, Letter l);
Letter letter_at(const PropositionPartition& p, std::size_t index);

using Guard = ltl::Formula;

bool eval_guard(const Guard& g, const PropositionPartition& p, Letter l);
bool eval_guard(const Guard& g, const std::set<std::string>& subgoals_true,
                const std::map<std::string, bool>& events);

struct FsaEdge {
    std::size_t from;
    std::size_t to;
    Guard guard;
};

/// Liveness automaton. Valid automata have exactly one initial and one
/// goal state; the vectors exist so malformed inputs can be represented and
/// reported by validate_fsa.
struct Fsa {
    std::vector<std::string> states;
    std::vector<FsaEdge> edges;
    std::vector<double> reward;
    std::vector<std::size_t> initial_states;
    std::vector<std::size_t> goal_states;

    std::size_t size() const { return states.size(); }
    std::size_t initial() const;
    std::size_t goal() const;
    std::size_t index_of(const std::string& name) const;
    bool is_goal(std::size_t f) const;

    /// Drops every edge leaving a goal state.
    void make_goal_absorbing();
};

class NondeterminismError : public Error {
public:
    using Error::Error;
};

/// Unique successor of `f` under `l`; stays in `f` when no explicit edge
/// fires. Goal states are absorbing.
std::size_t fsa_step(const Fsa& fsa, const PropositionPartition& p, std::size_t f, Letter l);
std::size_t fsa_step(const Fsa& fsa, std::size_t f, const std::set<std::string>& subgoals_true,
                     const std::map<std::string, bool>& events);

struct Violation {
    enum class Kind { Structure, InitialCount, GoalCount, UnknownProposition, Nondeterminism, GoalUnreachable, Reward };
    Kind kind;
    std::string message;
};

std::vector<Violation> validate_fsa(const Fsa& fsa, const PropositionPartition& p);

/// Dense successor table over (state, letter); built once per automaton.
class TransitionTable {
public:
    TransitionTable() = default;
    TransitionTable(const Fsa& fsa, const PropositionPartition& p);

    std::size_t next(std::size_t f, Letter l) const {
        return table_[f * letters_ + (static_cast<std::size_t>(l.subgoal + 1) << n_events_) + l.events];
    }
    std::size_t states() const { return states_; }
    std::size_t letters() const { return letters_; }

private:
    std::size_t states_ = 0;
    std::size_t letters_ = 0;
    std::size_t n_events_ = 0;
    std::vector<std::uint32_t> table_;
};

/// True when both automata accept the same letters through corresponding
/// states (deterministic automata, so a synchronized walk suffices). On
/// mismatch `why` explains the first difference.
bool fsa_isomorphic(const Fsa& a, const Fsa& b, const PropositionPartition& p, std::string* why = nullptr);

nlohmann::json fsa_to_json(const Fsa& fsa);
/// Guards are parsed against `props`.
Fsa fsa_from_json(const nlohmann::json& j, const std::set<std::string>& props);

// ---------------------------------------------------------------------------

struct SafetyCost {
    std::size_t state;
    std::vector<std::string> props;
    double cost;
};

/// Safety property with costs. Every state is accepting; a step with no
/// matching edge is a violation and moves to a violation sink (added on
/// demand by finalize) while charging `violation_cost`.
class SafetyAutomaton {
public:
    std::vector<std::string> states;
    std::vector<FsaEdge> edges; ///< guards over safety and event propositions
    std::vector<SafetyCost> costs;
    std::vector<std::size_t> initial_states;
    double violation_cost = -1000.0;

    /// One state, a self-loop on everything, and one cost per proposition.
    static SafetyAutomaton trivial(const std::map<std::string, double>& prop_costs);

    /// Compiles the step and cost tables. Must be called before use.
    void finalize(const PropositionPartition& p);

    struct Step {
        std::size_t next;
        bool violated;
    };
    Step step(std::size_t fs, std::uint32_t safety_mask, std::uint32_t events) const {
        const std::uint32_t code = table_[(fs << safety_bits_ << event_bits_) | (safety_mask << event_bits_) | events];
        return {code & 0x7fffffffu, (code & 0x80000000u) != 0};
    }
    /// R_S(fs, labels).
    double cost(std::size_t fs, std::uint32_t safety_mask) const {
        return cost_table_[(fs << safety_bits_) | safety_mask];
    }
    std::size_t size() const { return n_states_; }
    bool finalized() const { return n_states_ > 0; }
    std::optional<std::size_t> sink() const { return sink_; }

private:
    std::size_t n_states_ = 0;
    std::size_t safety_bits_ = 0;
    std::size_t event_bits_ = 0;
    std::optional<std::size_t> sink_;
    std::vector<std::uint32_t> table_;
    std::vector<double> cost_table_;
};

nlohmann::json safety_to_json(const SafetyAutomaton& a);
SafetyAutomaton safety_from_json(const nlohmann::json& j, const std::set<std::string>& props);

// ---------------------------------------------------------------------------

/// Delivery-domain partition: subgoals a b c h, safety o e, event can.
PropositionPartition delivery_partition();

/// Liveness-plus-safety formulas of the four delivery tasks, keyed by name
/// (sequential, if, or, composite).
const std::map<std::string, std::string>& task_formulas();

/// Hand-transcribed automata for the four tasks, R_F = 1 everywhere.
std::map<std::string, Fsa> hand_coded_task_fsas();

} // namespace lof
