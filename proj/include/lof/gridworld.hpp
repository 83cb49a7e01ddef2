#pragma once

#include "lof/automata.hpp"
#include "lof/error.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lof {

enum class Cell : std::uint8_t { Empty, Wall, Penalty, Subgoal };

/// Parsed map. Cells are indexed row-major: s = y * width + x.
struct GridMap {
    int width = 0;
    int height = 0;
    std::vector<Cell> cells;
    std::vector<char> glyph;                 ///< subgoal letter per cell, 0 elsewhere
    std::map<std::string, int> subgoal_cells;
    std::optional<int> start;                ///< '@' marker, if present

    std::map<std::string, double> event_probs; ///< from the `events:` header
    double step_reward = -1.0;
    std::map<std::string, double> safety_costs{{"o", -1000.0}};

    std::size_t size() const { return cells.size(); }
    int cell(int x, int y) const { return y * width + x; }
    int x_of(int s) const { return s % width; }
    int y_of(int s) const { return s / width; }
    bool free(int s) const { return cells[static_cast<std::size_t>(s)] != Cell::Wall; }
};

GridMap load_map(const std::string& text);
GridMap load_map_file(const std::string& path);

enum class Action : std::uint8_t { Up, Down, Left, Right, Stay };
inline constexpr int kActions = 5;

/// Deterministic gridworld with proposition labels.
class EnvironmentMdp {
public:
    EnvironmentMdp(GridMap map, PropositionPartition partition, double gamma = 1.0);

    const GridMap& map() const { return map_; }
    const PropositionPartition& partition() const { return partition_; }
    double gamma() const { return gamma_; }
    std::size_t size() const { return map_.size(); }

    int step(int s, int a) const { return next_[static_cast<std::size_t>(s) * kActions + static_cast<std::size_t>(a)]; }
    /// Sampled successor; identical to step() unless a slip probability is set.
    int step(int s, int a, Rng& rng) const;
    void set_slip(double p) { slip_ = p; }

    /// r_step plus the safety costs of the cell entered.
    double reward(int s, int a) const { return map_.step_reward + cell_cost_[static_cast<std::size_t>(step(s, a))]; }
    double step_reward() const { return map_.step_reward; }
    /// Safety cost of occupying `s` (sum over its safety labels).
    double cell_cost(int s) const { return cell_cost_[static_cast<std::size_t>(s)]; }

    /// Index into partition().subgoals, or -1.
    int subgoal_at(int s) const { return subgoal_[static_cast<std::size_t>(s)]; }
    /// Bit mask over partition().safety.
    std::uint32_t safety_mask(int s) const { return safety_[static_cast<std::size_t>(s)]; }
    std::pair<std::vector<std::string>, std::vector<std::string>> label(int s) const;

    const std::vector<int>& free_cells() const { return free_cells_; }
    /// Free cells that carry no subgoal; training and QRM episodes start here.
    const std::vector<int>& start_cells() const { return start_cells_; }
    int subgoal_cell(int subgoal) const;

    /// Start used by evaluation rollouts: the '@' marker, else the first free
    /// non-subgoal cell.
    int default_start() const;

    /// Independent Bernoulli draw per event; returns a bit mask over
    /// partition().events.
    std::uint32_t sample_events(Rng& rng) const;
    /// Probability of `mask` under the map's event distribution.
    double event_probability(std::uint32_t mask) const;
    std::uint32_t event_count() const { return static_cast<std::uint32_t>(partition_.events.size()); }

    /// Smallest and largest one-step reward.
    double min_reward() const;

private:
    GridMap map_;
    PropositionPartition partition_;
    double gamma_;
    double slip_ = 0.0;
    std::vector<int> next_;
    std::vector<int> subgoal_;
    std::vector<std::uint32_t> safety_;
    std::vector<double> cell_cost_;
    std::vector<int> free_cells_;
    std::vector<int> start_cells_;
    std::vector<double> event_p_;
};

/// Partition implied by a map: its subgoal letters, safety {o, e}, and the
/// events named in its header.
PropositionPartition partition_for(const GridMap& map);

/// Parses `can=0,b=1` style assignments into a mask over `p.events`.
std::uint32_t parse_event_mask(const std::string& text, const PropositionPartition& p);
std::string format_event_mask(std::uint32_t mask, const PropositionPartition& p);

/// Path to a file shipped in the source tree.
std::string data_path(const std::string& relative);

} // namespace lof
