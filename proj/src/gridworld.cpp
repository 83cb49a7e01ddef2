#include "lof/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef LOF_DATA_DIR
#define LOF_DATA_DIR "."
#endif

namespace lof {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, double>> parse_pairs(const std::string& text, const std::string& what) {
    std::vector<std::pair<std::string, double>> out;
    std::string body = text;
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream in(body);
    std::string item;
    while (in >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw Error("bad " + what + " entry '" + item + "'");
        double v = 0;
        try {
            std::size_t used = 0;
            v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("bad number in " + what + " entry '" + item + "'");
        }
        out.emplace_back(item.substr(0, eq), v);
    }
    return out;
}

} // namespace

GridMap load_map(const std::string& text) {
    GridMap m;
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.rfind("events:", 0) == 0) {
            for (const auto& [name, p] : parse_pairs(t.substr(7), "events")) {
                if (!(p >= 0.0 && p <= 1.0)) throw Error("event probability for '" + name + "' outside [0,1]");
                m.event_probs[name] = p;
            }
            continue;
        }
        if (t.rfind("costs:", 0) == 0) {
            for (const auto& [name, c] : parse_pairs(t.substr(6), "costs")) {
                if (name == "step") {
                    if (!(c < 0.0) || !std::isfinite(c)) throw Error("step reward must be negative and finite");
                    m.step_reward = c;
                } else {
                    if (!(c <= 0.0) || !std::isfinite(c)) throw Error("safety cost for '" + name + "' must be <= 0");
                    m.safety_costs[name] = c;
                }
            }
            continue;
        }
        rows.push_back(t);
    }
    if (rows.empty()) throw Error("map has no grid rows");

    m.height = static_cast<int>(rows.size());
    m.width = static_cast<int>(rows.front().size());
    for (std::size_t y = 0; y < rows.size(); ++y)
        if (static_cast<int>(rows[y].size()) != m.width)
            throw Error("ragged map: row " + std::to_string(y) + " has " + std::to_string(rows[y].size()) +
                        " cells, expected " + std::to_string(m.width));

    m.cells.assign(static_cast<std::size_t>(m.width * m.height), Cell::Empty);
    m.glyph.assign(m.cells.size(), 0);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            const char c = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            const int s = m.cell(x, y);
            auto& cell = m.cells[static_cast<std::size_t>(s)];
            if (c == '.') continue;
            if (c == '#') {
                cell = Cell::Wall;
            } else if (c == 'o') {
                cell = Cell::Penalty;
            } else if (c == '@') {
                if (m.start) throw Error("map has more than one '@' start");
                m.start = s;
            } else if (c >= 'a' && c <= 'z' && c != 'e') {
                const std::string name(1, c);
                if (m.subgoal_cells.count(name)) throw Error("duplicate subgoal '" + name + "'");
                m.subgoal_cells[name] = s;
                cell = Cell::Subgoal;
                m.glyph[static_cast<std::size_t>(s)] = c;
            } else {
                throw Error(std::string("unknown map character '") + c + "' at (" + std::to_string(x) + "," +
                            std::to_string(y) + ")");
            }
        }
    return m;
}

GridMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open map file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_map(ss.str());
}

EnvironmentMdp::EnvironmentMdp(GridMap map, PropositionPartition partition, double gamma)
    : map_(std::move(map)), partition_(std::move(partition)), gamma_(gamma) {
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw Error("gamma must lie in (0, 1]");
    if (!partition_.overlaps().empty()) throw Error("proposition partition lists overlap");
    const std::size_t n = map_.size();
    next_.resize(n * kActions);
    subgoal_.assign(n, -1);
    safety_.assign(n, 0);
    cell_cost_.assign(n, 0.0);

    static constexpr std::array<int, kActions> dx{0, 0, -1, 1, 0};
    static constexpr std::array<int, kActions> dy{-1, 1, 0, 0, 0};
    const int pen = partition_.safety_index("o");
    const int emp = partition_.safety_index("e");
    for (int s = 0; s < static_cast<int>(n); ++s) {
        const int x = map_.x_of(s), y = map_.y_of(s);
        for (int a = 0; a < kActions; ++a) {
            const int nx = x + dx[static_cast<std::size_t>(a)], ny = y + dy[static_cast<std::size_t>(a)];
            int t = s;
            if (nx >= 0 && ny >= 0 && nx < map_.width && ny < map_.height && map_.free(map_.cell(nx, ny)))
                t = map_.cell(nx, ny);
            next_[static_cast<std::size_t>(s) * kActions + static_cast<std::size_t>(a)] = t;
        }
        const auto c = map_.cells[static_cast<std::size_t>(s)];
        if (c == Cell::Wall) continue;
        free_cells_.push_back(s);
        if (c == Cell::Subgoal) {
            const std::string name(1, map_.glyph[static_cast<std::size_t>(s)]);
            const int i = partition_.subgoal_index(name);
            if (i < 0) throw Error("map subgoal '" + name + "' is not in the partition");
            subgoal_[static_cast<std::size_t>(s)] = i;
        } else {
            start_cells_.push_back(s);
        }
        const bool penalty = c == Cell::Penalty;
        if (penalty && pen < 0) throw Error("map has penalty cells but no 'o' safety proposition");
        if (penalty) safety_[static_cast<std::size_t>(s)] = 1u << pen;
        else if (emp >= 0) safety_[static_cast<std::size_t>(s)] = 1u << emp;
        for (std::size_t k = 0; k < partition_.safety.size(); ++k)
            if ((safety_[static_cast<std::size_t>(s)] >> k) & 1u) {
                const auto it = map_.safety_costs.find(partition_.safety[k]);
                if (it != map_.safety_costs.end()) cell_cost_[static_cast<std::size_t>(s)] += it->second;
            }
    }
    if (start_cells_.empty()) throw Error("map has no free non-subgoal cell");

    for (const auto& e : partition_.events) {
        const auto it = map_.event_probs.find(e);
        event_p_.push_back(it == map_.event_probs.end() ? 0.0 : it->second);
    }
    for (const auto& [name, p] : map_.event_probs)
        if (partition_.event_index(name) < 0) throw Error("map event '" + name + "' is not in the partition");
}

int EnvironmentMdp::step(int s, int a, Rng& rng) const {
    if (slip_ > 0.0 && uniform_unit(rng) < slip_) a = static_cast<int>(uniform_index(rng, kActions));
    return step(s, a);
}

std::pair<std::vector<std::string>, std::vector<std::string>> EnvironmentMdp::label(int s) const {
    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    if (subgoal_at(s) >= 0) out.first.push_back(partition_.subgoals[static_cast<std::size_t>(subgoal_at(s))]);
    for (std::size_t k = 0; k < partition_.safety.size(); ++k)
        if ((safety_mask(s) >> k) & 1u) out.second.push_back(partition_.safety[k]);
    return out;
}

int EnvironmentMdp::subgoal_cell(int subgoal) const {
    if (subgoal < 0 || subgoal >= static_cast<int>(partition_.subgoals.size())) return -1;
    const auto it = map_.subgoal_cells.find(partition_.subgoals[static_cast<std::size_t>(subgoal)]);
    return it == map_.subgoal_cells.end() ? -1 : it->second;
}

int EnvironmentMdp::default_start() const { return map_.start ? *map_.start : start_cells_.front(); }

std::uint32_t EnvironmentMdp::sample_events(Rng& rng) const {
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < event_p_.size(); ++k)
        if (uniform_unit(rng) < event_p_[k]) mask |= 1u << k;
    return mask;
}

double EnvironmentMdp::event_probability(std::uint32_t mask) const {
    double p = 1.0;
    for (std::size_t k = 0; k < event_p_.size(); ++k) p *= ((mask >> k) & 1u) ? event_p_[k] : 1.0 - event_p_[k];
    return p;
}

double EnvironmentMdp::min_reward() const {
    double worst = 0.0;
    for (const auto& [name, c] : map_.safety_costs) worst += std::min(0.0, c);
    return map_.step_reward + worst;
}

PropositionPartition partition_for(const GridMap& map) {
    PropositionPartition p;
    for (const auto& [name, cell] : map.subgoal_cells) p.subgoals.push_back(name);
    p.safety = {"o", "e"};
    for (const auto& [name, prob] : map.event_probs) p.events.push_back(name);
    return p;
}

std::uint32_t parse_event_mask(const std::string& text, const PropositionPartition& p) {
    std::uint32_t mask = 0;
    for (const auto& [name, v] : parse_pairs(text, "event assignment")) {
        const int i = p.event_index(name);
        if (i < 0) throw Error("unknown event '" + name + "'");
        if (v != 0.0 && v != 1.0) throw Error("event assignment for '" + name + "' must be 0 or 1");
        if (v == 1.0) mask |= 1u << i;
    }
    return mask;
}

std::string format_event_mask(std::uint32_t mask, const PropositionPartition& p) {
    std::string out;
    for (std::size_t k = 0; k < p.events.size(); ++k) {
        if (!out.empty()) out += ",";
        out += p.events[k] + "=" + (((mask >> k) & 1u) ? "1" : "0");
    }
    return out;
}

std::string data_path(const std::string& relative) { return std::string(LOF_DATA_DIR) + "/" + relative; }

} // namespace lof
