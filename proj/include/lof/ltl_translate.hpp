#pragma once

#include "lof/automata.hpp"
#include "lof/ltl.hpp"

#include <cstddef>
#include <string>

namespace lof {

class StateExplosion : public Error {
public:
    using Error::Error;
};

struct TranslateOptions {
    std::size_t state_cap = 10000;
};

/// Builds a deterministic automaton for a co-safe (or translatable)
/// liveness formula by progression over the legal letters. Residuals that
/// accept the empty trace collapse into the goal, residuals that cannot
/// reach the goal are dropped, and equivalent residuals are merged.
/// States are named init, s1, s2, ... in breadth-first order, then goal.
Fsa translate_cosafe_to_fsa(const ltl::Formula& f, const PropositionPartition& p,
                            const TranslateOptions& opts = {});

/// Parses a task formula, splits off its `G !p` safety conjuncts, and
/// translates the liveness part.
Fsa compile_task(const std::string& text, const PropositionPartition& p, const TranslateOptions& opts = {});

/// Minimal sum-of-products cover of `on` (bit vectors over `n_vars`
/// variables); `dont_care` entries may be covered freely. Each returned
/// cube is (care mask, value).
std::vector<std::pair<std::uint32_t, std::uint32_t>> minimize_cover(std::size_t n_vars,
                                                                    const std::vector<std::uint32_t>& on,
                                                                    const std::vector<std::uint32_t>& dont_care);

} // namespace lof
