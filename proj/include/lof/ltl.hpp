#pragma once

#include "lof/error.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lof::ltl {

enum class Op : std::uint8_t { True, False, Prop, Not, And, Or, Next, Until, Eventually, Always };

/// Immutable LTL syntax tree. Nodes are shared; copies are cheap.
///
/// And/Or are n-ary (two or more children). Every node carries its printed
/// form, which doubles as the canonical ordering key.
class Formula {
public:
    Formula(); // true

    static Formula top();
    static Formula bottom();
    static Formula prop(std::string name);
    static Formula negation(Formula child);
    static Formula conjunction(std::vector<Formula> children);
    static Formula disjunction(std::vector<Formula> children);
    static Formula next(Formula child);
    static Formula until(Formula lhs, Formula rhs);
    static Formula eventually(Formula child);
    static Formula always(Formula child);

    Op op() const { return node_->op; }
    const std::string& name() const { return node_->name; }
    const std::vector<Formula>& children() const { return node_->children; }
    const Formula& child(std::size_t i) const { return node_->children.at(i); }

    /// Fully parenthesized ASCII rendering; reparses to the same tree.
    const std::string& str() const { return node_->text; }

    bool is_true() const { return op() == Op::True; }
    bool is_false() const { return op() == Op::False; }
    bool is_temporal() const;
    bool is_literal() const;

    friend bool operator==(const Formula& a, const Formula& b) {
        return a.node_ == b.node_ || a.node_->text == b.node_->text;
    }
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
    friend bool operator<(const Formula& a, const Formula& b) { return a.node_->text < b.node_->text; }

private:
    struct Node {
        Op op;
        std::string name;
        std::vector<Formula> children;
        std::string text;
    };
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Formula make(Op op, std::string name, std::vector<Formula> children);

    std::shared_ptr<const Node> node_;
};

std::string to_string(const Formula& f);

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UndeclaredProposition : public Error {
public:
    explicit UndeclaredProposition(std::string name);
    const std::string& proposition() const { return name_; }

private:
    std::string name_;
};

/// Parses ASCII syntax (`! & | -> <-> X U F G`, `true`, `false`) with the
/// Unicode aliases `¬ ∧ ∨ → ↔ ◯ ◇ □ ⊤ ⊥`. Precedence from tightest:
/// negation, the unary temporal operators, `&`, `|`, `U`, then `->`/`<->`.
/// `U` and `->` associate to the right. Implications are desugared.
Formula parse_ltl(std::string_view text, const std::set<std::string>& declared);

/// Result of the co-safety check. `path` lists child indices from the root
/// to the first offending node.
struct CosafeReport {
    bool cosafe = true;
    std::vector<std::size_t> path;
    std::string reason;
};

/// Syntactic co-safety: no Always in positive polarity, no temporal
/// operator under an odd number of negations.
CosafeReport check_cosafe(const Formula& f);

/// Like check_cosafe, but additionally admits `G phi` in positive polarity
/// when `phi` is purely propositional over `invariant_props` (event
/// propositions, which are frozen for the length of an episode).
CosafeReport check_translatable(const Formula& f, const std::set<std::string>& invariant_props);

struct SpecSplit {
    Formula liveness;
    std::vector<std::string> safety; ///< propositions p with a `G !p` conjunct
};

/// Splits a top-level conjunction into the liveness conjuncts and the
/// `G !p` conjuncts over `safety_props`. Liveness conjuncts must pass
/// check_translatable against `invariant_props`.
SpecSplit split_spec(const Formula& f, const std::set<std::string>& safety_props,
                     const std::set<std::string>& invariant_props = {});

/// Rebuilds `liveness & G !p1 & ...` from a split.
Formula reassemble(const SpecSplit& split);

/// Simplifying constructors used by progression: flatten, fold constants,
/// remove duplicates and complementary literals, apply absorption, and sort
/// children by printed form so equal residuals compare equal.
Formula simplify_and(std::vector<Formula> children);
Formula simplify_or(std::vector<Formula> children);
Formula simplify_not(Formula child);

/// Negation normal form. Throws Error for negated Next/Until, which have no
/// dual in this node set.
Formula to_nnf(const Formula& f);

/// Collects every proposition name.
std::set<std::string> propositions(const Formula& f);

using Valuation = std::function<bool(const std::string&)>;

/// One-step formula progression under a proposition assignment.
Formula progress(const Formula& f, const Valuation& truth);
Formula progress(const Formula& f, const std::set<std::string>& true_props);

/// True when the residual holds on a trace that ends now (finite-trace
/// reading: F/U/X need more steps, G is vacuous).
bool accepts_empty(const Formula& residual);

/// Boolean evaluation; throws Error on temporal operators.
bool eval_propositional(const Formula& f, const Valuation& truth);

/// Nesting depth (a proposition has depth 1).
std::size_t depth(const Formula& f);

} // namespace lof::ltl
