#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/term.hpp"

namespace hitt {

enum class MatchResult { Matched, Failed, Blocked };

/// Reduction hooks the matcher needs. `whnf` reports a meta at the head through `blocked`.
struct MatchHooks {
  virtual ~MatchHooks() = default;
  virtual Term whnf(const Term& t, bool* blocked) = 0;
  virtual bool conv(const Term& t, const Term& u) = 0;
};

namespace detail {

inline MatchResult match_pattern(const Pattern& p, const Term& t, std::vector<Term>& subst, MatchHooks& hooks,
                                 Term* normalized = nullptr) {
  switch (p.kind) {
  case Pattern::Kind::Wild:
    return MatchResult::Matched;
  case Pattern::Kind::Var:
    subst.at(p.var) = t;
    return MatchResult::Matched;
  case Pattern::Kind::Closed:
    return hooks.conv(p.closed, t) ? MatchResult::Matched : MatchResult::Failed;
  case Pattern::Kind::Rigid: {
    bool blocked = false;
    Term w = hooks.whnf(t, &blocked);
    if (normalized) *normalized = w;
    std::vector<Arg> args;
    Term head = unwind(w, args);
    if (!head.is(Kind::Const)) return blocked ? MatchResult::Blocked : MatchResult::Failed;
    if (head->name != p.head || args.size() != p.args.size()) return blocked ? MatchResult::Blocked : MatchResult::Failed;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i].implicit != p.args[i].implicit) return MatchResult::Failed;
      auto r = match_pattern(p.args[i].pattern, args[i].term, subst, hooks);
      if (r != MatchResult::Matched) return r;
    }
    return MatchResult::Matched;
  }
  }
  return MatchResult::Failed;
}

} // namespace detail

/// Matches a rule's pattern spine against the first `rule.arity()` arguments.
/// Arguments inspected by rigid patterns are replaced by their weak-head forms.
inline MatchResult match(const RewriteRule& rule, std::span<Arg> spine, std::vector<Term>& subst, MatchHooks& hooks) {
  if (spine.size() < rule.arity()) return MatchResult::Failed;
  subst.assign(rule.telescope.size(), Term());
  for (std::size_t i = 0; i < rule.arity(); ++i) {
    const auto& pa = rule.spine[i];
    if (pa.implicit != spine[i].implicit) return MatchResult::Failed;
    Term normalized;
    auto r = detail::match_pattern(pa.pattern, spine[i].term, subst, hooks, &normalized);
    if (normalized) spine[i].term = normalized;
    if (r != MatchResult::Matched) return r;
  }
  return MatchResult::Matched;
}

/// Instantiates a rule replacement with a substitution indexed by rule variable.
inline Term instantiate_rule(const RewriteRule& rule, const std::vector<Term>& subst) {
  const std::size_t k = subst.size();
  std::vector<Term> vals(k);
  for (std::size_t i = 0; i < k; ++i) {
    vals[i] = subst[k - 1 - i];
    if (!vals[i]) throw Error(ErrorKind::IllTypedRule, "rule " + rule.name.str() + " leaves a variable unbound");
  }
  return instantiate(rule.replacement, vals);
}

struct RewriteStep {
  Term result;
  const RewriteRule* rule = nullptr;
};

/// Tries the rules of the head constant in registration order; first match wins.
/// A rule blocked on an unsolved meta stops the search and sets `blocked`.
inline std::optional<RewriteStep> head_rewrite(const Environment& env, const Term& head, std::vector<Arg>& args,
                                               MatchHooks& hooks, bool* blocked = nullptr) {
  if (!head.is(Kind::Const)) return std::nullopt;
  const ConstInfo* info = env.find(head->name);
  if (!info) return std::nullopt;
  std::vector<Term> subst;
  for (const auto& rule : info->rules) {
    if (args.size() < rule.arity()) continue;
    auto r = match(rule, std::span<Arg>(args), subst, hooks);
    if (r == MatchResult::Blocked) {
      if (blocked) *blocked = true;
      return std::nullopt;
    }
    if (r == MatchResult::Matched) {
      Term rhs = instantiate_rule(rule, subst);
      return RewriteStep{apply_args(rhs, std::span<const Arg>(args).subspan(rule.arity())), &rule};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Termination of recursive definition blocks

/// First-order view of clause patterns and call arguments.
struct FoTerm {
  enum class Kind { Var, Rigid, Other };
  Kind kind = Kind::Other;
  std::string name;
  std::vector<FoTerm> args;

  friend bool operator==(const FoTerm& a, const FoTerm& b) {
    if (a.kind != b.kind || a.kind == Kind::Other) return false;
    return a.name == b.name && a.args == b.args;
  }
};

struct RecursiveCall {
  std::string callee;
  std::vector<FoTerm> args; // explicit arguments only
  std::string text;         // for diagnostics
};

struct TerminationClause {
  std::string function;
  std::vector<FoTerm> patterns; // explicit argument patterns
  std::vector<RecursiveCall> calls;
};

namespace detail {

inline bool strict_subterm(const FoTerm& arg, const FoTerm& pattern) {
  for (const auto& sub : pattern.args)
    if (sub == arg || strict_subterm(arg, sub)) return true;
  return false;
}

inline bool decreases_at(const TerminationClause& c, const RecursiveCall& call, std::size_t pos) {
  return pos < c.patterns.size() && pos < call.args.size() && strict_subterm(call.args[pos], c.patterns[pos]);
}

} // namespace detail

/// Accepts iff one explicit argument position, shared by the whole block, strictly
/// decreases at every recursive call. Throws TerminationRejected otherwise.
inline void check_termination(std::span<const TerminationClause> block) {
  std::size_t max_pos = 0;
  bool any_call = false;
  for (const auto& c : block) {
    max_pos = std::max(max_pos, c.patterns.size());
    any_call = any_call || !c.calls.empty();
  }
  if (!any_call) return;
  for (std::size_t pos = 0; pos < max_pos; ++pos) {
    bool ok = true;
    for (const auto& c : block) {
      for (const auto& call : c.calls)
        if (!detail::decreases_at(c, call, pos)) {
          ok = false;
          break;
        }
      if (!ok) break;
    }
    if (ok) return;
  }
  // Report the first call that fails at position 0, or the first call at all.
  for (const auto& c : block)
    for (const auto& call : c.calls)
      if (!detail::decreases_at(c, call, 0))
        throw Error(ErrorKind::TerminationRejected,
                    "no argument decreases structurally; offending call `" + call.text + "` in a clause of " + c.function);
  throw Error(ErrorKind::TerminationRejected, "no shared decreasing argument position");
}

} // namespace hitt
