#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hitt/term.hpp"

namespace hitt {

/// Metavariables of one elaboration session. Every meta is a closed term; a hole in a
/// context of n variables is represented as the meta applied to those n variables.
class MetaStore {
public:
  struct Entry {
    Term type;                 // closed, Pi over the creation context
    std::uint32_t context_size = 0;
    std::optional<Term> solution;
    std::string origin;        // where the hole came from, for UnsolvedMeta
    bool frozen = false;       // rigid: never solved, never blocks reduction
  };

  struct Mark {
    std::size_t metas = 0;
    std::size_t trail = 0;
  };

  std::uint32_t fresh(Term type, std::uint32_t context_size, std::string origin = {}) {
    metas_.push_back(Entry{std::move(type), context_size, std::nullopt, std::move(origin), false});
    return static_cast<std::uint32_t>(metas_.size() - 1);
  }

  const Term* solution(std::uint32_t id) const {
    const auto& e = metas_.at(id);
    return e.solution ? &*e.solution : nullptr;
  }

  bool solved(std::uint32_t id) const { return metas_.at(id).solution.has_value(); }

  /// Solved metas are never overwritten.
  void solve(std::uint32_t id, Term value) {
    auto& e = metas_.at(id);
    if (e.solution) return;
    e.solution = std::move(value);
    trail_.push_back(id);
  }

  const Entry& entry(std::uint32_t id) const { return metas_.at(id); }
  void freeze(std::uint32_t id) { metas_.at(id).frozen = true; }
  bool flexible(std::uint32_t id) const { return !metas_.at(id).solution && !metas_.at(id).frozen; }
  std::size_t size() const { return metas_.size(); }

  Mark mark() const { return {metas_.size(), trail_.size()}; }

  void rollback(const Mark& m) {
    while (trail_.size() > m.trail) {
      auto id = trail_.back();
      trail_.pop_back();
      if (id < metas_.size()) metas_[id].solution.reset();
    }
    metas_.resize(m.metas);
  }

private:
  std::vector<Entry> metas_;
  std::vector<std::uint32_t> trail_;
};

/// Substitutes solved metas, beta-reducing where a solution meets its spine.
inline Term zonk(const MetaStore& metas, const Term& t) {
  if (!t->has_meta) return t;
  switch (t.kind()) {
  case Kind::Meta:
    if (const Term* s = metas.solution(t->index)) return zonk(metas, *s);
    return t;
  case Kind::App: {
    std::vector<Arg> args;
    Term head = unwind(t, args);
    if (head.is(Kind::Meta)) {
      if (const Term* s = metas.solution(head->index)) {
        for (auto& a : args) a.term = zonk(metas, a.term);
        return zonk(metas, beta_apply(*s, args));
      }
    }
    return Term::app(zonk(metas, t->a), zonk(metas, t->b), t->implicit);
  }
  case Kind::Lam:
    return Term::lam(t->name, t->implicit, zonk(metas, t->a));
  case Kind::Pi:
    return Term::pi(t->name, t->implicit, zonk(metas, t->a), zonk(metas, t->b));
  case Kind::Sigma:
    return Term::sigma(t->name, zonk(metas, t->a), zonk(metas, t->b));
  case Kind::Pair:
    return Term::pair(zonk(metas, t->a), zonk(metas, t->b));
  case Kind::Proj1:
    return Term::proj1(zonk(metas, t->a));
  case Kind::Proj2:
    return Term::proj2(zonk(metas, t->a));
  default:
    return t;
  }
}

inline bool has_unsolved(const MetaStore& metas, const Term& t, std::uint32_t* which = nullptr) {
  if (!t->has_meta) return false;
  if (t.is(Kind::Meta)) {
    if (!metas.solved(t->index)) {
      if (which) *which = t->index;
      return true;
    }
    return false;
  }
  return (t->a && has_unsolved(metas, t->a, which)) || (t->b && has_unsolved(metas, t->b, which));
}

} // namespace hitt
