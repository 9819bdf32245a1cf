#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hitt/elaborator.hpp"
#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/print.hpp"

namespace hitt {

inline constexpr std::size_t kDefaultCohDepth = 32;

struct CohSolution {
  Term term;           // closed: lambdas over the goal telescope around the witness
  Term witness;        // in the goal telescope
  std::string printed; // witness with implicit arguments hidden
  std::size_t depth = 0;
  std::size_t nodes = 0; // instance applications tried
};

/// True when `t` reduces to `Coh X`.
inline bool is_coh_type(Reducer& red, const Term& t) {
  std::vector<Arg> args;
  Term h = unwind(red.whnf(t), args);
  return h.is(Kind::Const) && h->name.str() == "Coh" && args.size() == 1 && !args[0].implicit;
}

namespace detail {

class CohSearch {
public:
  CohSearch(Elaborator& el, Scope& scope, std::size_t max_depth) : el_(el), scope_(scope), max_depth_(max_depth) {}

  struct Goal {
    Term hole;
    Term type;
    std::size_t depth = 1;
  };

  bool dfs(std::vector<Goal> pending) {
    if (pending.empty()) return true;
    Goal g = pending.back();
    pending.pop_back();
    if (g.depth > max_depth_) {
      depth_hit_ = true;
      return false;
    }
    for (Name inst : el_.env().instances()) {
      auto mark = el_.mark();
      ++nodes_;
      Term h = Term::constant(inst);
      Term ty = el_.env().at(inst).type;
      std::vector<Goal> subs;
      bool ok = true;
      for (;;) {
        Term w = el_.reducer().whnf(ty);
        if (!w.is(Kind::Pi)) break;
        Term m = el_.fresh_meta(scope_, w->a, "argument of instance " + inst.str());
        if (!w->implicit) {
          if (!is_coh_type(el_.reducer(), w->a)) {
            ok = false; // only Coh premises can be searched for
            break;
          }
          subs.push_back({m, w->a, g.depth + 1});
        }
        h = Term::app(h, m, w->implicit);
        ty = subst_top(w->b, m);
      }
      if (ok) ok = el_.unify(ty, g.type) == UnifyResult::Ok;
      if (ok) {
        try {
          el_.solve_postponed();
        } catch (const Error&) {
          ok = false;
        }
      }
      if (ok) ok = el_.unify(g.hole, h) == UnifyResult::Ok;
      if (ok) {
        auto next = pending;
        for (auto it = subs.rbegin(); it != subs.rend(); ++it) next.push_back(*it);
        if (dfs(std::move(next))) return true;
      }
      el_.rollback(mark);
    }
    return false;
  }

  bool depth_hit() const { return depth_hit_; }
  std::size_t nodes() const { return nodes_; }

  /// Depth of the solved witness tree: the number of nested instance applications.
  std::size_t witness_depth(const Term& w) const {
    std::vector<Arg> args;
    Term h = unwind(w, args);
    std::size_t best = 0;
    for (const auto& a : args)
      if (!a.implicit) best = std::max(best, witness_depth(a.term));
    return h.is(Kind::Const) ? best + 1 : best;
  }

private:
  Elaborator& el_;
  Scope& scope_;
  std::size_t max_depth_;
  std::size_t nodes_ = 0;
  bool depth_hit_ = false;
};

} // namespace detail

/// Finds an instance witness for a goal `(telescope) -> Coh X` by depth-first
/// search over the registered instances, in registration order.
inline CohSolution solve_coh(Elaborator& el, const Term& goal, std::size_t max_depth = kDefaultCohDepth) {
  Scope s;
  Term t = goal;
  std::vector<Term> binders;
  for (;;) {
    Term w = el.reducer().whnf(t);
    if (!w.is(Kind::Pi)) {
      t = w;
      break;
    }
    s.push(w->name.str(), w->name, w->a);
    binders.push_back(w);
    t = w->b;
  }
  if (!is_coh_type(el.reducer(), t))
    throw Error(ErrorKind::BadDeclaration, "coherence goal must end in `Coh _`, got " +
                                               print(t, s.ctx.names(), {false, &el.env()}));
  Term hole = el.fresh_meta(s, t, "coherence witness");
  detail::CohSearch search(el, s, max_depth);
  if (!search.dfs({{hole, t, 1}})) {
    if (search.depth_hit())
      throw Error(ErrorKind::DepthExhausted, "no witness within depth " + std::to_string(max_depth));
    throw Error(ErrorKind::NoSolution, "no instance applies");
  }
  el.finish_constraints();
  CohSolution out;
  out.witness = el.finalize(hole);
  out.depth = search.witness_depth(out.witness);
  out.nodes = search.nodes();
  out.printed = print(out.witness, s.ctx.names(), {false, &el.env()});
  Term body = out.witness;
  for (std::size_t i = binders.size(); i-- > 0;) body = Term::lam(binders[i]->name, binders[i]->implicit, body);
  out.term = body;
  return out;
}

} // namespace hitt
