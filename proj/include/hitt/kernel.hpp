#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/meta.hpp"
#include "hitt/print.hpp"
#include "hitt/rewrite.hpp"
#include "hitt/term.hpp"

namespace hitt {

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;

/// Head-step counter shared by everything reducing on behalf of one job.
struct Budget {
  std::uint64_t limit = kDefaultFuel;
  std::uint64_t steps = 0;

  void tick() {
    if (++steps > limit)
      throw Error(ErrorKind::FuelExhausted,
                  "more than " + std::to_string(limit) + " head steps; the rule set probably loops");
  }
};

/// Typing context: innermost entry last; each type lives in the prefix before it.
class Context {
public:
  struct Entry {
    Name name;
    Term type;
  };

  void push(Name name, Term type) { entries_.push_back({name, std::move(type)}); }
  void pop() { entries_.pop_back(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  Term type_of(std::uint32_t index) const {
    if (index >= entries_.size()) throw Error(ErrorKind::UnboundVariable, "#" + std::to_string(index));
    return shift(entries_[entries_.size() - 1 - index].type, static_cast<std::int64_t>(index) + 1);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name.empty_name() ? "_" : e.name.str());
    return out;
  }

private:
  std::vector<Entry> entries_;
};

/// Weak-head and full normalization plus conversion. Rewriting of constant-headed
/// terms is delegated to the rewrite engine; solved metas are unfolded when a store is given.
class Reducer : public MatchHooks {
public:
  Reducer(const Environment& env, Budget& budget, const MetaStore* metas = nullptr)
      : env_(env), budget_(budget), metas_(metas) {}

  const Environment& env() const { return env_; }
  Budget& budget() { return budget_; }

  Term whnf(const Term& input, bool* blocked = nullptr) override {
    Term t = input;
    std::vector<Arg> args;
    for (;;) {
      args.clear();
      Term head = unwind(t, args);
      switch (head.kind()) {
      case Kind::Lam: {
        if (args.empty()) return t;
        budget_.tick();
        std::size_t i = 0;
        Term body = head;
        while (i < args.size() && body.is(Kind::Lam)) body = subst_top(body->a, args[i++].term);
        t = apply_args(body, std::span<const Arg>(args).subspan(i));
        continue;
      }
      case Kind::Meta: {
        const Term* sol = metas_ ? metas_->solution(head->index) : nullptr;
        if (!sol) {
          if (blocked && !(metas_ && metas_->entry(head->index).frozen)) *blocked = true;
          return t;
        }
        t = beta_apply(*sol, args);
        continue;
      }
      case Kind::Proj1:
      case Kind::Proj2: {
        Term inner = whnf(head->a, blocked);
        if (inner.is(Kind::Pair)) {
          budget_.tick();
          t = apply_args(head.is(Kind::Proj1) ? inner->a : inner->b, args);
          continue;
        }
        if (same_node(inner, head->a)) return t;
        return apply_args(head.is(Kind::Proj1) ? Term::proj1(inner) : Term::proj2(inner), args);
      }
      case Kind::Const: {
        auto step = head_rewrite(env_, head, args, *this, blocked);
        if (step) {
          budget_.tick();
          t = std::move(step->result);
          continue;
        }
        return apply_args(head, args);
      }
      default:
        return t;
      }
    }
  }

  Term nf(const Term& t) {
    std::unordered_map<const Node*, Term> cache;
    std::vector<Term> keep;
    return nf_rec(t, cache, keep);
  }

  bool conv(const Term& t, const Term& u) override {
    if (equal(t, u)) return true;
    std::vector<Arg> ta, ua;
    Term th = unwind(t, ta);
    Term uh = unwind(u, ua);
    if (th.is(Kind::Const) && uh.is(Kind::Const) && th->name == uh->name && ta.size() == ua.size()) {
      bool same = true;
      for (std::size_t i = 0; same && i < ta.size(); ++i)
        same = ta[i].implicit == ua[i].implicit && conv(ta[i].term, ua[i].term);
      if (same) return true;
    }
    Term tw = whnf(t);
    Term uw = whnf(u);
    if ((!same_node(tw, t) || !same_node(uw, u)) && equal(tw, uw)) return true;
    return conv_whnf(tw, uw);
  }

private:
  bool conv_whnf(const Term& t, const Term& u) {
    // eta
    if (t.is(Kind::Lam) && !u.is(Kind::Lam))
      return conv(t->a, Term::app(shift(u, 1), Term::var(0), t->implicit));
    if (u.is(Kind::Lam) && !t.is(Kind::Lam))
      return conv(Term::app(shift(t, 1), Term::var(0), u->implicit), u->a);
    if (t.is(Kind::Pair) && !u.is(Kind::Pair))
      return conv(t->a, Term::proj1(u)) && conv(t->b, Term::proj2(u));
    if (u.is(Kind::Pair) && !t.is(Kind::Pair))
      return conv(Term::proj1(t), u->a) && conv(Term::proj2(t), u->b);

    switch (t.kind()) {
    case Kind::Sort:
      return u.is(Kind::Sort);
    case Kind::Pi:
      return u.is(Kind::Pi) && t->implicit == u->implicit && conv(t->a, u->a) && conv(t->b, u->b);
    case Kind::Sigma:
      return u.is(Kind::Sigma) && conv(t->a, u->a) && conv(t->b, u->b);
    case Kind::Lam:
      return conv(t->a, u->a);
    case Kind::Pair:
      return conv(t->a, u->a) && conv(t->b, u->b);
    default:
      break;
    }
    return conv_neutral(t, u) || conv_applied(t, u);
  }

  bool conv_neutral(const Term& t, const Term& u) {
    std::vector<Arg> ta, ua;
    Term th = unwind(t, ta);
    Term uh = unwind(u, ua);
    if (ta.size() != ua.size() || th.kind() != uh.kind()) return false;
    switch (th.kind()) {
    case Kind::Var:
    case Kind::Meta:
      if (th->index != uh->index) return false;
      break;
    case Kind::Const:
      if (th->name != uh->name) return false;
      break;
    case Kind::Proj1:
    case Kind::Proj2:
      if (!conv(th->a, uh->a)) return false;
      break;
    default:
      return false;
    }
    for (std::size_t i = 0; i < ta.size(); ++i)
      if (ta[i].implicit != ua[i].implicit || !conv(ta[i].term, ua[i].term)) return false;
    return true;
  }

  // Eta for stuck partial applications: `f` and `g` agree if `f x` and `g x`
  // do for a fresh x, provided one of them computes once applied.
  bool conv_applied(const Term& t, const Term& u) {
    for (bool imp : {false, true}) {
      Term ta = Term::app(shift(t, 1), Term::var(0), imp);
      Term ua = Term::app(shift(u, 1), Term::var(0), imp);
      Term tw = whnf(ta), uw = whnf(ua);
      if (equal(tw, ta) && equal(uw, ua)) continue;
      return conv(tw, uw);
    }
    return false;
  }

  Term nf_rec(const Term& t, std::unordered_map<const Node*, Term>& cache, std::vector<Term>& keep) {
    if (auto it = cache.find(t.get()); it != cache.end()) return it->second;
    Term w = whnf(t);
    Term out;
    switch (w.kind()) {
    case Kind::Lam:
      out = Term::lam(w->name, w->implicit, nf_rec(w->a, cache, keep));
      break;
    case Kind::Pi:
      out = Term::pi(w->name, w->implicit, nf_rec(w->a, cache, keep), nf_rec(w->b, cache, keep));
      break;
    case Kind::Sigma:
      out = Term::sigma(w->name, nf_rec(w->a, cache, keep), nf_rec(w->b, cache, keep));
      break;
    case Kind::Pair:
      out = Term::pair(nf_rec(w->a, cache, keep), nf_rec(w->b, cache, keep));
      break;
    case Kind::Proj1:
      out = Term::proj1(nf_rec(w->a, cache, keep));
      break;
    case Kind::Proj2:
      out = Term::proj2(nf_rec(w->a, cache, keep));
      break;
    case Kind::App: {
      std::vector<Arg> args;
      Term head = unwind(w, args);
      if (head.is(Kind::Proj1) || head.is(Kind::Proj2)) head = nf_rec(head, cache, keep);
      for (auto& a : args) a.term = nf_rec(a.term, cache, keep);
      out = apply_args(head, args);
      break;
    }
    default:
      out = w;
      break;
    }
    keep.push_back(t);
    cache.emplace(t.get(), out);
    return out;
  }

  const Environment& env_;
  Budget& budget_;
  const MetaStore* metas_;
};

/// Bidirectional checker for meta-free core terms.
class TypeChecker {
public:
  TypeChecker(const Environment& env, Budget& budget) : env_(env), red_(env, budget) {}

  Reducer& reducer() { return red_; }

  Term infer(Context& ctx, const Term& t) {
    switch (t.kind()) {
    case Kind::Var:
      return ctx.type_of(t->index);
    case Kind::Sort:
      return Term::sort();
    case Kind::Const: {
      const ConstInfo* c = env_.find(t->name);
      if (!c) throw Error(ErrorKind::UnknownConstant, t->name.str());
      return c->type;
    }
    case Kind::App: {
      {
        std::vector<Arg> args;
        if (unwind(t, args).is(Kind::Lam)) return infer(ctx, red_.whnf(t)); // redex: reduce it first
      }
      Term ft = red_.whnf(infer(ctx, t->a));
      if (!ft.is(Kind::Pi) || ft->implicit != t->implicit)
        throw Error(ErrorKind::NotAFunction, "`" + show(ctx, t->a) + "` has type " + show(ctx, ft));
      check(ctx, t->b, ft->a);
      return subst_top(ft->b, t->b);
    }
    case Kind::Pi:
    case Kind::Sigma:
      check(ctx, t->a, Term::sort());
      ctx.push(t->name, t->a);
      check(ctx, t->b, Term::sort());
      ctx.pop();
      return Term::sort();
    case Kind::Proj1:
    case Kind::Proj2: {
      {
        std::vector<Arg> args;
        Term h = unwind(t->a, args);
        if (t->a.is(Kind::Pair) || (h.is(Kind::Lam) && !args.empty())) return infer(ctx, red_.whnf(t));
      }
      Term pt = red_.whnf(infer(ctx, t->a));
      if (!pt.is(Kind::Sigma)) throw Error(ErrorKind::NotAPair, "`" + show(ctx, t->a) + "` has type " + show(ctx, pt));
      if (t.is(Kind::Proj1)) return pt->a;
      return subst_top(pt->b, Term::proj1(t->a));
    }
    case Kind::Pair: {
      // Only reached under a projection; a non-dependent pair type suffices.
      Term a = infer(ctx, t->a);
      Term b = infer(ctx, t->b);
      return Term::sigma(Name("_"), a, shift(b, 1));
    }
    case Kind::Lam:
      throw Error(ErrorKind::CannotInfer, "cannot infer the type of `" + show(ctx, t) + "`");
    case Kind::Meta:
      throw Error(ErrorKind::UnsolvedMeta, "?" + std::to_string(t->index) + " reached the kernel");
    }
    throw Error(ErrorKind::CannotInfer, "unknown term");
  }

  void check(Context& ctx, const Term& t, const Term& expected) {
    if (t.is(Kind::Lam)) {
      Term et = red_.whnf(expected);
      if (!et.is(Kind::Pi) || et->implicit != t->implicit)
        throw mismatch(ctx, expected, Term(), "a lambda");
      ctx.push(t->name, et->a);
      check(ctx, t->a, et->b);
      ctx.pop();
      return;
    }
    if (t.is(Kind::Pair)) {
      Term et = red_.whnf(expected);
      if (!et.is(Kind::Sigma)) throw mismatch(ctx, expected, Term(), "a pair");
      check(ctx, t->a, et->a);
      check(ctx, t->b, subst_top(et->b, t->a));
      return;
    }
    Term actual = infer(ctx, t);
    if (!red_.conv(actual, expected)) throw mismatch(ctx, expected, actual, show(ctx, t));
  }

  bool conv(const Term& a, const Term& b) { return red_.conv(a, b); }

  std::string show(const Context& ctx, const Term& t) { return print(t, ctx.names(), {false, &env_}); }

  /// TypeMismatch carrying both sides in normal form.
  Error mismatch(const Context& ctx, const Term& expected, const Term& actual, const std::string& what) {
    std::string msg = "`" + what + "`: expected " + show(ctx, safe_nf(expected));
    if (actual) msg += ", got " + show(ctx, safe_nf(actual));
    return Error(ErrorKind::TypeMismatch, msg);
  }

private:
  Term safe_nf(const Term& t) {
    try {
      return red_.nf(t);
    } catch (const Error&) {
      return t;
    }
  }

  const Environment& env_;
  Reducer red_;
};

// Convenience entry points with a fresh default budget.

inline Term whnf(const Environment& env, const Term& t, std::uint64_t fuel = kDefaultFuel) {
  Budget b{fuel};
  return Reducer(env, b).whnf(t);
}

inline Term nf(const Environment& env, const Term& t, std::uint64_t fuel = kDefaultFuel) {
  Budget b{fuel};
  return Reducer(env, b).nf(t);
}

inline bool conv(const Environment& env, const Context&, const Term& t, const Term& u,
                 std::uint64_t fuel = kDefaultFuel) {
  Budget b{fuel};
  return Reducer(env, b).conv(t, u);
}

inline Term infer(const Environment& env, const Context& ctx, const Term& t, std::uint64_t fuel = kDefaultFuel) {
  Budget b{fuel};
  Context c = ctx;
  return TypeChecker(env, b).infer(c, t);
}

inline void check(const Environment& env, const Context& ctx, const Term& t, const Term& expected,
                  std::uint64_t fuel = kDefaultFuel) {
  Budget b{fuel};
  Context c = ctx;
  TypeChecker(env, b).check(c, t, expected);
}

/// Eta-expands once at a Pi or Sigma type (used by property tests).
inline Term eta_expand(const Term& t, const Term& type_whnf) {
  if (type_whnf.is(Kind::Pi))
    return Term::lam(type_whnf->name, type_whnf->implicit, Term::app(shift(t, 1), Term::var(0), type_whnf->implicit));
  if (type_whnf.is(Kind::Sigma)) return Term::pair(Term::proj1(t), Term::proj2(t));
  return t;
}

} // namespace hitt
