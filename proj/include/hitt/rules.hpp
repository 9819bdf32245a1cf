#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hitt/elaborator.hpp"
#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/kernel.hpp"
#include "hitt/surface.hpp"

namespace hitt {

/// A candidate rule before validation. `lhs` and `rhs` live over the telescope
/// (Var 0 is the last telescope entry). Clause-compiled rules come with a spine.
struct RuleSpec {
  Name name;
  RuleOrigin origin = RuleOrigin::UserPragma;
  std::vector<Name> telescope_names;
  std::vector<Term> telescope;
  Term lhs;
  Term rhs;
  std::optional<std::vector<PatternArg>> spine;
};

namespace detail {

class PatternBuilder {
public:
  explicit PatternBuilder(std::size_t k) : k_(k), bound_(k, false) {}

  // Explicit positions bind variables; nothing else may be a variable there.
  void bind_explicit(const Term& t) {
    std::vector<Arg> args;
    Term head = unwind(t, args);
    if (head.is(Kind::Var)) {
      if (!args.empty()) throw Error(ErrorKind::HigherOrderPattern, "variable applied to arguments in a pattern");
      auto v = var_of(head);
      if (bound_[v]) throw Error(ErrorKind::NonlinearPattern, "variable bound twice on the left-hand side");
      bound_[v] = true;
      return;
    }
    if (head.is(Kind::Const)) {
      for (const auto& a : args)
        if (!a.implicit) bind_explicit(a.term);
      return;
    }
    if (t->loose == 0 && !t.is(Kind::Lam)) return; // closed
    throw Error(ErrorKind::HigherOrderPattern, "pattern is neither a variable nor a constant application");
  }

  Pattern build(const Term& t, bool implicit_position) {
    std::vector<Arg> args;
    Term head = unwind(t, args);
    if (implicit_position) {
      if (head.is(Kind::Var) && args.empty() && !bound_[var_of(head)] && !claimed(var_of(head))) {
        claimed_.push_back(var_of(head));
        return Pattern::variable(var_of(head));
      }
      return Pattern::wild();
    }
    if (head.is(Kind::Var)) return Pattern::variable(var_of(head));
    if (head.is(Kind::Const)) {
      std::vector<PatternArg> sub;
      for (const auto& a : args) sub.push_back({build(a.term, a.implicit), a.implicit});
      return Pattern::rigid(head->name, std::move(sub));
    }
    return Pattern::closed_term(t);
  }

  bool all_bound(std::size_t* missing) const {
    for (std::size_t v = 0; v < k_; ++v) {
      if (!bound_[v] && !claimed(static_cast<std::uint32_t>(v))) {
        *missing = v;
        return false;
      }
    }
    return true;
  }

private:
  std::uint32_t var_of(const Term& v) const { return static_cast<std::uint32_t>(k_ - 1 - v->index); }
  bool claimed(std::uint32_t v) const { return std::find(claimed_.begin(), claimed_.end(), v) != claimed_.end(); }

  std::size_t k_;
  std::vector<bool> bound_;
  std::vector<std::uint32_t> claimed_;
};

inline void collect_pattern_vars(const Pattern& p, std::vector<std::uint32_t>& out) {
  if (p.kind == Pattern::Kind::Var) out.push_back(p.var);
  for (const auto& a : p.args) collect_pattern_vars(a.pattern, out);
}

} // namespace detail

/// Validates a rule: the head must be declared, the pattern linear and first
/// order, and both sides must have the same type.
inline RewriteRule compile_rule(const Environment& env, const RuleSpec& spec, Budget& budget) {
  std::vector<Arg> args;
  Term head = unwind(spec.lhs, args);
  if (!head.is(Kind::Const))
    throw Error(ErrorKind::HeadNotDeclared, spec.name.str() + ": left-hand side is not headed by a constant");
  if (!env.contains(head->name))
    throw Error(ErrorKind::HeadNotDeclared, spec.name.str() + ": `" + head->name.str() + "` is not declared");
  const std::size_t k = spec.telescope.size();

  RewriteRule rule;
  rule.name = spec.name;
  rule.head = head->name;
  rule.lhs = spec.lhs;
  rule.replacement = spec.rhs;
  rule.telescope = spec.telescope;
  rule.telescope_names = spec.telescope_names;
  rule.origin = spec.origin;

  if (spec.spine) {
    rule.spine = *spec.spine;
    std::vector<std::uint32_t> seen;
    for (const auto& a : rule.spine) detail::collect_pattern_vars(a.pattern, seen);
    std::vector<bool> bound(k, false);
    for (auto v : seen) {
      if (v >= k) throw Error(ErrorKind::IllTypedRule, spec.name.str() + ": pattern variable out of range");
      if (bound[v]) throw Error(ErrorKind::NonlinearPattern, spec.name.str() + ": variable bound twice");
      bound[v] = true;
    }
    for (std::size_t v = 0; v < k; ++v)
      if (!bound[v])
        throw Error(ErrorKind::IllTypedRule, spec.name.str() + ": `" + spec.telescope_names[v].str() +
                                                 "` is not determined by the left-hand side");
  } else {
    detail::PatternBuilder pb(k);
    try {
      for (const auto& a : args)
        if (!a.implicit) pb.bind_explicit(a.term);
    } catch (const Error& e) {
      throw Error(e.kind(), spec.name.str() + ": " + e.what());
    }
    for (const auto& a : args) rule.spine.push_back({pb.build(a.term, a.implicit), a.implicit});
    std::size_t missing = 0;
    if (!pb.all_bound(&missing))
      throw Error(ErrorKind::IllTypedRule, spec.name.str() + ": `" + spec.telescope_names[missing].str() +
                                               "` is not determined by the left-hand side");
  }

  // Type preservation.
  TypeChecker tc(env, budget);
  Context ctx;
  try {
    for (std::size_t i = 0; i < k; ++i) {
      tc.check(ctx, spec.telescope[i], Term::sort());
      ctx.push(spec.telescope_names[i], spec.telescope[i]);
    }
    Term lt = tc.infer(ctx, spec.lhs);
    tc.check(ctx, spec.rhs, lt);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FuelExhausted) throw;
    throw Error(ErrorKind::IllTypedRule, spec.name.str() + ": " + e.what());
  }
  return rule;
}

/// Rule from a `rewrite` pragma naming a postulated equation `(tele) -> l == r`.
inline RuleSpec pragma_rule(const Environment& env, Name postulate, Budget& budget) {
  const ConstInfo* info = env.find(postulate);
  if (!info) throw Error(ErrorKind::UnknownConstant, postulate.str());
  if (info->kind != DeclKind::Postulate)
    throw Error(ErrorKind::BadDeclaration, "rewrite: `" + postulate.str() + "` is not a postulate");
  RuleSpec spec;
  spec.name = postulate;
  spec.origin = RuleOrigin::UserPragma;
  Term t = info->type;
  while (t.is(Kind::Pi)) {
    spec.telescope.push_back(t->a);
    spec.telescope_names.push_back(t->name);
    t = t->b;
  }
  Reducer red(env, budget);
  Term eq = red.whnf(t);
  std::vector<Arg> args;
  Term head = unwind(eq, args);
  if (!head.is(Kind::Const) || head->name.str() != "Id" || args.size() != 3)
    throw Error(ErrorKind::BadDeclaration, "rewrite: the type of `" + postulate.str() + "` is not an equation");
  spec.lhs = args[1].term;
  spec.rhs = args[2].term;
  return spec;
}

// ---------------------------------------------------------------------------
// Clauses

namespace detail {

/// Elaborated pattern tree, kept alongside the surface shape.
struct PatNode {
  enum class Kind { UserVar, Wild, Rigid };
  Kind kind = Kind::Wild;
  Term term; // elaborated (may contain metas)
  Name head;
  std::vector<std::pair<PatNode, bool>> args; // node, implicit
};

class ClauseElaborator {
public:
  ClauseElaborator(Elaborator& el, Name fname) : el_(el), fname_(fname) {}

  RuleSpec run(const Term& fty, const surface::Clause& clause) {
    std::vector<std::pair<const surface::Expr*, bool>> pats;
    const surface::Expr* head = clause.lhs.get();
    while (head->kind == surface::ExprKind::App) {
      pats.emplace_back(head->b.get(), head->implicit);
      head = head->a.get();
    }
    std::reverse(pats.begin(), pats.end());
    if (head->kind != surface::ExprKind::Ident || head->name != fname_.str())
      throw Error(ErrorKind::BadDeclaration, el_.where(*clause.lhs) + ": clause must start with `" + fname_.str() + "`");
    first_meta_ = static_cast<std::uint32_t>(el_.metas().size());

    Term lhs = Term::constant(fname_);
    Term ty = fty;
    std::vector<std::pair<PatNode, bool>> spine;
    spine_args(lhs, ty, pats, spine, *clause.lhs);
    el_.solve_postponed();

    // Telescope: unsolved metas created by the left-hand side, dependencies first.
    std::vector<std::uint32_t> open;
    for (auto id = first_meta_; id < el_.metas().size(); ++id)
      if (!el_.metas().solved(id)) open.push_back(id);
    std::vector<std::uint32_t> tele = order_by_dependency(open);
    for (auto id : tele) el_.metas().freeze(id);

    Scope s;
    for (const auto& [n, m] : vars_) s.aliases.emplace_back(n, m);
    Term rhs = el_.check(s, *clause.rhs, ty);
    el_.finish_constraints();

    RuleSpec spec;
    spec.name = fname_;
    spec.origin = RuleOrigin::CompiledDefinition;
    for (std::size_t j = 0; j < tele.size(); ++j) {
      spec.telescope.push_back(abstract(zonk(el_.metas(), el_.metas().entry(tele[j]).type), tele, j));
      spec.telescope_names.push_back(Name(name_of(tele[j])));
    }
    spec.lhs = abstract(zonk(el_.metas(), lhs), tele, tele.size());
    spec.rhs = abstract(zonk(el_.metas(), rhs), tele, tele.size());
    std::uint32_t which = 0;
    if (has_unsolved(el_.metas(), spec.rhs, &which) || has_unsolved(el_.metas(), spec.lhs, &which)) {
      const auto& e = el_.metas().entry(which);
      throw Error(ErrorKind::UnsolvedMeta, "unsolved hole ?" + std::to_string(which) + " (" + e.origin + ")");
    }

    // Explicit user variables first, then inserted positions bind what is left.
    tele_ = tele;
    bound_.assign(tele.size(), false);
    for (const auto& [node, imp] : spine) bind_user(node);
    std::vector<PatternArg> pspine;
    for (const auto& [node, imp] : spine) pspine.push_back({to_pattern(node), imp});
    spec.spine = std::move(pspine);
    return spec;
  }

private:
  void spine_args(Term& h, Term& ty, const std::vector<std::pair<const surface::Expr*, bool>>& pats,
                  std::vector<std::pair<PatNode, bool>>& out, const surface::Expr& where) {
    Scope empty;
    for (const auto& [p, imp] : pats) {
      for (;;) {
        Term w = el_.reducer().whnf(ty);
        if (!w.is(Kind::Pi))
          throw Error(ErrorKind::NotAFunction, el_.where(*p) + ": too many patterns for `" + print_head(h) + "`");
        if (w->implicit && !imp) {
          Term m = el_.fresh_meta(empty, w->a, "implicit pattern at " + el_.where(*p));
          note_name(m, w->name.str());
          PatNode n;
          n.kind = PatNode::Kind::Wild;
          n.term = m;
          out.emplace_back(std::move(n), true);
          h = Term::app(h, m, true);
          ty = subst_top(w->b, m);
          continue;
        }
        if (w->implicit != imp)
          throw Error(ErrorKind::NotAFunction, el_.where(*p) + ": unexpected implicit pattern");
        PatNode n = pattern(*p, w->a);
        Term t = n.term;
        out.emplace_back(std::move(n), imp);
        h = Term::app(h, t, imp);
        ty = subst_top(w->b, t);
        break;
      }
    }
    (void)where;
  }

  PatNode pattern(const surface::Expr& p, const Term& expected) {
    Scope empty;
    std::vector<std::pair<const surface::Expr*, bool>> args;
    const surface::Expr* head = &p;
    while (head->kind == surface::ExprKind::App) {
      args.emplace_back(head->b.get(), head->implicit);
      head = head->a.get();
    }
    std::reverse(args.begin(), args.end());
    if (head->kind == surface::ExprKind::Hole && args.empty()) {
      PatNode n;
      n.kind = PatNode::Kind::Wild;
      n.term = el_.fresh_meta(empty, expected, "wildcard at " + el_.where(p));
      return n;
    }
    if (head->kind != surface::ExprKind::Ident)
      throw Error(ErrorKind::HigherOrderPattern, el_.where(p) + ": unsupported pattern `" + surface::print(p) + "`");
    Name hn(head->name);
    const ConstInfo* c = el_.env().find(hn);
    if (!c) {
      if (!args.empty())
        throw Error(ErrorKind::HigherOrderPattern, el_.where(p) + ": variable `" + head->name + "` applied in a pattern");
      for (const auto& v : vars_)
        if (v.first == head->name)
          throw Error(ErrorKind::NonlinearPattern, el_.where(p) + ": `" + head->name + "` bound twice");
      Term m = el_.fresh_meta(empty, expected, "pattern variable " + head->name);
      note_name(m, head->name);
      vars_.emplace_back(head->name, m);
      PatNode n;
      n.kind = PatNode::Kind::UserVar;
      n.term = m;
      return n;
    }
    if (c->kind != DeclKind::Postulate)
      throw Error(ErrorKind::HigherOrderPattern, el_.where(p) + ": `" + head->name + "` is a definition, not a constructor");
    Term h = Term::constant(hn);
    Term ty = c->type;
    PatNode n;
    n.kind = PatNode::Kind::Rigid;
    n.head = hn;
    spine_args(h, ty, args, n.args, p);
    for (;;) {
      Term w = el_.reducer().whnf(ty);
      if (!w.is(Kind::Pi) || !w->implicit) break;
      Term m = el_.fresh_meta(empty, w->a, "implicit pattern at " + el_.where(p));
      note_name(m, w->name.str());
      PatNode sub;
      sub.kind = PatNode::Kind::Wild;
      sub.term = m;
      n.args.emplace_back(std::move(sub), true);
      h = Term::app(h, m, true);
      ty = subst_top(w->b, m);
    }
    auto r = el_.unify(ty, expected);
    if (r != UnifyResult::Ok) {
      Scope s;
      throw el_.mismatch_error(s, expected, ty, "pattern " + surface::print(p));
    }
    n.term = h;
    return n;
  }

  std::string print_head(const Term& h) { return print(h, {}, {false, &el_.env()}); }

  void note_name(const Term& m, const std::string& n) {
    names_.emplace_back(m->index, n.empty() || n == "_" ? "x" : n);
  }

  std::string name_of(std::uint32_t id) const {
    for (const auto& [m, n] : names_)
      if (m == id) return n;
    return "x";
  }

  void metas_in(const Term& t, std::vector<std::uint32_t>& out) const {
    if (!t->has_meta) return;
    if (t.is(Kind::Meta)) {
      out.push_back(t->index);
      return;
    }
    if (t->a) metas_in(t->a, out);
    if (t->b) metas_in(t->b, out);
  }

  std::vector<std::uint32_t> order_by_dependency(const std::vector<std::uint32_t>& open) {
    std::vector<std::uint32_t> out;
    std::vector<int> state(open.size(), 0);
    auto index_of = [&](std::uint32_t id) -> std::ptrdiff_t {
      auto it = std::find(open.begin(), open.end(), id);
      return it == open.end() ? -1 : it - open.begin();
    };
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      if (state[i] == 2) return;
      if (state[i] == 1) throw Error(ErrorKind::IllTypedRule, "cyclic pattern variable types");
      state[i] = 1;
      std::vector<std::uint32_t> deps;
      metas_in(zonk(el_.metas(), el_.metas().entry(open[i]).type), deps);
      for (auto d : deps)
        if (auto j = index_of(d); j >= 0) visit(static_cast<std::size_t>(j));
      state[i] = 2;
      out.push_back(open[i]);
    };
    for (std::size_t i = 0; i < open.size(); ++i) visit(i);
    return out;
  }

  /// Replaces the first `k` telescope metas by variables (Var 0 = entry k-1).
  Term abstract(const Term& t, const std::vector<std::uint32_t>& tele, std::size_t k, std::uint32_t depth = 0) {
    if (!t->has_meta) return t;
    switch (t.kind()) {
    case Kind::Meta:
      for (std::size_t j = 0; j < k; ++j)
        if (tele[j] == t->index) return Term::var(static_cast<std::uint32_t>(depth + (k - 1 - j)));
      return t;
    case Kind::Lam:
      return Term::lam(t->name, t->implicit, abstract(t->a, tele, k, depth + 1));
    case Kind::App:
      return Term::app(abstract(t->a, tele, k, depth), abstract(t->b, tele, k, depth), t->implicit);
    case Kind::Pi:
      return Term::pi(t->name, t->implicit, abstract(t->a, tele, k, depth), abstract(t->b, tele, k, depth + 1));
    case Kind::Sigma:
      return Term::sigma(t->name, abstract(t->a, tele, k, depth), abstract(t->b, tele, k, depth + 1));
    case Kind::Pair:
      return Term::pair(abstract(t->a, tele, k, depth), abstract(t->b, tele, k, depth));
    case Kind::Proj1:
      return Term::proj1(abstract(t->a, tele, k, depth));
    case Kind::Proj2:
      return Term::proj2(abstract(t->a, tele, k, depth));
    default:
      return t;
    }
  }

  std::optional<std::uint32_t> tele_var(const Term& t) {
    Term z = zonk(el_.metas(), t);
    if (!z.is(Kind::Meta)) return std::nullopt;
    for (std::size_t j = 0; j < tele_.size(); ++j)
      if (tele_[j] == z->index) return static_cast<std::uint32_t>(j);
    return std::nullopt;
  }

  void bind_user(const PatNode& n) {
    if (n.kind == PatNode::Kind::UserVar) {
      if (auto v = tele_var(n.term)) {
        if (bound_[*v]) throw Error(ErrorKind::NonlinearPattern, fname_.str() + ": pattern variable bound twice");
        bound_[*v] = true;
        user_bound_.push_back(*v);
      }
      return;
    }
    for (const auto& [sub, imp] : n.args) bind_user(sub);
  }

  Pattern to_pattern(const PatNode& n) {
    switch (n.kind) {
    case PatNode::Kind::UserVar:
      if (auto v = tele_var(n.term); v && std::find(user_bound_.begin(), user_bound_.end(), *v) != user_bound_.end()) {
        user_bound_.erase(std::find(user_bound_.begin(), user_bound_.end(), *v));
        return Pattern::variable(*v);
      }
      return Pattern::wild();
    case PatNode::Kind::Wild:
      if (auto v = tele_var(n.term); v && !bound_[*v]) {
        bound_[*v] = true;
        return Pattern::variable(*v);
      }
      return Pattern::wild();
    case PatNode::Kind::Rigid: {
      std::vector<PatternArg> sub;
      for (const auto& [s, imp] : n.args) sub.push_back({to_pattern(s), imp});
      return Pattern::rigid(n.head, std::move(sub));
    }
    }
    return Pattern::wild();
  }

  Elaborator& el_;
  Name fname_;
  std::uint32_t first_meta_ = 0;
  std::vector<std::pair<std::string, Term>> vars_;
  std::vector<std::pair<std::uint32_t, std::string>> names_;
  std::vector<std::uint32_t> tele_;
  std::vector<bool> bound_;
  std::vector<std::uint32_t> user_bound_;
};

} // namespace detail

/// Elaborates `f p1 .. pn = rhs` against the declared type of `f`.
inline RuleSpec elaborate_clause(Elaborator& el, Name fname, const Term& fty, const surface::Clause& clause) {
  return detail::ClauseElaborator(el, fname).run(fty, clause);
}

} // namespace hitt
