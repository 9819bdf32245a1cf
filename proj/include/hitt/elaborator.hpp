#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/kernel.hpp"
#include "hitt/meta.hpp"
#include "hitt/print.hpp"
#include "hitt/surface.hpp"
#include "hitt/term.hpp"

namespace hitt {

/// Local scope of elaboration. Entries with an empty surface name are inserted
/// binders the user cannot refer to. Aliases are closed terms bound to names
/// (pattern variables of a clause).
struct Scope {
  Context ctx;
  std::vector<std::string> names;
  std::vector<std::pair<std::string, Term>> aliases;

  void push(const std::string& surface, Name hint, Term type) {
    ctx.push(hint, std::move(type));
    names.push_back(surface);
  }
  void pop() {
    ctx.pop();
    names.pop_back();
  }
  std::size_t size() const { return names.size(); }
};

enum class UnifyResult { Ok, Fail, Occurs };

class Elaborator {
public:
  Elaborator(const Environment& env, Budget& budget) : env_(env), budget_(budget), red_(env, budget, &metas_) {}

  const Environment& env() const { return env_; }
  MetaStore& metas() { return metas_; }
  Reducer& reducer() { return red_; }

  struct Mark {
    MetaStore::Mark metas;
    std::size_t postponed = 0;
    std::size_t audited = 0;
  };
  Mark mark() const { return {metas_.mark(), postponed_.size(), audit_log_.size()}; }
  void rollback(const Mark& m) {
    metas_.rollback(m.metas);
    postponed_.resize(m.postponed);
    audit_log_.resize(m.audited);
  }

  /// Records every top-level constraint that unify accepts, for `audit`.
  void enable_audit() { audit_ = true; }

  /// Re-checks the recorded constraints with conv after substituting the
  /// solutions. Returns the number checked; throws on the first that fails.
  std::size_t audit() {
    for (const auto& [a, b] : audit_log_) {
      Term za = zonk(metas_, a), zb = zonk(metas_, b);
      if (!red_.conv(za, zb))
        throw Error(ErrorKind::UnificationFailure,
                    "audit: solved constraint does not convert: `" + show_closed(za) + " = " + show_closed(zb) + "`");
    }
    return audit_log_.size();
  }

  // -------------------------------------------------------------------------
  // Metas

  /// Fresh hole of type `type` in scope `s`, returned applied to the scope's variables.
  Term fresh_meta(const Scope& s, const Term& type, std::string origin) {
    Term closed = type;
    const auto& entries = s.ctx.entries();
    for (std::size_t i = entries.size(); i-- > 0;) closed = Term::pi(entries[i].name, false, entries[i].type, closed);
    auto id = metas_.fresh(closed, static_cast<std::uint32_t>(entries.size()), std::move(origin));
    Term t = Term::meta(id);
    for (std::size_t i = entries.size(); i-- > 0;) t = Term::app(t, Term::var(static_cast<std::uint32_t>(i)));
    return t;
  }

  std::string where(const surface::Expr& e) const {
    return std::to_string(e.pos.line) + ":" + std::to_string(e.pos.column);
  }

  // -------------------------------------------------------------------------
  // Unification

  UnifyResult unify(const Term& a, const Term& b) {
    if (!audit_ || unify_depth_ > 0) return unify_step(a, b);
    ++unify_depth_;
    UnifyResult r;
    try {
      r = unify_step(a, b);
    } catch (...) {
      --unify_depth_;
      throw;
    }
    --unify_depth_;
    if (r == UnifyResult::Ok) audit_log_.emplace_back(a, b);
    return r;
  }

  UnifyResult unify_step(const Term& a, const Term& b) {
    if (equal(a, b)) return UnifyResult::Ok;
    {
      std::vector<Arg> aa, ba;
      Term ah = unwind(a, aa);
      Term bh = unwind(b, ba);
      if (ah.is(Kind::Const) && bh.is(Kind::Const) && ah->name == bh->name && aa.size() == ba.size() && !aa.empty()) {
        // A spine that only unifies by postponing may still unify after
        // reduction, so it is kept only when neither side reduces.
        Mark m = mark();
        if (unify_spines(aa, ba) == UnifyResult::Ok) {
          if (postponed_.size() == m.postponed) return UnifyResult::Ok;
          bool ba_ = false, bb_ = false;
          Term wa = red_.whnf(a, &ba_);
          Term wb = red_.whnf(b, &bb_);
          if (equal(wa, a) && equal(wb, b)) return UnifyResult::Ok;
        }
        rollback(m);
      }
    }
    bool blocked_a = false, blocked_b = false;
    Term wa = red_.whnf(a, &blocked_a);
    Term wb = red_.whnf(b, &blocked_b);
    if (equal(wa, wb)) return UnifyResult::Ok;
    std::vector<Arg> sa, sb;
    Term ha = unwind(wa, sa);
    Term hb = unwind(wb, sb);
    bool flex_a = ha.is(Kind::Meta) && metas_.flexible(ha->index);
    bool flex_b = hb.is(Kind::Meta) && metas_.flexible(hb->index);
    if (flex_a && flex_b) {
      if (ha->index == hb->index && sa.size() == sb.size()) {
        Mark m = mark();
        if (unify_spines(sa, sb) == UnifyResult::Ok) return UnifyResult::Ok;
        rollback(m);
        postpone(wa, wb);
        return UnifyResult::Ok;
      }
      // Solve the newer meta first.
      bool a_first = ha->index > hb->index;
      auto r = a_first ? solve(ha->index, sa, wb) : solve(hb->index, sb, wa);
      if (r == SolveResult::Solved) return UnifyResult::Ok;
      r = a_first ? solve(hb->index, sb, wa) : solve(ha->index, sa, wb);
      if (r == SolveResult::Solved) return UnifyResult::Ok;
      postpone(wa, wb);
      return UnifyResult::Ok;
    }
    if (flex_a || flex_b) {
      // Solve against the side as written so definitions stay folded.
      auto r = flex_a ? solve(ha->index, sa, b) : solve(hb->index, sb, a);
      switch (r) {
      case SolveResult::Solved:
        return UnifyResult::Ok;
      case SolveResult::Occurs:
        return UnifyResult::Occurs;
      case SolveResult::NotPattern:
        postpone(wa, wb);
        return UnifyResult::Ok;
      case SolveResult::Escapes:
        return UnifyResult::Fail;
      }
    }
    if (blocked_a || blocked_b) {
      Mark m = mark();
      if (unify_rigid(wa, wb) == UnifyResult::Ok) return UnifyResult::Ok;
      rollback(m);
      postpone(wa, wb);
      return UnifyResult::Ok;
    }
    return unify_rigid(wa, wb);
  }

  /// Retries postponed constraints until nothing changes.
  void solve_postponed() {
    for (;;) {
      if (postponed_.empty()) return;
      auto before_metas = solved_count();
      auto pending = std::move(postponed_);
      postponed_.clear();
      for (const auto& c : pending) {
        auto r = unify(c.first, c.second);
        if (r != UnifyResult::Ok) throw failure(r, c.first, c.second, {});
      }
      if (solved_count() == before_metas && postponed_.size() >= pending.size()) return;
    }
  }

  /// Errors when a constraint is still open after the retry round.
  void finish_constraints() {
    solve_postponed();
    if (!postponed_.empty()) {
      const auto& c = postponed_.front();
      throw Error(ErrorKind::UnificationFailure,
                  "cannot solve `" + show_closed(c.first) + " = " + show_closed(c.second) + "`");
    }
  }

  std::size_t open_constraints() const { return postponed_.size(); }

  /// Zonks and rejects remaining holes.
  Term finalize(const Term& t) {
    Term z = zonk(metas_, t);
    std::uint32_t which = 0;
    if (has_unsolved(metas_, z, &which)) {
      const auto& e = metas_.entry(which);
      throw Error(ErrorKind::UnsolvedMeta, "unsolved hole ?" + std::to_string(which) +
                                               (e.origin.empty() ? "" : " (" + e.origin + ")"));
    }
    return z;
  }

  Error failure(UnifyResult r, const Term& a, const Term& b, const std::vector<std::string>& names) {
    std::string msg = "cannot unify `" + show(names, a) + "` with `" + show(names, b) + "`";
    if (r == UnifyResult::Occurs) return Error(ErrorKind::OccursCheck, msg);
    return Error(ErrorKind::UnificationFailure, msg);
  }

  std::string show(const std::vector<std::string>& names, const Term& t) {
    Term z = zonk(metas_, t);
    try {
      Budget b{1'000'000};
      Reducer r(env_, b, &metas_);
      z = r.nf(z);
    } catch (const Error&) {
    }
    return print(z, names, {false, &env_});
  }

  // -------------------------------------------------------------------------
  // Elaboration

  Term check_type(Scope& s, const surface::Expr& e) { return check(s, e, Term::sort()); }

  Term check(Scope& s, const surface::Expr& e, const Term& expected) {
    using surface::ExprKind;
    Term ew = red_.whnf(expected);
    if (ew.is(Kind::Pi) && ew->implicit && !(e.kind == ExprKind::Lam && e.binders.front().implicit)) {
      s.push("", ew->name, ew->a);
      Term body = check(s, e, ew->b);
      s.pop();
      return Term::lam(ew->name, true, body);
    }
    switch (e.kind) {
    case ExprKind::Lam: {
      std::vector<FlatBinder> bs = flatten(e.binders);
      return check_lam(s, bs, 0, *e.a, expected);
    }
    case ExprKind::Pair: {
      Term sig = ew;
      if (is_flex(sig)) {
        Term A = fresh_meta(s, Term::sort(), "pair type at " + where(e));
        s.push("", Name("x"), A);
        Term B = fresh_meta(s, Term::sort(), "pair type at " + where(e));
        s.pop();
        expect_unify(s, sig, Term::sigma(Name("x"), A, B), e);
        sig = red_.whnf(sig);
      }
      if (!sig.is(Kind::Sigma)) throw mismatch_error(s, expected, Term(), "a pair at " + where(e));
      Term first = check(s, *e.a, sig->a);
      Term second = check(s, *e.b, subst_top(sig->b, first));
      return Term::pair(first, second);
    }
    case ExprKind::Hole:
      return fresh_meta(s, expected, "hole at " + where(e));
    case ExprKind::App:
    case ExprKind::Ident:
      return infer_app(s, e, &expected).first;
    default: {
      auto [t, ty] = infer(s, e);
      expect_unify(s, ty, expected, e);
      return t;
    }
    }
  }

  std::pair<Term, Term> infer(Scope& s, const surface::Expr& e, bool insert_implicits = true) {
    using surface::ExprKind;
    switch (e.kind) {
    case ExprKind::Ident:
    case ExprKind::App:
      return infer_app(s, e, nullptr, insert_implicits);
    case ExprKind::Hole: {
      Term ty = fresh_meta(s, Term::sort(), "type of hole at " + where(e));
      return {fresh_meta(s, ty, "hole at " + where(e)), ty};
    }
    case ExprKind::Type:
      return {Term::sort(), Term::sort()};
    case ExprKind::Lam: {
      auto bs = flatten(e.binders);
      std::vector<Term> doms;
      for (const auto& b : bs) {
        Term dom = b.type ? check_type(s, *b.type) : fresh_meta(s, Term::sort(), "binder type at " + where(e));
        s.push(b.name, Name(b.name), dom);
        doms.push_back(dom);
      }
      auto [body, bty] = infer(s, *e.a);
      for (std::size_t i = bs.size(); i-- > 0;) {
        s.pop();
        body = Term::lam(Name(bs[i].name), bs[i].implicit, body);
        bty = Term::pi(Name(bs[i].name), bs[i].implicit, doms[i], bty);
      }
      return {body, bty};
    }
    case ExprKind::Pi:
    case ExprKind::Sigma: {
      auto bs = flatten(e.binders);
      std::vector<Term> doms;
      for (const auto& b : bs) {
        Term dom = check_type(s, *b.type);
        s.push(b.name, Name(b.name), dom);
        doms.push_back(dom);
      }
      Term body = check_type(s, *e.a);
      for (std::size_t i = bs.size(); i-- > 0;) {
        s.pop();
        body = e.kind == ExprKind::Pi ? Term::pi(Name(bs[i].name), bs[i].implicit, doms[i], body)
                                      : Term::sigma(Name(bs[i].name), doms[i], body);
      }
      return {body, Term::sort()};
    }
    case ExprKind::Arrow:
    case ExprKind::Product: {
      Term dom = check_type(s, *e.a);
      s.push("", Name("_"), dom);
      Term cod = check_type(s, *e.b);
      s.pop();
      Term t = e.kind == ExprKind::Arrow ? Term::pi(Name("_"), false, dom, cod) : Term::sigma(Name("_"), dom, cod);
      return {t, Term::sort()};
    }
    case ExprKind::Eq: {
      Term id = global(Name("Id"));
      Term A = fresh_meta(s, Term::sort(), "type of equation at " + where(e));
      Term l = check(s, *e.a, A);
      Term r = check(s, *e.b, A);
      return {Term::app(Term::app(Term::app(id, A, true), l), r), Term::sort()};
    }
    case ExprKind::Pair: {
      auto [a, ta] = infer(s, *e.a);
      auto [b, tb] = infer(s, *e.b);
      return {Term::pair(a, b), Term::sigma(Name("_"), ta, shift(tb, 1))};
    }
    case ExprKind::Fst:
    case ExprKind::Snd: {
      auto [t, ty] = infer(s, *e.a);
      Term w = red_.whnf(ty);
      if (is_flex(w)) {
        Term A = fresh_meta(s, Term::sort(), "pair type at " + where(e));
        s.push("", Name("x"), A);
        Term B = fresh_meta(s, Term::sort(), "pair type at " + where(e));
        s.pop();
        expect_unify(s, w, Term::sigma(Name("x"), A, B), e);
        w = red_.whnf(w);
      }
      if (!w.is(Kind::Sigma))
        throw Error(ErrorKind::NotAPair, where(e) + ": `" + show(s.ctx.names(), t) + "` has type " +
                                             show(s.ctx.names(), ty));
      if (e.kind == ExprKind::Fst) return {Term::proj1(t), w->a};
      return {Term::proj2(t), subst_top(w->b, Term::proj1(t))};
    }
    }
    throw Error(ErrorKind::CannotInfer, where(e));
  }

  void expect_unify(Scope& s, const Term& actual, const Term& expected, const surface::Expr& e) {
    auto r = unify(actual, expected);
    if (r == UnifyResult::Occurs) throw failure(r, actual, expected, s.ctx.names());
    if (r != UnifyResult::Ok) throw mismatch_error(s, expected, actual, surface::print(e) + "` at `" + where(e));
  }

  Error mismatch_error(Scope& s, const Term& expected, const Term& actual, const std::string& what) {
    std::string msg = "`" + what + "`: expected " + show(s.ctx.names(), expected);
    if (actual) msg += ", got " + show(s.ctx.names(), actual);
    return Error(ErrorKind::TypeMismatch, msg);
  }

  Term global(Name n) {
    if (!env_.contains(n)) throw Error(ErrorKind::UnknownConstant, n.str());
    return Term::constant(n);
  }

  /// Resolves a name to a local variable, an alias or a global constant.
  std::pair<Term, Term> resolve(Scope& s, const surface::Expr& e) {
    for (std::size_t i = s.names.size(); i-- > 0;) {
      if (s.names[i] == e.name) {
        auto idx = static_cast<std::uint32_t>(s.names.size() - 1 - i);
        return {Term::var(idx), s.ctx.type_of(idx)};
      }
    }
    for (auto it = s.aliases.rbegin(); it != s.aliases.rend(); ++it) {
      if (it->first == e.name) {
        Term t = it->second;
        std::vector<Arg> args;
        Term h = unwind(t, args);
        return {t, metas_.entry(h->index).type};
      }
    }
    Name n(e.name);
    if (const ConstInfo* c = env_.find(n)) return {Term::constant(n), c->type};
    throw Error(ErrorKind::UnboundVariable, where(e) + ": `" + e.name + "` is not in scope");
  }

  /// Elaborates an application spine. With an expected type the result type is
  /// unified before the arguments are checked.
  std::pair<Term, Term> infer_app(Scope& s, const surface::Expr& e, const Term* expected,
                                  bool insert_implicits = true) {
    std::vector<std::pair<const surface::Expr*, bool>> args;
    const surface::Expr* head = &e;
    while (head->kind == surface::ExprKind::App) {
      args.emplace_back(head->b.get(), head->implicit);
      head = head->a.get();
    }
    std::reverse(args.begin(), args.end());
    Term h, ty;
    if (head->kind == surface::ExprKind::Ident) std::tie(h, ty) = resolve(s, *head);
    else std::tie(h, ty) = infer(s, *head, false);

    struct Pending {
      Term placeholder;
      const surface::Expr* arg;
      Term type;
    };
    std::vector<Pending> pending;
    std::size_t checked = 0;
    auto flush = [&] {
      for (; checked < pending.size(); ++checked) {
        const auto& p = pending[checked];
        Term t = check(s, *p.arg, p.type);
        if (unify(p.placeholder, t) != UnifyResult::Ok)
          throw mismatch_error(s, p.type, Term(), surface::print(*p.arg));
      }
    };
    for (const auto& [arg, imp] : args) {
      for (;;) {
        Term w = red_.whnf(ty);
        if (w.is(Kind::Pi)) {
          if (w->implicit && !imp) {
            Term m = fresh_meta(s, w->a, "implicit argument at " + where(*arg));
            h = Term::app(h, m, true);
            ty = subst_top(w->b, m);
            continue;
          }
          if (w->implicit != imp)
            throw Error(ErrorKind::NotAFunction, where(*arg) + ": unexpected implicit argument to `" +
                                                     show(s.ctx.names(), h) + "`");
          Term p = fresh_meta(s, w->a, "argument at " + where(*arg));
          pending.push_back({p, arg, w->a});
          h = Term::app(h, p, imp);
          ty = subst_top(w->b, p);
          break;
        }
        if (is_flex(w) && checked < pending.size()) {
          // The earlier arguments may determine the function type.
          flush();
          continue;
        }
        if (is_flex(w)) {
          Term A = fresh_meta(s, Term::sort(), "domain at " + where(*arg));
          s.push("", Name("x"), A);
          Term B = fresh_meta(s, Term::sort(), "codomain at " + where(*arg));
          s.pop();
          expect_unify(s, w, Term::pi(Name("x"), imp, A, B), *arg);
          continue;
        }
        throw Error(ErrorKind::NotAFunction, where(*arg) + ": `" + show(s.ctx.names(), h) + "` has type " +
                                                 show(s.ctx.names(), ty));
      }
    }
    if (expected || insert_implicits) {
      for (;;) {
        Term w = red_.whnf(ty);
        if (!w.is(Kind::Pi) || !w->implicit) break;
        Term m = fresh_meta(s, w->a, "implicit argument at " + where(e));
        h = Term::app(h, m, true);
        ty = subst_top(w->b, m);
      }
    }
    if (expected) expect_unify(s, ty, *expected, e);
    flush();
    return {h, ty};
  }

private:
  enum class SolveResult { Solved, NotPattern, Occurs, Escapes };

  struct FlatBinder {
    std::string name;
    bool implicit = false;
    const surface::Expr* type = nullptr;
  };

  static std::vector<FlatBinder> flatten(const std::vector<surface::Binder>& groups) {
    std::vector<FlatBinder> out;
    for (const auto& g : groups)
      for (const auto& n : g.names) out.push_back({n == "_" ? std::string() : n, g.implicit, g.type.get()});
    return out;
  }

  Term check_lam(Scope& s, const std::vector<FlatBinder>& bs, std::size_t i, const surface::Expr& body,
                 const Term& expected) {
    if (i == bs.size()) return check(s, body, expected);
    const auto& b = bs[i];
    Term w = red_.whnf(expected);
    if (is_flex(w)) {
      Term A = b.type ? check_type(s, *b.type) : fresh_meta(s, Term::sort(), "binder type of " + b.name);
      s.push("", Name(b.name), A);
      Term B = fresh_meta(s, Term::sort(), "codomain of " + b.name);
      s.pop();
      auto r = unify(w, Term::pi(Name(b.name), b.implicit, A, B));
      if (r != UnifyResult::Ok) throw failure(r, w, Term::pi(Name(b.name), b.implicit, A, B), s.ctx.names());
      w = red_.whnf(w);
    }
    if (!w.is(Kind::Pi)) throw mismatch_error(s, expected, Term(), "a lambda binding " + b.name);
    if (w->implicit && !b.implicit) {
      s.push("", w->name, w->a);
      Term inner = check_lam(s, bs, i, body, w->b);
      s.pop();
      return Term::lam(w->name, true, inner);
    }
    if (w->implicit != b.implicit) throw mismatch_error(s, expected, Term(), "a lambda binding " + b.name);
    if (b.type) {
      Term bt = check_type(s, *b.type);
      auto r = unify(bt, w->a);
      if (r != UnifyResult::Ok) throw mismatch_error(s, w->a, bt, "binder " + b.name);
    }
    s.push(b.name, Name(b.name.empty() ? "_" : b.name), w->a);
    Term inner = check_lam(s, bs, i + 1, body, w->b);
    s.pop();
    return Term::lam(Name(b.name.empty() ? "_" : b.name), b.implicit, inner);
  }

  bool is_flex(const Term& w) const {
    std::vector<Arg> args;
    Term h = unwind(w, args);
    return h.is(Kind::Meta) && metas_.flexible(h->index);
  }

  std::size_t solved_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < metas_.size(); ++i) n += metas_.solved(static_cast<std::uint32_t>(i));
    return n;
  }

  void postpone(const Term& a, const Term& b) { postponed_.emplace_back(a, b); }

  std::string show_closed(const Term& t) { return show({}, t); }

  UnifyResult unify_spines(const std::vector<Arg>& a, const std::vector<Arg>& b) {
    if (a.size() != b.size()) return UnifyResult::Fail;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].implicit != b[i].implicit) return UnifyResult::Fail;
      auto r = unify(a[i].term, b[i].term);
      if (r != UnifyResult::Ok) return r;
    }
    return UnifyResult::Ok;
  }

  UnifyResult unify_rigid(const Term& a, const Term& b) {
    if (a.is(Kind::Lam) && !b.is(Kind::Lam)) return unify(a->a, Term::app(shift(b, 1), Term::var(0), a->implicit));
    if (b.is(Kind::Lam) && !a.is(Kind::Lam)) return unify(Term::app(shift(a, 1), Term::var(0), b->implicit), b->a);
    if (a.is(Kind::Pair) && !b.is(Kind::Pair)) {
      auto r = unify(a->a, Term::proj1(b));
      return r != UnifyResult::Ok ? r : unify(a->b, Term::proj2(b));
    }
    if (b.is(Kind::Pair) && !a.is(Kind::Pair)) {
      auto r = unify(Term::proj1(a), b->a);
      return r != UnifyResult::Ok ? r : unify(Term::proj2(a), b->b);
    }
    switch (a.kind()) {
    case Kind::Sort:
      return b.is(Kind::Sort) ? UnifyResult::Ok : UnifyResult::Fail;
    case Kind::Pi:
    case Kind::Sigma:
    case Kind::Pair: {
      if (a.kind() != b.kind() || (a.is(Kind::Pi) && a->implicit != b->implicit)) return UnifyResult::Fail;
      auto r = unify(a->a, b->a);
      return r != UnifyResult::Ok ? r : unify(a->b, b->b);
    }
    case Kind::Lam:
      if (!b.is(Kind::Lam) || a->implicit != b->implicit) return UnifyResult::Fail;
      return unify(a->a, b->a);
    default:
      break;
    }
    Mark m = mark();
    auto r = unify_neutral(a, b);
    if (r == UnifyResult::Ok) return r;
    rollback(m);
    // Eta for stuck partial applications, as in conversion.
    for (bool imp : {false, true}) {
      Term ta = Term::app(shift(a, 1), Term::var(0), imp);
      Term tb = Term::app(shift(b, 1), Term::var(0), imp);
      Term wa = red_.whnf(ta), wb = red_.whnf(tb);
      if (equal(wa, ta) && equal(wb, tb)) continue;
      return unify(wa, wb);
    }
    return r;
  }

  UnifyResult unify_neutral(const Term& a, const Term& b) {
    std::vector<Arg> sa, sb;
    Term ha = unwind(a, sa);
    Term hb = unwind(b, sb);
    if (ha.kind() != hb.kind() || sa.size() != sb.size()) return UnifyResult::Fail;
    switch (ha.kind()) {
    case Kind::Var:
    case Kind::Meta:
      if (ha->index != hb->index) return UnifyResult::Fail;
      break;
    case Kind::Const:
      if (ha->name != hb->name) return UnifyResult::Fail;
      break;
    case Kind::Proj1:
    case Kind::Proj2: {
      auto r = unify(ha->a, hb->a);
      if (r != UnifyResult::Ok) return r;
      break;
    }
    default:
      return UnifyResult::Fail;
    }
    return unify_spines(sa, sb);
  }

  /// Miller pattern: solves `?m x1 .. xk = rhs` for distinct bound variables xi.
  SolveResult solve(std::uint32_t m, const std::vector<Arg>& spine, const Term& rhs_in) {
    std::vector<std::uint32_t> vars;
    for (const auto& a : spine) {
      Term w = red_.whnf(a.term);
      if (!w.is(Kind::Var) || a.implicit) return SolveResult::NotPattern;
      for (auto v : vars)
        if (v == w->index) return SolveResult::NotPattern;
      vars.push_back(w->index);
    }
    Term rhs = zonk(metas_, rhs_in);
    for (int attempt = 0; attempt < 2; ++attempt) {
      bool occurs = mentions_meta(rhs, m);
      bool ok = !occurs;
      Term body;
      if (ok) {
        auto renamed = rename(rhs, vars, 0);
        ok = renamed.has_value();
        if (ok) body = *renamed;
      }
      if (ok) {
        for (std::size_t i = vars.size(); i-- > 0;) body = Term::lam(Name("x"), spine[i].implicit, body);
        metas_.solve(m, body);
        return SolveResult::Solved;
      }
      if (attempt == 0) {
        rhs = zonk(metas_, red_.nf(rhs));
        continue;
      }
      return occurs ? SolveResult::Occurs : SolveResult::Escapes;
    }
    return SolveResult::Escapes;
  }

  bool mentions_meta(const Term& t, std::uint32_t m) const {
    if (!t->has_meta) return false;
    if (t.is(Kind::Meta)) return t->index == m;
    return (t->a && mentions_meta(t->a, m)) || (t->b && mentions_meta(t->b, m));
  }

  std::optional<Term> rename(const Term& t, const std::vector<std::uint32_t>& vars, std::uint32_t depth) {
    if (t->loose <= depth) return t;
    const auto k = static_cast<std::uint32_t>(vars.size());
    auto both = [&](auto make) -> std::optional<Term> {
      auto x = rename(t->a, vars, depth + (t.is(Kind::Lam) ? 1 : 0));
      if (!x) return std::nullopt;
      return make(*x);
    };
    switch (t.kind()) {
    case Kind::Var: {
      if (t->index < depth) return t;
      std::uint32_t outer = t->index - depth;
      for (std::uint32_t pos = 0; pos < k; ++pos)
        if (vars[pos] == outer) return Term::var(depth + (k - 1 - pos));
      return std::nullopt;
    }
    case Kind::Lam:
      return both([&](Term b) { return Term::lam(t->name, t->implicit, b); });
    case Kind::Proj1:
      return both([&](Term b) { return Term::proj1(b); });
    case Kind::Proj2:
      return both([&](Term b) { return Term::proj2(b); });
    case Kind::App:
    case Kind::Pair:
    case Kind::Pi:
    case Kind::Sigma: {
      auto x = rename(t->a, vars, depth);
      if (!x) return std::nullopt;
      bool binds = t.is(Kind::Pi) || t.is(Kind::Sigma);
      auto y = rename(t->b, vars, depth + (binds ? 1 : 0));
      if (!y) return std::nullopt;
      switch (t.kind()) {
      case Kind::App:
        return Term::app(*x, *y, t->implicit);
      case Kind::Pair:
        return Term::pair(*x, *y);
      case Kind::Pi:
        return Term::pi(t->name, t->implicit, *x, *y);
      default:
        return Term::sigma(t->name, *x, *y);
      }
    }
    default:
      return t;
    }
  }

  const Environment& env_;
  Budget& budget_;
  MetaStore metas_;
  Reducer red_;
  std::vector<std::pair<Term, Term>> postponed_;
  bool audit_ = false;
  int unify_depth_ = 0;
  std::vector<std::pair<Term, Term>> audit_log_;
};

} // namespace hitt
