#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hitt/name.hpp"

namespace hitt {

enum class Kind : std::uint8_t { Var, Lam, App, Pi, Sigma, Pair, Proj1, Proj2, Sort, Const, Meta };

struct Node;

/// Immutable core term with nameless variables. Cheap to copy; subterms are shared.
class Term {
public:
  Term() = default;

  static Term var(std::uint32_t index);
  static Term lam(Name hint, bool implicit, Term body);
  static Term app(Term fn, Term arg, bool implicit = false);
  static Term pi(Name hint, bool implicit, Term domain, Term codomain);
  static Term sigma(Name hint, Term first, Term second);
  static Term pair(Term first, Term second);
  static Term proj1(Term of);
  static Term proj2(Term of);
  static Term sort();
  static Term constant(Name name);
  static Term meta(std::uint32_t id);

  explicit operator bool() const { return node_ != nullptr; }
  const Node& operator*() const { return *node_; }
  const Node* operator->() const { return node_.get(); }
  const Node* get() const { return node_.get(); }

  Kind kind() const;
  bool is(Kind k) const { return node_ && kind() == k; }

  friend bool same_node(const Term& a, const Term& b) { return a.node_ == b.node_; }

private:
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(Node n);
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Sort;
  bool implicit = false;
  std::uint32_t index = 0; // Var index or Meta id
  Name name;               // Const name or binder hint
  Term a;                  // body / fn / domain / first / projected term
  Term b;                  // arg / codomain / second
  std::uint32_t loose = 0; // every free Var index is < loose
  bool has_meta = false;
  std::uint32_t size = 1;
};

inline Kind Term::kind() const { return node_->kind; }

inline Term Term::make(Node n) {
  auto sat_add = [](std::uint32_t x, std::uint32_t y) {
    std::uint64_t s = std::uint64_t{x} + y;
    return s > 0xffffffffu ? 0xffffffffu : static_cast<std::uint32_t>(s);
  };
  if (n.a) {
    n.has_meta = n.has_meta || n.a->has_meta;
    n.size = sat_add(n.size, n.a->size);
  }
  if (n.b) {
    n.has_meta = n.has_meta || n.b->has_meta;
    n.size = sat_add(n.size, n.b->size);
  }
  return Term(std::make_shared<const Node>(std::move(n)));
}

inline Term Term::var(std::uint32_t index) {
  Node n;
  n.kind = Kind::Var;
  n.index = index;
  n.loose = index + 1;
  return make(std::move(n));
}

inline Term Term::lam(Name hint, bool implicit, Term body) {
  Node n;
  n.kind = Kind::Lam;
  n.name = hint;
  n.implicit = implicit;
  n.loose = body->loose > 0 ? body->loose - 1 : 0;
  n.a = std::move(body);
  return make(std::move(n));
}

inline Term Term::app(Term fn, Term arg, bool implicit) {
  Node n;
  n.kind = Kind::App;
  n.implicit = implicit;
  n.loose = std::max(fn->loose, arg->loose);
  n.a = std::move(fn);
  n.b = std::move(arg);
  return make(std::move(n));
}

inline Term Term::pi(Name hint, bool implicit, Term domain, Term codomain) {
  Node n;
  n.kind = Kind::Pi;
  n.name = hint;
  n.implicit = implicit;
  n.loose = std::max(domain->loose, codomain->loose > 0 ? codomain->loose - 1 : 0u);
  n.a = std::move(domain);
  n.b = std::move(codomain);
  return make(std::move(n));
}

inline Term Term::sigma(Name hint, Term first, Term second) {
  Node n;
  n.kind = Kind::Sigma;
  n.name = hint;
  n.loose = std::max(first->loose, second->loose > 0 ? second->loose - 1 : 0u);
  n.a = std::move(first);
  n.b = std::move(second);
  return make(std::move(n));
}

inline Term Term::pair(Term first, Term second) {
  Node n;
  n.kind = Kind::Pair;
  n.loose = std::max(first->loose, second->loose);
  n.a = std::move(first);
  n.b = std::move(second);
  return make(std::move(n));
}

inline Term Term::proj1(Term of) {
  Node n;
  n.kind = Kind::Proj1;
  n.loose = of->loose;
  n.a = std::move(of);
  return make(std::move(n));
}

inline Term Term::proj2(Term of) {
  Node n;
  n.kind = Kind::Proj2;
  n.loose = of->loose;
  n.a = std::move(of);
  return make(std::move(n));
}

inline Term Term::sort() {
  static const Term s = [] {
    Node n;
    n.kind = Kind::Sort;
    return make(std::move(n));
  }();
  return s;
}

inline Term Term::constant(Name name) {
  Node n;
  n.kind = Kind::Const;
  n.name = name;
  return make(std::move(n));
}

inline Term Term::meta(std::uint32_t id) {
  Node n;
  n.kind = Kind::Meta;
  n.index = id;
  n.has_meta = true;
  return make(std::move(n));
}

// ---------------------------------------------------------------------------
// Spines

struct Arg {
  Term term;
  bool implicit = false;
};

/// Strips applications: `f a b` becomes head `f` with args [a, b].
inline Term unwind(const Term& t, std::vector<Arg>& args) {
  Term head = t;
  std::size_t start = args.size();
  while (head.is(Kind::App)) {
    args.push_back({head->b, head->implicit});
    head = head->a;
  }
  std::reverse(args.begin() + static_cast<std::ptrdiff_t>(start), args.end());
  return head;
}

inline Term apply_args(Term head, std::span<const Arg> args) {
  for (const auto& a : args) head = Term::app(std::move(head), a.term, a.implicit);
  return head;
}

// ---------------------------------------------------------------------------
// Shifting and substitution

/// Adds `delta` to every variable index >= cutoff.
inline Term shift(const Term& t, std::int64_t delta, std::uint32_t cutoff = 0) {
  if (delta == 0 || t->loose <= cutoff) return t;
  switch (t.kind()) {
  case Kind::Var:
    return Term::var(static_cast<std::uint32_t>(static_cast<std::int64_t>(t->index) + delta));
  case Kind::Lam:
    return Term::lam(t->name, t->implicit, shift(t->a, delta, cutoff + 1));
  case Kind::App:
    return Term::app(shift(t->a, delta, cutoff), shift(t->b, delta, cutoff), t->implicit);
  case Kind::Pi:
    return Term::pi(t->name, t->implicit, shift(t->a, delta, cutoff), shift(t->b, delta, cutoff + 1));
  case Kind::Sigma:
    return Term::sigma(t->name, shift(t->a, delta, cutoff), shift(t->b, delta, cutoff + 1));
  case Kind::Pair:
    return Term::pair(shift(t->a, delta, cutoff), shift(t->b, delta, cutoff));
  case Kind::Proj1:
    return Term::proj1(shift(t->a, delta, cutoff));
  case Kind::Proj2:
    return Term::proj2(shift(t->a, delta, cutoff));
  default:
    return t;
  }
}

namespace detail {

inline Term instantiate_at(const Term& t, std::span<const Term> vals, std::uint32_t depth) {
  if (t->loose <= depth) return t;
  const auto k = static_cast<std::uint32_t>(vals.size());
  switch (t.kind()) {
  case Kind::Var: {
    std::uint32_t i = t->index;
    if (i < depth) return t;
    if (i < depth + k) return shift(vals[i - depth], depth);
    return Term::var(i - k);
  }
  case Kind::Lam:
    return Term::lam(t->name, t->implicit, instantiate_at(t->a, vals, depth + 1));
  case Kind::App:
    return Term::app(instantiate_at(t->a, vals, depth), instantiate_at(t->b, vals, depth), t->implicit);
  case Kind::Pi:
    return Term::pi(t->name, t->implicit, instantiate_at(t->a, vals, depth),
                    instantiate_at(t->b, vals, depth + 1));
  case Kind::Sigma:
    return Term::sigma(t->name, instantiate_at(t->a, vals, depth), instantiate_at(t->b, vals, depth + 1));
  case Kind::Pair:
    return Term::pair(instantiate_at(t->a, vals, depth), instantiate_at(t->b, vals, depth));
  case Kind::Proj1:
    return Term::proj1(instantiate_at(t->a, vals, depth));
  case Kind::Proj2:
    return Term::proj2(instantiate_at(t->a, vals, depth));
  default:
    return t;
  }
}

} // namespace detail

/// Replaces Var(i) for i < vals.size() by vals[i] and lowers the remaining free variables.
inline Term instantiate(const Term& t, std::span<const Term> vals) {
  return detail::instantiate_at(t, vals, 0);
}

/// Substitutes `arg` for the outermost bound variable of a binder body.
inline Term subst_top(const Term& body, const Term& arg) {
  return detail::instantiate_at(body, std::span<const Term>(&arg, 1), 0);
}

/// Beta-reduces `fn` applied to args only where fn is literally a lambda.
inline Term beta_apply(Term fn, std::span<const Arg> args) {
  std::size_t i = 0;
  while (i < args.size() && fn.is(Kind::Lam)) fn = subst_top(fn->a, args[i++].term);
  return apply_args(std::move(fn), args.subspan(i));
}

/// Syntactic identity modulo binder hints.
inline bool equal(const Term& x, const Term& y) {
  if (same_node(x, y)) return true;
  if (x.kind() != y.kind() || x->loose != y->loose || x->size != y->size) return false;
  switch (x.kind()) {
  case Kind::Var:
  case Kind::Meta:
    return x->index == y->index;
  case Kind::Const:
    return x->name == y->name;
  case Kind::Sort:
    return true;
  case Kind::Lam:
    return x->implicit == y->implicit && equal(x->a, y->a);
  case Kind::App:
  case Kind::Pi:
    return x->implicit == y->implicit && equal(x->a, y->a) && equal(x->b, y->b);
  case Kind::Sigma:
  case Kind::Pair:
    return equal(x->a, y->a) && equal(x->b, y->b);
  case Kind::Proj1:
  case Kind::Proj2:
    return equal(x->a, y->a);
  }
  return false;
}

inline bool mentions_var(const Term& t, std::uint32_t index) {
  if (t->loose <= index) return false;
  switch (t.kind()) {
  case Kind::Var:
    return t->index == index;
  case Kind::Lam:
    return mentions_var(t->a, index + 1);
  case Kind::Pi:
  case Kind::Sigma:
    return mentions_var(t->a, index) || mentions_var(t->b, index + 1);
  case Kind::App:
  case Kind::Pair:
    return mentions_var(t->a, index) || mentions_var(t->b, index);
  case Kind::Proj1:
  case Kind::Proj2:
    return mentions_var(t->a, index);
  default:
    return false;
  }
}

inline bool mentions_const(const Term& t, Name name) {
  switch (t.kind()) {
  case Kind::Const:
    return t->name == name;
  case Kind::Var:
  case Kind::Sort:
  case Kind::Meta:
    return false;
  default:
    return (t->a && mentions_const(t->a, name)) || (t->b && mentions_const(t->b, name));
  }
}

} // namespace hitt
