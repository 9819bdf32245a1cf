#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "hitt/environment.hpp"
#include "hitt/term.hpp"

namespace hitt {

struct PrintOptions {
  bool show_implicit = false;
  const Environment* env = nullptr; // binder names avoid its constants when set
};

namespace detail {

class CorePrinter {
public:
  CorePrinter(std::vector<std::string> scope, PrintOptions opts) : scope_(std::move(scope)), opts_(opts) {}

  // Precedence levels: 0 binders/arrows, 1 equality, 2 product, 3 application, 4 atom.
  void print(const Term& t, int level) {
    switch (t.kind()) {
    case Kind::Sort:
      out_ << "Type";
      return;
    case Kind::Const:
      out_ << t->name;
      return;
    case Kind::Meta:
      out_ << '?' << t->index;
      return;
    case Kind::Var:
      if (t->index < scope_.size()) out_ << scope_[scope_.size() - 1 - t->index];
      else out_ << "#" << t->index;
      return;
    case Kind::Lam:
      open(level, 0);
      out_ << "\\";
      {
        Term cur = t;
        std::size_t pushed = 0;
        while (cur.is(Kind::Lam)) {
          std::string n = fresh(cur->name);
          out_ << (cur->implicit ? "{" + n + "}" : n) << ' ';
          scope_.push_back(n);
          ++pushed;
          cur = cur->a;
        }
        out_ << "-> ";
        print(cur, 0);
        scope_.resize(scope_.size() - pushed);
      }
      close(level, 0);
      return;
    case Kind::Pi:
      open(level, 0);
      if (t->implicit || mentions_var(t->b, 0)) {
        std::string n = fresh(t->name);
        out_ << (t->implicit ? '{' : '(') << n << " : ";
        print(t->a, 0);
        out_ << (t->implicit ? '}' : ')') << " -> ";
        scope_.push_back(n);
        print(t->b, 0);
        scope_.pop_back();
      } else {
        print(t->a, 1);
        out_ << " -> ";
        scope_.push_back("_");
        print(t->b, 0);
        scope_.pop_back();
      }
      close(level, 0);
      return;
    case Kind::Sigma:
      if (mentions_var(t->b, 0)) {
        open(level, 0);
        std::string n = fresh(t->name);
        out_ << '(' << n << " : ";
        print(t->a, 0);
        out_ << ") * ";
        scope_.push_back(n);
        print(t->b, 0);
        scope_.pop_back();
        close(level, 0);
      } else {
        open(level, 2);
        print(t->a, 3);
        out_ << " * ";
        scope_.push_back("_");
        print(t->b, 2);
        scope_.pop_back();
        close(level, 2);
      }
      return;
    case Kind::Pair:
      out_ << '(';
      print(t->a, 0);
      out_ << " , ";
      print(t->b, 0);
      out_ << ')';
      return;
    case Kind::Proj1:
    case Kind::Proj2:
      open(level, 3);
      out_ << (t.is(Kind::Proj1) ? "fst " : "snd ");
      print(t->a, 4);
      close(level, 3);
      return;
    case Kind::App:
      print_app(t, level);
      return;
    }
  }

  std::string str() const { return out_.str(); }

private:
  void print_app(const Term& t, int level) {
    std::vector<Arg> args;
    Term head = unwind(t, args);
    if (!opts_.show_implicit && head.is(Kind::Const) && head->name.str() == "Id" && args.size() == 3 &&
        args[0].implicit && !args[1].implicit && !args[2].implicit) {
      open(level, 1);
      print(args[1].term, 2);
      out_ << " == ";
      print(args[2].term, 2);
      close(level, 1);
      return;
    }
    std::vector<const Arg*> shown;
    for (const auto& a : args)
      if (!a.implicit || opts_.show_implicit) shown.push_back(&a);
    if (shown.empty()) {
      print(head, level);
      return;
    }
    open(level, 3);
    print(head, 3);
    for (const Arg* a : shown) {
      out_ << ' ';
      if (a->implicit) {
        out_ << '{';
        print(a->term, 0);
        out_ << '}';
      } else {
        print(a->term, 4);
      }
    }
    close(level, 3);
  }

  void open(int level, int own) {
    if (own < level) out_ << '(';
  }
  void close(int level, int own) {
    if (own < level) out_ << ')';
  }

  std::string fresh(Name hint) {
    std::string base = hint.empty_name() || hint.str() == "_" ? "x" : hint.str();
    std::string cand = base;
    for (int i = 1; taken(cand); ++i) cand = base + std::to_string(i);
    return cand;
  }

  bool taken(const std::string& n) const {
    for (const auto& s : scope_)
      if (s == n) return true;
    if (opts_.env && opts_.env->contains(Name(n))) return true;
    return false;
  }

  std::vector<std::string> scope_;
  PrintOptions opts_;
  std::ostringstream out_;
};

} // namespace detail

/// Renders a core term in surface syntax. `scope` names the free variables,
/// innermost last.
inline std::string print(const Term& t, std::vector<std::string> scope = {}, PrintOptions opts = {}) {
  detail::CorePrinter p(std::move(scope), opts);
  p.print(t, 0);
  return p.str();
}

} // namespace hitt
