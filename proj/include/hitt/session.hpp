#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hitt/coh.hpp"
#include "hitt/elaborator.hpp"
#include "hitt/environment.hpp"
#include "hitt/error.hpp"
#include "hitt/kernel.hpp"
#include "hitt/print.hpp"
#include "hitt/rewrite.hpp"
#include "hitt/rules.hpp"
#include "hitt/surface.hpp"

namespace hitt {

struct CheckOptions {
  std::uint64_t fuel = kDefaultFuel; // per declaration
  std::size_t coh_depth = kDefaultCohDepth;
  std::filesystem::path root;       // where imports are looked up; empty means next to the file
  bool audit = false;                // re-check every solved unification constraint with conv
};

struct CohRecord {
  std::string name;
  std::string witness;
  std::size_t depth = 0;
};

namespace detail {

inline FoTerm fo_pattern(const surface::Expr& e, const Environment& env) {
  FoTerm t;
  std::vector<const surface::Expr*> args;
  const surface::Expr* head = &e;
  while (head->kind == surface::ExprKind::App) {
    if (!head->implicit) args.push_back(head->b.get());
    head = head->a.get();
  }
  std::reverse(args.begin(), args.end());
  if (head->kind == surface::ExprKind::Hole && args.empty()) {
    t.kind = FoTerm::Kind::Var;
    t.name = "_";
    return t;
  }
  if (head->kind != surface::ExprKind::Ident) return t;
  if (!env.contains(Name(head->name))) {
    if (!args.empty()) return t;
    t.kind = FoTerm::Kind::Var;
    t.name = head->name;
    return t;
  }
  t.kind = FoTerm::Kind::Rigid;
  t.name = head->name;
  for (const auto* a : args) t.args.push_back(fo_pattern(*a, env));
  return t;
}

/// Collects calls to block members in a right-hand side.
class CallCollector {
public:
  CallCollector(const std::set<std::string>& block, const Environment& env) : block_(block), env_(env) {}

  void walk(const surface::Expr& e, std::vector<RecursiveCall>& out) {
    using surface::ExprKind;
    switch (e.kind) {
    case ExprKind::Ident:
    case ExprKind::App: {
      std::vector<const surface::Expr*> args;
      const surface::Expr* head = &e;
      while (head->kind == ExprKind::App) {
        walk(*head->b, out);
        if (!head->implicit) args.push_back(head->b.get());
        head = head->a.get();
      }
      if (head->kind == ExprKind::Ident) {
        if (block_.count(head->name) && !shadowed(head->name)) {
          std::reverse(args.begin(), args.end());
          RecursiveCall c;
          c.callee = head->name;
          c.text = surface::print(e);
          for (const auto* a : args) c.args.push_back(arg_term(*a));
          out.push_back(std::move(c));
        }
      } else {
        walk(*head, out);
      }
      return;
    }
    case ExprKind::Lam:
    case ExprKind::Pi:
    case ExprKind::Sigma: {
      std::size_t mark = bound_.size();
      for (const auto& b : e.binders) {
        if (b.type) walk(*b.type, out);
        for (const auto& n : b.names) bound_.push_back(n);
      }
      walk(*e.a, out);
      bound_.resize(mark);
      return;
    }
    default:
      if (e.a) walk(*e.a, out);
      if (e.b) walk(*e.b, out);
      return;
    }
  }

private:
  bool shadowed(const std::string& n) const { return std::find(bound_.begin(), bound_.end(), n) != bound_.end(); }

  FoTerm arg_term(const surface::Expr& e) const {
    if (e.kind == surface::ExprKind::Ident && shadowed(e.name)) return {};
    return fo_pattern(e, env_);
  }

  const std::set<std::string>& block_;
  const Environment& env_;
  std::vector<std::string> bound_;
};

} // namespace detail

/// Checks declarations into a growing environment.
class Session {
public:
  explicit Session(CheckOptions opts = {}) : opts_(std::move(opts)) {}

  Environment& env() { return env_; }
  const Environment& env() const { return env_; }
  const CheckOptions& options() const { return opts_; }

  std::uint64_t steps() const { return steps_; }
  std::size_t max_coh_depth() const { return max_coh_depth_; }
  const std::vector<CohRecord>& cohs() const { return cohs_; }
  const std::vector<std::string>& modules() const { return module_order_; }

  void reset_counters() {
    steps_ = 0;
    max_coh_depth_ = 0;
  }

  /// Checks a file and, first, everything it imports.
  void check_file(const std::filesystem::path& path) {
    std::string module = path.stem().string();
    if (env_.loaded(module)) return;
    surface::SourceFile f = surface::load_file(path.string());
    std::filesystem::path root = opts_.root.empty() ? path.parent_path() : opts_.root;
    check_source(f, module, root);
  }

  void check_source(const surface::SourceFile& f, const std::string& module, const std::filesystem::path& root) {
    if (std::find(in_progress_.begin(), in_progress_.end(), module) != in_progress_.end())
      throw Error(ErrorKind::BadDeclaration, "import cycle through " + module);
    in_progress_.push_back(module);
    for (const auto& d : f.decls) {
      if (d.kind == surface::DeclKind::Import) {
        if (env_.loaded(d.name)) continue;
        auto p = root / (d.name + ".hit");
        if (!std::filesystem::exists(p)) throw Error(ErrorKind::Io, "import " + d.name + ": no file " + p.string());
        surface::SourceFile g = surface::load_file(p.string());
        check_source(g, d.name, root);
        continue;
      }
      check_decl(d);
    }
    in_progress_.pop_back();
    env_.mark_loaded(module);
    module_order_.push_back(module);
  }

  void check_decl(const surface::Decl& d) {
    using surface::DeclKind;
    Budget budget{opts_.fuel};
    try {
      switch (d.kind) {
      case DeclKind::Postulate: {
        Term ty = elaborate_type(*d.type, budget);
        env_.declare(Name(d.name), hitt::DeclKind::Postulate, ty);
        break;
      }
      case DeclKind::Def:
        if (d.body) check_plain_def(d, budget);
        else check_block({&d}, budget);
        break;
      case DeclKind::Mutual: {
        std::vector<const surface::Decl*> members;
        for (const auto& m : d.members) members.push_back(&m);
        check_block(members, budget);
        break;
      }
      case DeclKind::Rewrite: {
        RuleSpec spec = pragma_rule(env_, Name(d.name), budget);
        env_.add_rule(compile_rule(env_, spec, budget));
        break;
      }
      case DeclKind::Instance: {
        const ConstInfo& c = env_.at(Name(d.name));
        Reducer red(env_, budget);
        Term t = c.type;
        while (t.is(Kind::Pi)) t = t->b;
        if (!is_coh_type(red, t))
          throw Error(ErrorKind::BadDeclaration, "instance " + d.name + " does not conclude in `Coh _`");
        env_.add_instance(Name(d.name));
        break;
      }
      case DeclKind::Coh: {
        Term ty = elaborate_type(*d.type, budget);
        Elaborator el(env_, budget);
        if (opts_.audit) el.enable_audit();
        CohSolution sol = solve_coh(el, ty, opts_.coh_depth);
        run_audit(el);
        env_.declare(Name(d.name), hitt::DeclKind::Definition, ty);
        RuleSpec spec;
        spec.name = Name(d.name);
        spec.origin = RuleOrigin::CompiledDefinition;
        spec.lhs = Term::constant(Name(d.name));
        spec.rhs = sol.term;
        env_.add_rule(compile_rule(env_, spec, budget));
        cohs_.push_back({d.name, sol.printed, sol.depth});
        max_coh_depth_ = std::max(max_coh_depth_, sol.depth);
        break;
      }
      case DeclKind::Import:
        throw Error(ErrorKind::BadDeclaration, "import outside a file");
      }
    } catch (const Error& e) {
      steps_ += budget.steps;
      std::string at = std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column);
      throw Error(e.kind(), at + " " + d.name + ": " + strip_kind(e));
    }
    steps_ += budget.steps;
  }

  std::size_t audited() const { return audited_; }

private:
  void run_audit(Elaborator& el) {
    if (opts_.audit) audited_ += el.audit();
  }

  static std::string strip_kind(const Error& e) {
    std::string s = e.what();
    std::string prefix = std::string(to_string(e.kind())) + ": ";
    return s.rfind(prefix, 0) == 0 ? s.substr(prefix.size()) : s;
  }

  Term elaborate_type(const surface::Expr& e, Budget& budget) {
    Elaborator el(env_, budget);
    if (opts_.audit) el.enable_audit();
    Scope s;
    Term ty = el.check_type(s, e);
    el.finish_constraints();
    run_audit(el);
    ty = el.finalize(ty);
    TypeChecker tc(env_, budget);
    Context ctx;
    tc.check(ctx, ty, Term::sort());
    return ty;
  }

  void check_plain_def(const surface::Decl& d, Budget& budget) {
    Term ty = elaborate_type(*d.type, budget);
    Elaborator el(env_, budget);
    if (opts_.audit) el.enable_audit();
    Scope s;
    Term body = el.check(s, *d.body, ty);
    el.finish_constraints();
    run_audit(el);
    body = el.finalize(body);
    env_.declare(Name(d.name), hitt::DeclKind::Definition, ty);
    RuleSpec spec;
    spec.name = Name(d.name);
    spec.origin = RuleOrigin::CompiledDefinition;
    spec.lhs = Term::constant(Name(d.name));
    spec.rhs = body;
    try {
      env_.add_rule(compile_rule(env_, spec, budget));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IllTypedRule) throw Error(ErrorKind::TypeMismatch, strip_kind(e));
      throw;
    }
  }

  /// Definitions by clauses, possibly mutually recursive. Termination is checked
  /// on the whole block before anything is committed.
  void check_block(const std::vector<const surface::Decl*>& members, Budget& budget) {
    std::set<std::string> names;
    for (const auto* m : members) {
      if (m->kind != surface::DeclKind::Def)
        throw Error(ErrorKind::BadDeclaration, "only definitions may appear in a mutual block");
      names.insert(m->name);
    }
    std::vector<TerminationClause> tcs;
    for (const auto* m : members) {
      for (const auto& c : m->clauses) {
        TerminationClause tc;
        tc.function = m->name;
        const surface::Expr* head = c.lhs.get();
        std::vector<const surface::Expr*> pats;
        while (head->kind == surface::ExprKind::App) {
          if (!head->implicit) pats.push_back(head->b.get());
          head = head->a.get();
        }
        std::reverse(pats.begin(), pats.end());
        for (const auto* p : pats) tc.patterns.push_back(detail::fo_pattern(*p, env_));
        detail::CallCollector cc(names, env_);
        cc.walk(*c.rhs, tc.calls);
        tcs.push_back(std::move(tc));
      }
      if (m->body) {
        TerminationClause tc;
        tc.function = m->name;
        detail::CallCollector cc(names, env_);
        cc.walk(*m->body, tc.calls);
        tcs.push_back(std::move(tc));
      }
    }
    check_termination(tcs);

    std::vector<Term> types;
    for (const auto* m : members) {
      Term ty = elaborate_type(*m->type, budget);
      env_.declare(Name(m->name), hitt::DeclKind::Definition, ty);
      types.push_back(ty);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto* m = members[i];
      Name fname(m->name);
      if (m->body) {
        Elaborator el(env_, budget);
        if (opts_.audit) el.enable_audit();
        Scope s;
        Term body = el.check(s, *m->body, types[i]);
        el.finish_constraints();
        run_audit(el);
        RuleSpec spec;
        spec.name = fname;
        spec.origin = RuleOrigin::CompiledDefinition;
        spec.lhs = Term::constant(fname);
        spec.rhs = el.finalize(body);
        env_.add_rule(compile_rule(env_, spec, budget));
        continue;
      }
      for (const auto& c : m->clauses) {
        Elaborator el(env_, budget);
        if (opts_.audit) el.enable_audit();
        RuleSpec spec = elaborate_clause(el, fname, types[i], c);
        run_audit(el);
        try {
          env_.add_rule(compile_rule(env_, spec, budget));
        } catch (const Error& e) {
          throw Error(e.kind(), std::to_string(c.pos.line) + ":" + std::to_string(c.pos.column) + ": " +
                                    strip_kind(e));
        }
      }
    }
  }

  CheckOptions opts_;
  Environment env_;
  std::uint64_t steps_ = 0;
  std::size_t max_coh_depth_ = 0;
  std::vector<CohRecord> cohs_;
  std::vector<std::string> in_progress_;
  std::vector<std::string> module_order_;
  std::size_t audited_ = 0;
};

// ---------------------------------------------------------------------------
// Serialization

inline std::string print_pattern(const Pattern& p, const std::vector<std::string>& names, const Environment& env) {
  switch (p.kind) {
  case Pattern::Kind::Var:
    return names.at(p.var);
  case Pattern::Kind::Wild:
    return "_";
  case Pattern::Kind::Closed:
    return "(" + print(p.closed, {}, {true, &env}) + ")";
  case Pattern::Kind::Rigid: {
    if (p.args.empty()) return p.head.str();
    std::string s = "(" + p.head.str();
    for (const auto& a : p.args) {
      std::string inner = print_pattern(a.pattern, names, env);
      s += a.implicit ? " {" + inner + "}" : " " + inner;
    }
    return s + ")";
  }
  }
  return "?";
}

/// Canonical text dump of an environment: declarations in order, implicit
/// arguments shown, rules under their head.
inline std::string serialize(const Environment& env) {
  std::ostringstream out;
  PrintOptions opts{true, &env};
  for (Name n : env.order()) {
    const ConstInfo& c = env.at(n);
    out << (c.kind == DeclKind::Postulate ? "postulate " : "def ") << n << " : " << print(c.type, {}, opts) << '\n';
    for (const auto& r : c.rules) {
      std::vector<std::string> names;
      for (std::size_t i = 0; i < r.telescope_names.size(); ++i)
        names.push_back(r.telescope_names[i].str() + "." + std::to_string(i));
      out << "  rule " << r.name << (r.origin == RuleOrigin::UserPragma ? " [pragma]" : "") << ": " << n;
      for (const auto& a : r.spine) {
        std::string inner = print_pattern(a.pattern, names, env);
        out << (a.implicit ? " {" + inner + "}" : " " + inner);
      }
      out << " => " << print(r.replacement, names, opts) << '\n';
    }
  }
  for (Name i : env.instances()) out << "instance " << i << '\n';
  return out.str();
}

} // namespace hitt
