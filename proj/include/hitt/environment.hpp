#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hitt/error.hpp"
#include "hitt/name.hpp"
#include "hitt/term.hpp"

namespace hitt {

struct PatternArg;

/// Left-hand-side pattern of a rewrite rule. Rule variables are numbered by
/// their position in the rule telescope (0 = outermost).
struct Pattern {
  enum class Kind : std::uint8_t {
    Var,    // binds rule variable `var`
    Rigid,  // constant `head` applied to `args`
    Closed, // matched up to conversion against `closed`
    Wild,   // forced position, matched by anything
  };
  Kind kind = Kind::Wild;
  std::uint32_t var = 0;
  Name head;
  std::vector<PatternArg> args;
  Term closed;

  static Pattern variable(std::uint32_t v) {
    Pattern p;
    p.kind = Kind::Var;
    p.var = v;
    return p;
  }
  static Pattern rigid(Name head, std::vector<PatternArg> args);
  static Pattern closed_term(Term t) {
    Pattern p;
    p.kind = Kind::Closed;
    p.closed = std::move(t);
    return p;
  }
  static Pattern wild() { return {}; }
};

struct PatternArg {
  Pattern pattern;
  bool implicit = false;
};

inline Pattern Pattern::rigid(Name head, std::vector<PatternArg> args) {
  Pattern p;
  p.kind = Kind::Rigid;
  p.head = head;
  p.args = std::move(args);
  return p;
}

enum class RuleOrigin { UserPragma, CompiledDefinition };

struct RewriteRule {
  Name name; // declaration the rule came from
  Name head;
  std::vector<PatternArg> spine;
  Term lhs;                          // over the rule telescope
  Term replacement;                  // over the rule telescope
  std::vector<Term> telescope;       // types of rule variables, each in its prefix
  std::vector<Name> telescope_names; // hints for printing
  RuleOrigin origin = RuleOrigin::UserPragma;

  std::size_t arity() const { return spine.size(); }
};

enum class DeclKind { Postulate, Definition };

struct ConstInfo {
  Name name;
  DeclKind kind = DeclKind::Postulate;
  Term type;
  std::vector<RewriteRule> rules;
};

/// Append-only table of global declarations. A copy is an independent snapshot.
class Environment {
public:
  const ConstInfo* find(Name n) const {
    auto it = consts_.find(n);
    return it == consts_.end() ? nullptr : &it->second;
  }

  const ConstInfo& at(Name n) const {
    if (const auto* c = find(n)) return *c;
    throw Error(ErrorKind::UnknownConstant, n.str());
  }

  bool contains(Name n) const { return consts_.count(n) != 0; }

  void declare(Name n, DeclKind kind, Term type) {
    if (contains(n)) throw Error(ErrorKind::DuplicateDeclaration, n.str());
    consts_.emplace(n, ConstInfo{n, kind, std::move(type), {}});
    order_.push_back(n);
  }

  void add_rule(RewriteRule rule) {
    auto it = consts_.find(rule.head);
    if (it == consts_.end()) throw Error(ErrorKind::HeadNotDeclared, rule.head.str());
    it->second.rules.push_back(std::move(rule));
  }

  void add_instance(Name n) {
    if (!contains(n)) throw Error(ErrorKind::UnknownConstant, n.str());
    instances_.push_back(n);
  }

  void mark_loaded(const std::string& module) { modules_.push_back(module); }
  bool loaded(const std::string& module) const {
    for (const auto& m : modules_)
      if (m == module) return true;
    return false;
  }

  const std::vector<Name>& order() const { return order_; }
  const std::vector<Name>& instances() const { return instances_; }
  std::size_t size() const { return order_.size(); }

private:
  std::unordered_map<Name, ConstInfo, NameHash> consts_;
  std::vector<Name> order_;
  std::vector<Name> instances_;
  std::vector<std::string> modules_;
};

} // namespace hitt
