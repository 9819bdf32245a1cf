#pragma once

// Oracles shared by the unit tests and the acceptance runner.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hitt/set_model.hpp"
#include "support.hpp"

namespace testing_support {

inline std::string coh_witness(const hitt::Session& s, const std::string& name, std::size_t* depth = nullptr) {
  for (const auto& r : s.cohs())
    if (r.name == name) {
      if (depth) *depth = r.depth;
      return r.witness;
    }
  return "<none>";
}

inline hitt::surface::Decl goal_decl(const std::string& file, const std::string& name) {
  auto f = hitt::surface::load_file((corpus_dir() / (file + ".hit")).string());
  for (const auto& d : f.decls)
    if (d.name == name) return d;
  throw std::runtime_error("no goal " + name + " in " + file);
}

struct ShortestWitnesses {
  std::size_t length = 0;
  std::vector<std::string> chains; // every witness of that length, without parentheses
  std::size_t tried = 0;
};

/// Shortest coherence witnesses by exhaustive search: every chain of J / J-rev
/// ending in idp-Coh, shortest first, each elaborated against the goal by
/// ordinary checking in a session holding `modules`.
inline ShortestWitnesses bfs_witnesses(const std::vector<std::string>& modules, const hitt::surface::Decl& goal,
                                       std::size_t max_depth) {
  hitt::Session s = session_with(modules);
  std::string lam = "\\";
  for (const auto& b : goal.type->binders)
    for (const auto& n : b.names) lam += b.implicit ? " {" + n + "}" : " " + n;
  lam += " -> ";
  std::string type = hitt::surface::print(*goal.type);
  ShortestWitnesses out;
  int fresh = 0;
  for (std::size_t len = 1; len <= max_depth && out.chains.empty(); ++len) {
    std::size_t chains = std::size_t{1} << (len - 1);
    for (std::size_t code = 0; code < chains; ++code) {
      std::string nested = "idp-Coh", flat = "idp-Coh";
      for (std::size_t i = 0; i + 1 < len; ++i) {
        const char* inst = (code >> i) & 1 ? "J-rev" : "J";
        nested = std::string(inst) + " (" + nested + ")";
        flat = std::string(inst) + " " + flat;
      }
      ++out.tried;
      try {
        declare(s, "def bfs-" + std::to_string(fresh++) + " : " + type + "\n  = " + lam + nested);
      } catch (const hitt::Error&) {
        continue;
      }
      out.length = len;
      out.chains.push_back(flat);
    }
  }
  return out;
}

inline std::string unparen(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != '(' && c != ')') out += c;
  return out;
}

inline std::string numeral(int k) {
  std::string s = "O";
  for (int i = 0; i < k; ++i) s = "S (" + s + ")";
  return s;
}

/// conv of `inJ (S n) (iota n x)` against `alphaJ star (inJ n x)`, with n a
/// variable when `k` is empty and the numeral k otherwise.
inline bool inclusion_equation_converts(hitt::Session& s, std::optional<int> k) {
  Locals l = k ? locals(s, {{"x", "Jn (" + numeral(*k) + ")"}}) : locals(s, {{"n", "Nat"}, {"x", "Jn n"}});
  std::string n = k ? "(" + numeral(*k) + ")" : "n";
  hitt::Term lhs = term(s, "inJ (S " + n + ") (iota " + n + " x)", &l);
  hitt::Term rhs = term(s, "alphaJ star (inJ " + n + " x)", &l);
  return hitt::conv(s.env(), l.scope.ctx, lhs, rhs);
}

struct SubjectReduction {
  std::size_t rules = 0;
  std::vector<std::string> failures;
};

/// For every rule compiled from a definition, the normal form of its
/// replacement checks against the type of its left-hand side.
inline SubjectReduction subject_reduction(const hitt::Environment& env) {
  SubjectReduction out;
  for (hitt::Name name : env.order()) {
    for (const auto& r : env.at(name).rules) {
      if (r.origin != hitt::RuleOrigin::CompiledDefinition) continue;
      ++out.rules;
      try {
        hitt::Budget b{hitt::kDefaultFuel};
        hitt::TypeChecker tc(env, b);
        hitt::Context ctx;
        for (std::size_t i = 0; i < r.telescope.size(); ++i) ctx.push(r.telescope_names[i], r.telescope[i]);
        hitt::Term ty = tc.infer(ctx, r.lhs);
        hitt::Reducer red(env, b);
        tc.check(ctx, red.nf(r.replacement), ty);
      } catch (const hitt::Error& e) {
        out.failures.push_back(name.str() + ": " + e.what());
      }
    }
  }
  return out;
}

/// Set-level word model: a sequence in A^n is identified with the word left
/// after deleting its base-point letters. Returns the number of classes, or
/// nothing when the model built by union-find disagrees with it.
inline std::optional<std::size_t> reduced_word_oracle(const hitt::model::JamesModel& jm) {
  const std::uint32_t m = jm.m, n = jm.n;
  std::map<std::vector<std::uint32_t>, std::uint32_t> class_of_word;
  std::map<std::uint32_t, std::vector<std::uint32_t>> word_of_class;
  std::vector<std::uint32_t> seq(n, 0);
  for (;;) {
    std::vector<std::uint32_t> reduced;
    for (auto a : seq)
      if (a != 0) reduced.push_back(a);
    // Fold the whole sequence, base points included.
    std::uint32_t x = 0;
    for (std::uint32_t level = 0; level < n; ++level) {
      const auto& st = jm.stages[level];
      x = st.alpha[seq[n - 1 - level] * st.size + x];
    }
    auto [it, fresh] = class_of_word.emplace(reduced, x);
    if (!fresh && it->second != x) return std::nullopt;
    auto [jt, fresh2] = word_of_class.emplace(x, reduced);
    if (!fresh2 && jt->second != reduced) return std::nullopt;
    std::size_t i = 0;
    while (i < n && ++seq[i] == m) seq[i++] = 0;
    if (i == n) break;
  }
  if (word_of_class.size() != jm.classes()) return std::nullopt;
  return word_of_class.size();
}

} // namespace testing_support
