#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hitt/corpus.hpp"
#include "hitt/elaborator.hpp"
#include "hitt/kernel.hpp"
#include "hitt/session.hpp"
#include "hitt/surface.hpp"

namespace testing_support {

inline std::filesystem::path corpus_dir() { return HITT_CORPUS_DIR; }

/// Session with the given tier-1 modules (and their imports) loaded.
inline hitt::Session session_with(const std::vector<std::string>& modules, hitt::CheckOptions opts = {}) {
  opts.root = corpus_dir();
  hitt::Session s(opts);
  for (const auto& m : modules) s.check_file(corpus_dir() / (m + ".hit"));
  return s;
}

/// Appends declarations written in surface syntax.
inline void declare(hitt::Session& s, const std::string& src) {
  for (const auto& d : hitt::surface::parse_file(src).decls) s.check_decl(d);
}

/// Local variables for elaborating expressions: `{name, type source}` pairs.
struct Locals {
  hitt::Scope scope;
};

inline Locals locals(hitt::Session& s, const std::vector<std::pair<std::string, std::string>>& vars) {
  Locals l;
  for (const auto& [name, type] : vars) {
    hitt::Budget b{hitt::kDefaultFuel};
    hitt::Elaborator el(s.env(), b);
    hitt::Term ty = el.check_type(l.scope, *hitt::surface::parse_expr(type));
    el.finish_constraints();
    l.scope.push(name, hitt::Name(name), el.finalize(ty));
  }
  return l;
}

/// Elaborates a surface expression to a core term, with its type.
inline std::pair<hitt::Term, hitt::Term> elab(hitt::Session& s, const std::string& src, Locals* l = nullptr) {
  Locals empty;
  if (!l) l = &empty;
  hitt::Budget b{hitt::kDefaultFuel};
  hitt::Elaborator el(s.env(), b);
  auto [t, ty] = el.infer(l->scope, *hitt::surface::parse_expr(src));
  el.finish_constraints();
  return {el.finalize(t), el.finalize(ty)};
}

inline hitt::Term term(hitt::Session& s, const std::string& src, Locals* l = nullptr) { return elab(s, src, l).first; }

inline hitt::ErrorKind error_of(auto&& f) {
  try {
    f();
  } catch (const hitt::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an error");
}

} // namespace testing_support
