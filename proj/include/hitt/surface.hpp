#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hitt/error.hpp"

namespace hitt::surface {

struct Pos {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::size_t offset = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// One binder group: `x y`, `(x y : A)` or `{x : A}`. Lambda groups may omit the type.
struct Binder {
  std::vector<std::string> names;
  bool implicit = false;
  ExprPtr type;
};

enum class ExprKind { Ident, Hole, Type, App, Lam, Pi, Arrow, Sigma, Product, Pair, Fst, Snd, Eq };

struct Expr {
  ExprKind kind = ExprKind::Hole;
  Pos pos;
  std::string name;             // Ident
  ExprPtr a;                    // fn, body, domain, left, projected
  ExprPtr b;                    // arg, codomain, right
  bool implicit = false;        // App: implicit argument
  std::vector<Binder> binders;  // Lam, Pi, Sigma
};

inline ExprPtr make_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

struct Clause {
  Pos pos;
  ExprPtr lhs; // the defined name applied to patterns
  ExprPtr rhs;
};

enum class DeclKind { Postulate, Def, Rewrite, Instance, Coh, Import, Mutual };

struct Decl {
  DeclKind kind = DeclKind::Postulate;
  Pos pos;
  std::string name;
  ExprPtr type;
  ExprPtr body;                 // `def f : T = body`
  std::vector<Clause> clauses;  // `def f : T | f p = e ...`
  std::vector<Decl> members;    // mutual block
};

struct SourceFile {
  std::string path;
  std::vector<Decl> decls;
};

/// ParseError with its position and the set of tokens that would have been accepted.
class ParseFailure : public Error {
public:
  ParseFailure(Pos pos, std::vector<std::string> expected, const std::string& found)
      : Error(ErrorKind::ParseError, describe(pos, expected, found)), pos_(pos), expected_(std::move(expected)) {}

  Pos pos() const { return pos_; }
  const std::vector<std::string>& expected() const { return expected_; }

private:
  static std::string describe(Pos pos, const std::vector<std::string>& expected, const std::string& found) {
    std::string s = std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) s += (i ? " or " : "") + expected[i];
    return s + ", found " + found;
  }
  Pos pos_;
  std::vector<std::string> expected_;
};

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident, Keyword, LParen, RParen, LBrace, RBrace, Comma, Lambda, Colon, Equals, Arrow, EqEq, Underscore, Bar,
  Star, End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Pos pos;
};

inline bool is_keyword(std::string_view w) {
  for (auto k : {"postulate", "def", "rewrite", "instance", "coh", "import", "mutual", "end", "Type", "fst", "snd"})
    if (w == k) return true;
  return false;
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  Pos pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++pos.column;
      }
    }
    pos.offset = i;
  };
  auto starts_lambda = [&](std::size_t at) {
    return src.compare(at, 2, "\xCE\xBB") == 0; // U+03BB
  };
  auto delimiter = [&](std::size_t at) {
    char c = src[at];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' || c == ')' || c == '{' || c == '}' ||
           c == ',' || c == '\\' || starts_lambda(at);
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance(1);
      continue;
    }
    if (src.compare(i, 2, "--") == 0) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = pos;
    auto single = [&](Tok k, std::size_t n) {
      t.kind = k;
      t.text = std::string(src.substr(i, n));
      advance(n);
      out.push_back(t);
    };
    switch (c) {
    case '(': single(Tok::LParen, 1); continue;
    case ')': single(Tok::RParen, 1); continue;
    case '{': single(Tok::LBrace, 1); continue;
    case '}': single(Tok::RBrace, 1); continue;
    case ',': single(Tok::Comma, 1); continue;
    case '\\': single(Tok::Lambda, 1); continue;
    default: break;
    }
    if (starts_lambda(i)) {
      single(Tok::Lambda, 2);
      continue;
    }
    std::size_t j = i;
    while (j < src.size() && !delimiter(j)) ++j;
    std::string w(src.substr(i, j - i));
    if (w == ":") t.kind = Tok::Colon;
    else if (w == "=") t.kind = Tok::Equals;
    else if (w == "->" || w == "\xE2\x86\x92") t.kind = Tok::Arrow;
    else if (w == "==") t.kind = Tok::EqEq;
    else if (w == "_") t.kind = Tok::Underscore;
    else if (w == "|") t.kind = Tok::Bar;
    else if (w == "*" || w == "\xC3\x97") t.kind = Tok::Star;
    else if (is_keyword(w)) t.kind = Tok::Keyword;
    else t.kind = Tok::Ident;
    t.text = w;
    advance(j - i);
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.pos = pos;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  SourceFile parse_file(std::string path = {}) {
    SourceFile f;
    f.path = std::move(path);
    while (!at(Tok::End)) f.decls.push_back(parse_decl());
    return f;
  }

  ExprPtr parse_expression() {
    auto e = parse_expr();
    expect(Tok::End, "end of input");
    return e;
  }

private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(std::string_view w) const { return at(Tok::Keyword) && peek().text == w; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    throw ParseFailure(t.pos, std::move(expected), t.kind == Tok::End ? "end of input" : "`" + t.text + "`");
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail({what});
    return next();
  }

  std::string expect_ident() {
    if (!at(Tok::Ident)) fail({"identifier"});
    return next().text;
  }

  Decl parse_decl() {
    Decl d;
    d.pos = peek().pos;
    if (!at(Tok::Keyword)) fail({"postulate", "def", "rewrite", "instance", "coh", "import", "mutual"});
    std::string kw = peek().text;
    if (kw == "postulate" || kw == "coh") {
      next();
      d.kind = kw == "postulate" ? DeclKind::Postulate : DeclKind::Coh;
      d.name = expect_ident();
      d.type = parse_annotation();
    } else if (kw == "def") {
      next();
      d.kind = DeclKind::Def;
      d.name = expect_ident();
      d.type = parse_annotation();
      if (at(Tok::Equals)) {
        next();
        d.body = parse_expr();
      } else if (at(Tok::Bar)) {
        while (at(Tok::Bar)) {
          Clause c;
          c.pos = next().pos;
          c.lhs = parse_app();
          expect(Tok::Equals, "`=`");
          c.rhs = parse_expr();
          d.clauses.push_back(std::move(c));
        }
      } else {
        fail({"`=`", "`|`"});
      }
    } else if (kw == "rewrite" || kw == "instance" || kw == "import") {
      next();
      d.kind = kw == "rewrite" ? DeclKind::Rewrite : kw == "instance" ? DeclKind::Instance : DeclKind::Import;
      d.name = expect_ident();
    } else if (kw == "mutual") {
      next();
      d.kind = DeclKind::Mutual;
      while (!at_kw("end")) {
        if (!at_kw("def")) fail({"def", "end"});
        d.members.push_back(parse_decl());
      }
      next();
    } else {
      fail({"postulate", "def", "rewrite", "instance", "coh", "import", "mutual"});
    }
    return d;
  }

  /// `: TYPE`; a missing type is reported at the colon itself.
  ExprPtr parse_annotation() {
    Token colon = expect(Tok::Colon, "`:`");
    if (!starts_expr()) {
      const Token& t = peek();
      throw ParseFailure(colon.pos, {"type expression after `:`"}, t.kind == Tok::End ? "end of input" : "`" + t.text + "`");
    }
    return parse_expr();
  }

  bool starts_atom() const {
    switch (peek().kind) {
    case Tok::Ident:
    case Tok::Underscore:
    case Tok::LParen:
      return true;
    case Tok::Keyword:
      return peek().text == "Type";
    default:
      return false;
    }
  }

  bool starts_expr() const {
    return starts_atom() || at(Tok::Lambda) || at(Tok::LBrace) || at_kw("fst") || at_kw("snd");
  }

  /// `(` followed by names and `:` opens a binder group.
  bool binder_group_ahead() const {
    if (at(Tok::LBrace)) return true;
    if (!at(Tok::LParen)) return false;
    std::size_t k = 1;
    while (peek(k).kind == Tok::Ident || peek(k).kind == Tok::Underscore) ++k;
    return k > 1 && peek(k).kind == Tok::Colon;
  }

  Binder parse_typed_group() {
    Binder b;
    bool brace = at(Tok::LBrace);
    b.implicit = brace;
    next();
    while (at(Tok::Ident) || at(Tok::Underscore)) b.names.push_back(next().text);
    if (b.names.empty()) fail({"identifier"});
    expect(Tok::Colon, "`:`");
    b.type = parse_expr();
    expect(brace ? Tok::RBrace : Tok::RParen, brace ? "`}`" : "`)`");
    return b;
  }

  ExprPtr parse_expr() {
    Pos p = peek().pos;
    if (at(Tok::Lambda)) {
      next();
      Expr e;
      e.kind = ExprKind::Lam;
      e.pos = p;
      while (!at(Tok::Arrow)) {
        if (at(Tok::Ident) || at(Tok::Underscore)) {
          Binder b;
          b.names.push_back(next().text);
          e.binders.push_back(std::move(b));
        } else if (at(Tok::LBrace)) {
          next();
          Binder b;
          b.implicit = true;
          while (at(Tok::Ident) || at(Tok::Underscore)) b.names.push_back(next().text);
          if (b.names.empty()) fail({"identifier"});
          if (at(Tok::Colon)) {
            next();
            b.type = parse_expr();
          }
          expect(Tok::RBrace, "`}`");
          e.binders.push_back(std::move(b));
        } else if (binder_group_ahead()) {
          e.binders.push_back(parse_typed_group());
        } else {
          fail({"binder", "`->`"});
        }
      }
      if (e.binders.empty()) fail({"binder"});
      next();
      e.a = parse_expr();
      return make_expr(std::move(e));
    }
    if (binder_group_ahead()) {
      Expr e;
      e.pos = p;
      while (binder_group_ahead()) e.binders.push_back(parse_typed_group());
      if (at(Tok::Arrow)) {
        next();
        e.kind = ExprKind::Pi;
        e.a = parse_expr();
        return make_expr(std::move(e));
      }
      if (at(Tok::Star) && e.binders.size() == 1 && !e.binders[0].implicit && e.binders[0].names.size() == 1) {
        next();
        e.kind = ExprKind::Sigma;
        e.a = parse_expr();
        return make_expr(std::move(e));
      }
      fail({"`->`", "`*`"});
    }
    ExprPtr lhs = parse_eq();
    if (at(Tok::Arrow)) {
      next();
      Expr e;
      e.kind = ExprKind::Arrow;
      e.pos = p;
      e.a = lhs;
      e.b = parse_expr();
      return make_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_eq() {
    Pos p = peek().pos;
    ExprPtr lhs = parse_prod();
    if (at(Tok::EqEq)) {
      next();
      Expr e;
      e.kind = ExprKind::Eq;
      e.pos = p;
      e.a = lhs;
      e.b = parse_prod();
      return make_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_prod() {
    Pos p = peek().pos;
    ExprPtr lhs = parse_app();
    if (at(Tok::Star)) {
      next();
      Expr e;
      e.kind = ExprKind::Product;
      e.pos = p;
      e.a = lhs;
      e.b = parse_prod();
      return make_expr(std::move(e));
    }
    return lhs;
  }

  ExprPtr parse_app() {
    Pos p = peek().pos;
    ExprPtr head;
    if (at_kw("fst") || at_kw("snd")) {
      bool first = peek().text == "fst";
      next();
      Expr e;
      e.kind = first ? ExprKind::Fst : ExprKind::Snd;
      e.pos = p;
      e.a = parse_atom();
      head = make_expr(std::move(e));
    } else {
      head = parse_atom();
    }
    while (starts_atom() || at(Tok::LBrace)) {
      Expr e;
      e.kind = ExprKind::App;
      e.pos = p;
      e.a = head;
      if (at(Tok::LBrace)) {
        next();
        e.implicit = true;
        e.b = parse_expr();
        expect(Tok::RBrace, "`}`");
      } else {
        e.b = parse_atom();
      }
      head = make_expr(std::move(e));
    }
    return head;
  }

  ExprPtr parse_atom() {
    Expr e;
    e.pos = peek().pos;
    if (at(Tok::Ident)) {
      e.kind = ExprKind::Ident;
      e.name = next().text;
    } else if (at(Tok::Underscore)) {
      next();
      e.kind = ExprKind::Hole;
    } else if (at_kw("Type")) {
      next();
      e.kind = ExprKind::Type;
    } else if (at(Tok::LParen)) {
      next();
      ExprPtr inner = parse_expr();
      if (at(Tok::Comma)) {
        next();
        e.kind = ExprKind::Pair;
        e.a = inner;
        e.b = parse_expr();
        expect(Tok::RParen, "`)`");
        return make_expr(std::move(e));
      }
      expect(Tok::RParen, "`)`");
      return inner;
    } else {
      fail({"expression"});
    }
    return make_expr(std::move(e));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline SourceFile parse_file(std::string_view text, std::string path = {}) { return Parser(text).parse_file(std::move(path)); }

inline ExprPtr parse_expr(std::string_view text) { return Parser(text).parse_expression(); }

inline SourceFile load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_file(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Printer

namespace detail {

inline void print_expr(std::ostream& out, const Expr& e, int level);

inline void print_binder_types(std::ostream& out, const Binder& b) {
  out << (b.implicit ? '{' : '(');
  for (std::size_t i = 0; i < b.names.size(); ++i) out << (i ? " " : "") << b.names[i];
  out << " : ";
  print_expr(out, *b.type, 0);
  out << (b.implicit ? '}' : ')');
}

// Levels: 0 binders/arrows, 1 equality, 2 product, 3 application, 4 atom.
inline void print_expr(std::ostream& out, const Expr& e, int level) {
  auto open = [&](int own) {
    if (own < level) out << '(';
  };
  auto close = [&](int own) {
    if (own < level) out << ')';
  };
  switch (e.kind) {
  case ExprKind::Ident:
    out << e.name;
    return;
  case ExprKind::Hole:
    out << '_';
    return;
  case ExprKind::Type:
    out << "Type";
    return;
  case ExprKind::App:
    open(3);
    print_expr(out, *e.a, 3);
    out << ' ';
    if (e.implicit) {
      out << '{';
      print_expr(out, *e.b, 0);
      out << '}';
    } else {
      print_expr(out, *e.b, 4);
    }
    close(3);
    return;
  case ExprKind::Lam:
    open(0);
    out << '\\';
    for (const auto& b : e.binders) {
      if (b.type) {
        print_binder_types(out, b);
      } else if (b.implicit) {
        out << '{';
        for (std::size_t i = 0; i < b.names.size(); ++i) out << (i ? " " : "") << b.names[i];
        out << '}';
      } else {
        out << b.names[0];
      }
      out << ' ';
    }
    out << "-> ";
    print_expr(out, *e.a, 0);
    close(0);
    return;
  case ExprKind::Pi:
    open(0);
    for (const auto& b : e.binders) {
      print_binder_types(out, b);
      out << ' ';
    }
    out << "-> ";
    print_expr(out, *e.a, 0);
    close(0);
    return;
  case ExprKind::Sigma:
    open(0);
    print_binder_types(out, e.binders[0]);
    out << " * ";
    print_expr(out, *e.a, 0);
    close(0);
    return;
  case ExprKind::Arrow:
    open(0);
    print_expr(out, *e.a, 1);
    out << " -> ";
    print_expr(out, *e.b, 0);
    close(0);
    return;
  case ExprKind::Eq:
    open(1);
    print_expr(out, *e.a, 2);
    out << " == ";
    print_expr(out, *e.b, 2);
    close(1);
    return;
  case ExprKind::Product:
    open(2);
    print_expr(out, *e.a, 3);
    out << " * ";
    print_expr(out, *e.b, 2);
    close(2);
    return;
  case ExprKind::Pair:
    out << '(';
    print_expr(out, *e.a, 0);
    out << " , ";
    print_expr(out, *e.b, 0);
    out << ')';
    return;
  case ExprKind::Fst:
  case ExprKind::Snd:
    open(3);
    out << (e.kind == ExprKind::Fst ? "fst " : "snd ");
    print_expr(out, *e.a, 4);
    close(3);
    return;
  }
}

inline void print_decl(std::ostream& out, const Decl& d, const std::string& indent) {
  switch (d.kind) {
  case DeclKind::Postulate:
  case DeclKind::Coh:
    out << indent << (d.kind == DeclKind::Postulate ? "postulate " : "coh ") << d.name << " : ";
    print_expr(out, *d.type, 0);
    out << '\n';
    return;
  case DeclKind::Def:
    out << indent << "def " << d.name << " : ";
    print_expr(out, *d.type, 0);
    if (d.body) {
      out << " = ";
      print_expr(out, *d.body, 0);
      out << '\n';
    } else {
      out << '\n';
      for (const auto& c : d.clauses) {
        out << indent << "  | ";
        print_expr(out, *c.lhs, 3);
        out << " = ";
        print_expr(out, *c.rhs, 0);
        out << '\n';
      }
    }
    return;
  case DeclKind::Rewrite:
    out << indent << "rewrite " << d.name << '\n';
    return;
  case DeclKind::Instance:
    out << indent << "instance " << d.name << '\n';
    return;
  case DeclKind::Import:
    out << indent << "import " << d.name << '\n';
    return;
  case DeclKind::Mutual:
    out << indent << "mutual\n";
    for (const auto& m : d.members) print_decl(out, m, indent + "  ");
    out << indent << "end\n";
    return;
  }
}

} // namespace detail

inline std::string print(const Expr& e) {
  std::ostringstream out;
  detail::print_expr(out, e, 0);
  return out.str();
}

inline std::string print(const Decl& d) {
  std::ostringstream out;
  detail::print_decl(out, d, "");
  return out.str();
}

inline std::string print(const SourceFile& f) {
  std::ostringstream out;
  for (const auto& d : f.decls) detail::print_decl(out, d, "");
  return out.str();
}

// ---------------------------------------------------------------------------
// Structural equality up to renaming of bound variables

namespace detail {

struct AlphaScope {
  std::vector<std::pair<std::string, std::string>> bound;

  bool same_var(const std::string& x, const std::string& y) const {
    for (auto it = bound.rbegin(); it != bound.rend(); ++it) {
      if (it->first == x || it->second == y) return it->first == x && it->second == y;
    }
    return x == y;
  }
};

inline bool alpha_eq(const Expr& x, const Expr& y, AlphaScope& s);

inline bool alpha_eq_binders(const std::vector<Binder>& bx, const std::vector<Binder>& by, const Expr& bodyx,
                             const Expr& bodyy, AlphaScope& s) {
  if (bx.size() != by.size()) return false;
  std::size_t mark = s.bound.size();
  bool ok = true;
  for (std::size_t i = 0; ok && i < bx.size(); ++i) {
    const auto& x = bx[i];
    const auto& y = by[i];
    ok = x.implicit == y.implicit && x.names.size() == y.names.size() && bool(x.type) == bool(y.type) &&
         (!x.type || alpha_eq(*x.type, *y.type, s));
    for (std::size_t k = 0; ok && k < x.names.size(); ++k) s.bound.emplace_back(x.names[k], y.names[k]);
  }
  ok = ok && alpha_eq(bodyx, bodyy, s);
  s.bound.resize(mark);
  return ok;
}

inline bool alpha_eq(const Expr& x, const Expr& y, AlphaScope& s) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
  case ExprKind::Ident:
    return s.same_var(x.name, y.name);
  case ExprKind::Hole:
  case ExprKind::Type:
    return true;
  case ExprKind::App:
    return x.implicit == y.implicit && alpha_eq(*x.a, *y.a, s) && alpha_eq(*x.b, *y.b, s);
  case ExprKind::Arrow:
  case ExprKind::Eq:
  case ExprKind::Product:
  case ExprKind::Pair:
    return alpha_eq(*x.a, *y.a, s) && alpha_eq(*x.b, *y.b, s);
  case ExprKind::Fst:
  case ExprKind::Snd:
    return alpha_eq(*x.a, *y.a, s);
  case ExprKind::Lam:
  case ExprKind::Pi:
  case ExprKind::Sigma:
    return alpha_eq_binders(x.binders, y.binders, *x.a, *y.a, s);
  }
  return false;
}

inline bool alpha_eq_decl(const Decl& x, const Decl& y) {
  if (x.kind != y.kind || x.name != y.name) return false;
  AlphaScope s;
  auto eq_opt = [&](const ExprPtr& a, const ExprPtr& b) { return bool(a) == bool(b) && (!a || alpha_eq(*a, *b, s)); };
  if (!eq_opt(x.type, y.type) || !eq_opt(x.body, y.body)) return false;
  if (x.clauses.size() != y.clauses.size() || x.members.size() != y.members.size()) return false;
  for (std::size_t i = 0; i < x.clauses.size(); ++i)
    if (!alpha_eq(*x.clauses[i].lhs, *y.clauses[i].lhs, s) || !alpha_eq(*x.clauses[i].rhs, *y.clauses[i].rhs, s))
      return false;
  for (std::size_t i = 0; i < x.members.size(); ++i)
    if (!alpha_eq_decl(x.members[i], y.members[i])) return false;
  return true;
}

} // namespace detail

inline bool alpha_equal(const Expr& x, const Expr& y) {
  detail::AlphaScope s;
  return detail::alpha_eq(x, y, s);
}

inline bool alpha_equal(const SourceFile& x, const SourceFile& y) {
  if (x.decls.size() != y.decls.size()) return false;
  for (std::size_t i = 0; i < x.decls.size(); ++i)
    if (!detail::alpha_eq_decl(x.decls[i], y.decls[i])) return false;
  return true;
}

} // namespace hitt::surface
