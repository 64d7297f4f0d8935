#include "lop/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "lop/calculus.hpp"

namespace lop {

namespace {

enum class Tok { LParen, RParen, ChoiceOp, Backslash, Bang, Dot, Equals, Ident, End };

struct Lexer {
  std::string src;  // owned: callers may hand in temporaries
  size_t pos = 0;
  int line = 1, col = 1;

  Tok tok = Tok::End;
  std::string ident;
  int tok_line = 1, tok_col = 1;

  explicit Lexer(std::string s) : src(std::move(s)) { advance(); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_line, tok_col); }

  char peek(size_t off = 0) const { return pos + off < src.size() ? src[pos + off] : '\0'; }

  void bump() {
    if (peek() == '\n') { ++line; col = 1; } else { ++col; }
    ++pos;
  }

  void skip_ws() {
    for (;;) {
      while (std::isspace(static_cast<unsigned char>(peek()))) bump();
      if (peek() == '-' && peek(1) == '-') {
        while (peek() && peek() != '\n') bump();
        continue;
      }
      break;
    }
  }

  void advance() {
    skip_ws();
    tok_line = line;
    tok_col = col;
    char c = peek();
    if (!c) { tok = Tok::End; return; }
    if (c == '(') {
      if (peek(1) == '+' && peek(2) == ')') {
        bump(); bump(); bump();
        tok = Tok::ChoiceOp;
        return;
      }
      bump(); tok = Tok::LParen; return;
    }
    if (c == ')') { bump(); tok = Tok::RParen; return; }
    if (c == '\\') { bump(); tok = Tok::Backslash; return; }
    if (c == '!') { bump(); tok = Tok::Bang; return; }
    if (c == '.') { bump(); tok = Tok::Dot; return; }
    if (c == '=') { bump(); tok = Tok::Equals; return; }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      // '_'-leading names lex fine; the parser rejects them unless reserved
      // names were explicitly allowed
      ident.clear();
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '\'') {
        ident += peek();
        bump();
      }
      tok = Tok::Ident;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
};

struct Parser {
  Lexer lx;
  ParseOpts opts;

  Parser(std::string s, const ParseOpts& o) : lx(std::move(s)), opts(o) {}

  std::string take_ident() {
    if (lx.tok != Tok::Ident) lx.fail("expected identifier");
    std::string n = lx.ident;
    if (!opts.allow_reserved && n[0] == '_')
      lx.fail("identifier '" + n + "' is reserved (leading underscore)");
    lx.advance();
    return n;
  }

  Tp atom() {
    switch (lx.tok) {
      case Tok::Ident:
        return mk_var(take_ident());
      case Tok::LParen: {
        lx.advance();
        Tp t = term();
        if (lx.tok != Tok::RParen) lx.fail("expected ')'");
        lx.advance();
        return t;
      }
      case Tok::Bang: {
        lx.advance();
        return mk_bang(atom());
      }
      default:
        lx.fail("expected a term");
    }
  }

  bool atom_start() const {
    return lx.tok == Tok::Ident || lx.tok == Tok::LParen || lx.tok == Tok::Bang;
  }

  Tp lambda() {
    // at Backslash
    lx.advance();
    bool bang = false;
    if (lx.tok == Tok::Bang) { bang = true; lx.advance(); }
    std::string binder = take_ident();
    if (lx.tok != Tok::Dot) lx.fail("expected '.' after binder");
    lx.advance();
    Tp body = term();  // swallows everything to the right, including (+)
    return bang ? mk_blam(binder, body) : mk_lam(binder, body);
  }

  Tp operand() {
    if (lx.tok == Tok::Backslash) return lambda();
    Tp t = atom();
    while (atom_start()) t = mk_app(t, atom());
    return t;
  }

  Tp term() {
    Tp left = operand();
    if (lx.tok == Tok::ChoiceOp) {
      lx.advance();
      Tp right = operand();
      if (lx.tok == Tok::ChoiceOp)
        lx.fail("(+) is non-associative; parenthesize");
      return mk_choice(left, right);
    }
    return left;
  }

  Tp parse_full() {
    Tp t = term();
    if (lx.tok != Tok::End) lx.fail("trailing input");
    return t;
  }
};

}  // namespace

Tp parse(const std::string& text, Calc c, const ParseOpts& opts) {
  Parser p(text, opts);
  Tp t = p.parse_full();
  validate_for_calc(t, c);
  if (c == Calc::Bang && opts.check_affine) require_affine(t);
  return t;
}

// ---------- prelude ----------

const Tp* Prelude::find(const std::string& name) const {
  for (auto& [n, t] : defs)
    if (n == name) return &t;
  return nullptr;
}

// Substitute prelude names for their (closed) definitions; binders shadow.
static Tp expand(const Tp& t, const Prelude& p, std::vector<std::string>& bound) {
  switch (t->k) {
    case K::Var: {
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end()) {
        if (const Tp* d = p.find(t->name)) return *d;
      }
      return t;
    }
    case K::Lam:
    case K::BangLam: {
      bound.push_back(t->name);
      Tp a = expand(t->a, p, bound);
      bound.pop_back();
      if (a == t->a) return t;
      return t->k == K::Lam ? mk_lam(t->name, a) : mk_blam(t->name, a);
    }
    case K::App: {
      Tp a = expand(t->a, p, bound), b = expand(t->b, p, bound);
      return (a == t->a && b == t->b) ? t : mk_app(a, b);
    }
    case K::Choice: {
      Tp a = expand(t->a, p, bound), b = expand(t->b, p, bound);
      return (a == t->a && b == t->b) ? t : mk_choice(a, b);
    }
    case K::Bang: {
      Tp a = expand(t->a, p, bound);
      return a == t->a ? t : mk_bang(a);
    }
  }
  return t;
}

Prelude load_prelude_text(const std::string& text) {
  Prelude out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comment
    if (size_t c = line.find("--"); c != std::string::npos) line = line.substr(0, c);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    if (blank) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("prelude line must be 'name = term'", lineno, 1);
    std::string name = line.substr(0, eq);
    // trim
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
    size_t st = 0;
    while (st < name.size() && std::isspace(static_cast<unsigned char>(name[st]))) ++st;
    name = name.substr(st);
    if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])))
      throw ParseError("bad prelude name '" + name + "'", lineno, 1);
    for (char ch : name)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\''))
        throw ParseError("bad prelude name '" + name + "'", lineno, 1);

    Parser pr(line.substr(eq + 1), ParseOpts{});
    Tp rhs;
    try {
      rhs = pr.parse_full();
    } catch (const ParseError& e) {
      throw ParseError("in prelude definition of " + name + ": " + e.what(), lineno, 1);
    }
    std::vector<std::string> bound;
    rhs = expand(rhs, out, bound);
    if (!is_closed(rhs))
      throw ParseError("prelude definition of " + name + " is not closed", lineno, 1);
    if (out.find(name)) throw ParseError("duplicate prelude name " + name, lineno, 1);
    out.defs.emplace_back(name, rhs);
  }
  return out;
}

Prelude load_prelude_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LopError("cannot open prelude file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_prelude_text(ss.str());
}

Tp parse_with_prelude(const std::string& text, Calc c, const Prelude& p, const ParseOpts& opts) {
  Parser pr(text, opts);
  Tp t = pr.parse_full();
  std::vector<std::string> bound;
  t = expand(t, p, bound);
  validate_for_calc(t, c);
  if (c == Calc::Bang && opts.check_affine) require_affine(t);
  return t;
}

}  // namespace lop
