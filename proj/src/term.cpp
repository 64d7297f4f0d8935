#include "lop/term.hpp"

#include <algorithm>
#include <cassert>

namespace lop {

const char* calc_name(Calc c) {
  switch (c) {
    case Calc::Cbv: return "cbv";
    case Calc::Bang: return "bang";
    case Calc::Cbn: return "cbn";
  }
  return "?";
}

Calc calc_from_name(const std::string& s) {
  if (s == "cbv") return Calc::Cbv;
  if (s == "bang") return Calc::Bang;
  if (s == "cbn") return Calc::Cbn;
  throw LopError("unknown calculus: " + s);
}

Tp mk_var(std::string name) {
  return std::make_shared<Term>(Term{K::Var, std::move(name), nullptr, nullptr});
}
Tp mk_lam(std::string binder, Tp body) {
  return std::make_shared<Term>(Term{K::Lam, std::move(binder), std::move(body), nullptr});
}
Tp mk_blam(std::string binder, Tp body) {
  return std::make_shared<Term>(Term{K::BangLam, std::move(binder), std::move(body), nullptr});
}
Tp mk_app(Tp fun, Tp arg) {
  return std::make_shared<Term>(Term{K::App, {}, std::move(fun), std::move(arg)});
}
Tp mk_bang(Tp body) {
  return std::make_shared<Term>(Term{K::Bang, {}, std::move(body), nullptr});
}
Tp mk_choice(Tp left, Tp right) {
  return std::make_shared<Term>(Term{K::Choice, {}, std::move(left), std::move(right)});
}

// ---------- positions ----------

static const char* sel_name(Sel s) {
  switch (s) {
    case Sel::Fun: return "fun";
    case Sel::Arg: return "arg";
    case Sel::Body: return "body";
    case Sel::Left: return "left";
    case Sel::Right: return "right";
    case Sel::BangBody: return "bang-body";
  }
  return "?";
}

std::string path_to_string(const Path& p) {
  std::string out;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) out += '.';
    out += sel_name(p[i]);
  }
  return out;
}

Path path_from_string(const std::string& s) {
  Path p;
  if (s.empty()) return p;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t dot = s.find('.', pos);
    std::string tok = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (tok == "fun") p.push_back(Sel::Fun);
    else if (tok == "arg") p.push_back(Sel::Arg);
    else if (tok == "body") p.push_back(Sel::Body);
    else if (tok == "left") p.push_back(Sel::Left);
    else if (tok == "right") p.push_back(Sel::Right);
    else if (tok == "bang-body") p.push_back(Sel::BangBody);
    else throw LopError("bad path selector: " + tok);
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return p;
}

static const Tp& child(const Tp& t, Sel s) {
  switch (t->k) {
    case K::App:
      if (s == Sel::Fun) return t->a;
      if (s == Sel::Arg) return t->b;
      break;
    case K::Lam:
    case K::BangLam:
      if (s == Sel::Body) return t->a;
      break;
    case K::Bang:
      if (s == Sel::BangBody) return t->a;
      break;
    case K::Choice:
      if (s == Sel::Left) return t->a;
      if (s == Sel::Right) return t->b;
      break;
    case K::Var:
      break;
  }
  throw LopError("path selector " + std::string(sel_name(s)) + " does not fit term shape");
}

Tp subterm_at(const Tp& t, const Path& p) {
  Tp cur = t;
  for (Sel s : p) cur = child(cur, s);
  return cur;
}

Tp replace_at(const Tp& t, const Path& p, const Tp& sub) {
  if (p.empty()) return sub;
  Sel s = p.front();
  Path rest(p.begin() + 1, p.end());
  const Tp& c = child(t, s);  // validates
  Tp nc = replace_at(c, rest, sub);
  switch (t->k) {
    case K::App:
      return s == Sel::Fun ? mk_app(nc, t->b) : mk_app(t->a, nc);
    case K::Lam:
      return mk_lam(t->name, nc);
    case K::BangLam:
      return mk_blam(t->name, nc);
    case K::Bang:
      return mk_bang(nc);
    case K::Choice:
      return s == Sel::Left ? mk_choice(nc, t->b) : mk_choice(t->a, nc);
    case K::Var:
      break;
  }
  throw LopError("replace_at: unreachable");
}

// ---------- predicates ----------

static void free_vars_rec(const Tp& t, std::vector<std::string>& bound,
                          std::set<std::string>& out) {
  switch (t->k) {
    case K::Var:
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end()) out.insert(t->name);
      return;
    case K::Lam:
    case K::BangLam:
      bound.push_back(t->name);
      free_vars_rec(t->a, bound, out);
      bound.pop_back();
      return;
    case K::App:
    case K::Choice:
      free_vars_rec(t->a, bound, out);
      free_vars_rec(t->b, bound, out);
      return;
    case K::Bang:
      free_vars_rec(t->a, bound, out);
      return;
  }
}

std::set<std::string> free_vars(const Tp& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  free_vars_rec(t, bound, out);
  return out;
}

bool is_free_in(const std::string& x, const Tp& t) {
  switch (t->k) {
    case K::Var: return t->name == x;
    case K::Lam:
    case K::BangLam:
      return t->name != x && is_free_in(x, t->a);
    case K::App:
    case K::Choice:
      return is_free_in(x, t->a) || is_free_in(x, t->b);
    case K::Bang:
      return is_free_in(x, t->a);
  }
  return false;
}

bool is_closed(const Tp& t) { return free_vars(t).empty(); }

bool is_value(const Tp& t) { return t->k == K::Var || t->k == K::Lam; }

int term_size(const Tp& t) {
  switch (t->k) {
    case K::Var: return 1;
    case K::Lam:
    case K::BangLam:
    case K::Bang:
      return 1 + term_size(t->a);
    case K::App:
    case K::Choice:
      return 1 + term_size(t->a) + term_size(t->b);
  }
  return 0;
}

// ---------- substitution ----------

static std::string fresh_name(const std::string& base, const Tp& avoid1, const Tp& avoid2,
                              const std::string& also) {
  std::string cand = base;
  for (;;) {
    cand += '\'';
    if (cand != also && !is_free_in(cand, avoid1) && !is_free_in(cand, avoid2)) return cand;
  }
}

Tp subst(const Tp& t, const std::string& x, const Tp& arg) {
  switch (t->k) {
    case K::Var:
      return t->name == x ? arg : t;
    case K::App: {
      Tp a = subst(t->a, x, arg), b = subst(t->b, x, arg);
      return (a == t->a && b == t->b) ? t : mk_app(a, b);
    }
    case K::Choice: {
      Tp a = subst(t->a, x, arg), b = subst(t->b, x, arg);
      return (a == t->a && b == t->b) ? t : mk_choice(a, b);
    }
    case K::Bang: {
      Tp a = subst(t->a, x, arg);
      return a == t->a ? t : mk_bang(a);
    }
    case K::Lam:
    case K::BangLam: {
      if (t->name == x) return t;
      if (!is_free_in(x, t->a)) return t;
      std::string binder = t->name;
      Tp body = t->a;
      if (is_free_in(binder, arg)) {
        // rename only when the capture is real
        std::string nb = fresh_name(binder, body, arg, x);
        body = subst(body, binder, mk_var(nb));
        binder = nb;
      }
      Tp nb2 = subst(body, x, arg);
      return t->k == K::Lam ? mk_lam(binder, nb2) : mk_blam(binder, nb2);
    }
  }
  throw LopError("subst: unreachable");
}

// ---------- canonical encoding ----------

static void canon_rec(const Tp& t, std::vector<const std::string*>& env, std::string& out) {
  switch (t->k) {
    case K::Var: {
      for (size_t i = env.size(); i-- > 0;) {
        if (*env[i] == t->name) {
          out += 'v';
          out += std::to_string(env.size() - 1 - i);
          out += ';';
          return;
        }
      }
      out += 'f';
      out += t->name;
      out += ';';
      return;
    }
    case K::Lam:
    case K::BangLam:
      out += (t->k == K::Lam ? 'L' : 'M');
      env.push_back(&t->name);
      canon_rec(t->a, env, out);
      env.pop_back();
      return;
    case K::App:
      out += 'A';
      canon_rec(t->a, env, out);
      canon_rec(t->b, env, out);
      return;
    case K::Bang:
      out += 'B';
      canon_rec(t->a, env, out);
      return;
    case K::Choice:
      out += 'C';
      canon_rec(t->a, env, out);
      canon_rec(t->b, env, out);
      return;
  }
}

std::string canon(const Tp& t) {
  std::string out;
  out.reserve(64);
  std::vector<const std::string*> env;
  canon_rec(t, env, out);
  return out;
}

bool alpha_eq(const Tp& a, const Tp& b) { return a == b || canon(a) == canon(b); }

void validate_for_calc(const Tp& t, Calc c) {
  if (c == Calc::Bang) return;
  switch (t->k) {
    case K::Bang:
    case K::BangLam:
      throw CalcError(std::string("constructor '") + (t->k == K::Bang ? "!" : "\\!") +
                      "' is not part of the " + calc_name(c) + " calculus");
    case K::Var:
      return;
    case K::Lam:
      validate_for_calc(t->a, c);
      return;
    case K::App:
    case K::Choice:
      validate_for_calc(t->a, c);
      validate_for_calc(t->b, c);
      return;
  }
}

// ---------- printing ----------

// level 0: anything; 1: choice needs parens; 2: choice+lambda need parens
// (function position / left of (+)); 3: atoms only.
static void pp(const Tp& t, int level, std::string& out) {
  switch (t->k) {
    case K::Var:
      out += t->name;
      return;
    case K::Lam:
    case K::BangLam: {
      bool paren = level > 1;
      if (paren) out += '(';
      out += '\\';
      if (t->k == K::BangLam) out += '!';
      out += t->name;
      out += ". ";
      pp(t->a, 0, out);
      if (paren) out += ')';
      return;
    }
    case K::App: {
      bool paren = level > 2;
      if (paren) out += '(';
      pp(t->a, 2, out);
      out += ' ';
      pp(t->b, 3, out);
      if (paren) out += ')';
      return;
    }
    case K::Bang:
      out += '!';
      pp(t->a, 3, out);
      return;
    case K::Choice: {
      bool paren = level > 0;
      if (paren) out += '(';
      pp(t->a, 2, out);
      out += " (+) ";
      pp(t->b, 1, out);
      if (paren) out += ')';
      return;
    }
  }
}

std::string print_term(const Tp& t) {
  std::string out;
  out.reserve(64);
  pp(t, 0, out);
  return out;
}

}  // namespace lop
