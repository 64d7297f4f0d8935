#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "lop/error.hpp"

namespace lop {

// Which probabilistic calculus a term / operation lives in. The three calculi
// share one term type; Calc selects the admissible constructors and the redex
// semantics.
enum class Calc { Cbv, Bang, Cbn };

const char* calc_name(Calc c);
Calc calc_from_name(const std::string& s);

enum class K { Var, Lam, BangLam, App, Bang, Choice };

struct Term;
using Tp = std::shared_ptr<const Term>;

// Immutable, structurally shared syntax tree.
//   Var     name
//   Lam     name = binder, a = body
//   BangLam name = binder, a = body          (bang calculus only)
//   App     a = function, b = argument
//   Bang    a = body                         (bang calculus only)
//   Choice  a = left, b = right              (probabilistic choice)
struct Term {
  K k;
  std::string name;
  Tp a, b;
};

Tp mk_var(std::string name);
Tp mk_lam(std::string binder, Tp body);
Tp mk_blam(std::string binder, Tp body);
Tp mk_app(Tp fun, Tp arg);
Tp mk_bang(Tp body);
Tp mk_choice(Tp left, Tp right);

// ---------- positions ----------

enum class Sel { Fun, Arg, Body, Left, Right, BangBody };

using Path = std::vector<Sel>;

std::string path_to_string(const Path& p);   // "fun.arg.body"; "" is the root
Path path_from_string(const std::string& s);

// Both throw LopError if the path does not fit the term's shape.
Tp subterm_at(const Tp& t, const Path& p);
Tp replace_at(const Tp& t, const Path& p, const Tp& sub);

// ---------- basic predicates and maps ----------

std::set<std::string> free_vars(const Tp& t);
bool is_free_in(const std::string& x, const Tp& t);
bool is_closed(const Tp& t);

// Values of the cbv calculus: variables and plain lambdas.
bool is_value(const Tp& t);

int term_size(const Tp& t);  // number of AST nodes

// Capture-avoiding substitution t[arg/x]. Bound variables are renamed with
// primes (y -> y') only when a capture would actually occur, so output is
// deterministic.
Tp subst(const Tp& t, const std::string& x, const Tp& arg);

// Canonical nameless encoding: alpha-equivalent terms and only those get equal
// strings. Doubles as a total order for deterministic iteration.
std::string canon(const Tp& t);
bool alpha_eq(const Tp& a, const Tp& b);

// Throws CalcError if the term uses constructors foreign to the calculus
// (Bang/BangLam outside bang).
void validate_for_calc(const Tp& t, Calc c);

// ---------- printing ----------

// Minimal-parentheses concrete syntax, re-parseable by parse() provided no
// reserved (underscore-leading) names occur.
std::string print_term(const Tp& t);

}  // namespace lop
