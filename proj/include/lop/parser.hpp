#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lop/term.hpp"

namespace lop {

// Concrete grammar:
//   term      := choice
//   choice    := operand [ "(+)" operand ]        -- non-associative
//   operand   := lambda | app
//   lambda    := "\" ["!"] ident "." term         -- body extends right as far as possible
//   app       := atom atom*                       -- left associative
//   atom      := ident | "(" term ")" | "!" atom  -- "!" binds tighter than application
//   ident     := [a-zA-Z_][a-zA-Z0-9_']*
// "--" starts a comment running to end of line.
//
// Identifiers starting with an underscore are reserved (the translations use
// "__z"/"__w") and are rejected; allow_reserved exists for internal
// round-trips (trace replay).

struct ParseOpts {
  bool allow_reserved = false;
  bool check_affine = true;  // bang calculus only: enforce the affine restriction
};

Tp parse(const std::string& text, Calc c, const ParseOpts& opts = {});

// ---------- prelude ----------

// A prelude is an ordered list of closed definitions, one per line:
//   name = term        -- comments and blank lines allowed
// Later definitions may use earlier names. parse_with_prelude substitutes the
// definitions for free occurrences of their names (bound occurrences shadow).
struct Prelude {
  std::vector<std::pair<std::string, Tp>> defs;
  const Tp* find(const std::string& name) const;
};

Prelude load_prelude_text(const std::string& text);
Prelude load_prelude_file(const std::string& path);

Tp parse_with_prelude(const std::string& text, Calc c, const Prelude& p,
                      const ParseOpts& opts = {});

}  // namespace lop
