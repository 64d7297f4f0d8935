#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lop/multidist.hpp"
#include "lop/term.hpp"

namespace lop {

// Redex kinds across the three calculi.
//   BetaV    cbv:  (\x.M) V with V a value, any context
//   BetaLin  bang: (\x.M) N, any context
//   BetaBang bang: (\!x.M) !N, any context
//   BetaCbn  cbn:  (\x.M) N, any context
//   Oplus    all:  M (+) N, surface contexts only
enum class RK { BetaV, BetaLin, BetaBang, BetaCbn, Oplus };

const char* rk_name(RK k);
RK rk_from_name(const std::string& s);

// Position of a redex plus its context classification.
//   surface:  cbv: no Lam/Choice on the path; bang: no Bang/Choice (Lam ok);
//             cbn: only Lam-body and App-fun steps on the path
//   left:     cbv only: the unique left-context redex
//   head:     cbn only: the unique head redex (body* fun* spine)
//   deep:     !surface
//   internal: cbv: !left; cbn: !head; bang: == deep
// Oplus redexes only exist at surface positions, so oplus implies surface.
struct Redex {
  Path path;
  RK kind = RK::Oplus;
  bool surface = false;
  bool left = false;
  bool head = false;
  bool deep = false;
  bool internal = false;
};

// All redexes of t in the calculus, in leftmost-outermost (preorder) order.
std::vector<Redex> redexes(const Tp& t, Calc c);

inline std::vector<Redex> cbv_redexes(const Tp& t) { return redexes(t, Calc::Cbv); }
inline std::vector<Redex> bang_redexes(const Tp& t) { return redexes(t, Calc::Bang); }
inline std::vector<Redex> cbn_redexes(const Tp& t) { return redexes(t, Calc::Cbn); }

// Single-term step: beta kinds give [1 M'], oplus gives [1/2 left, 1/2 right].
// The redex is re-validated against the term; InvalidRedex otherwise.
MultiDist apply_redex(const Tp& t, const Redex& r, Calc c);

std::optional<Redex> find_redex_at(const Tp& t, Calc c, const Path& p, RK kind);

bool has_redex(const Tp& t, Calc c);
bool has_surface_redex(const Tp& t, Calc c);
bool has_head_redex(const Tp& t);   // cbn
bool is_head_nf(const Tp& t);       // cbn: no head redex
bool is_surface_nf(const Tp& t, Calc c);

// cbv terms split into: Normal (no redex at all), SurfaceNormalOnly (surface
// normal but some deep redex remains), Reducible.
enum class NfKind { Normal, SurfaceNormalOnly, Reducible };
NfKind cbv_nf_kind(const Tp& t);

// ---------- affine restriction (bang) ----------

// For every subterm \x.P: x occurs free at most once in P and never inside a
// !; \!x binders are unconstrained.
struct AffineViolation {
  Path lam_path;        // position of the offending \x
  std::string var;
  std::string reason;   // "duplicated" or "under bang"
};

std::vector<AffineViolation> affine_violations(const Tp& t);
bool affine_check(const Tp& t);
void require_affine(const Tp& t);  // throws CalcError with the first violation

// ---------- lifting ----------

// One lifted step: each entry independently either keeps (only allowed, and
// required, when you want it) or reduces one of its redexes. Results are
// scaled and concatenated; entries are never merged.
struct LiftChoice {
  bool reduce = false;
  Redex r;
};

MultiDist lift_step(const MultiDist& m, const std::vector<LiftChoice>& choices, Calc c);

// Full lifting driven by a per-term selector: every entry for which the
// selector returns a redex reduces it; entries where it returns nullopt keep.
// any_reduced is false iff the step was the identity.
struct FullStepResult {
  MultiDist next;
  std::vector<LiftChoice> choices;
  bool any_reduced = false;
};

using RedexSelector = std::function<std::optional<Redex>(const Tp&)>;

FullStepResult full_step_with(const MultiDist& m, const RedexSelector& pick, Calc c);

}  // namespace lop
