#pragma once

#include <string>
#include <vector>

#include "lop/calculus.hpp"
#include "lop/term.hpp"

namespace lop {

// The four translations. Sources are validated (calculus fit, affine for
// bang, no reserved names); images may use the reserved variables __z / __w
// and, for TrBang, may leave the affine fragment.
//
//   CbvSimple  : cbv  -> cbv lambda,  M (+) N  =>  __z M' N'
//                beta steps correspond 1-1; surface-ness is NOT preserved.
//   CbvSurface : cbv  -> cbv lambda,  M (+) N  =>  __z (\__w. M') (\__w. N')
//                beta steps correspond 1-1 and surface matches surface.
//   TrBang     : bang -> bang lambda, M (+) N  =>  __z !M' !N'
//                beta steps correspond 1-1 and surface matches surface.
//   TrCbn      : cbn  -> bang,        \x.M => \!x.M', M N => M' !N', (+) kept
//                beta and oplus steps correspond 1-1, surface matches
//                surface, and head normal forms match surface normal forms.
enum class TrVariant { CbvSimple, CbvSurface, TrBang, TrCbn };

const char* tr_name(TrVariant v);
TrVariant tr_from_name(const std::string& s);

Calc tr_source_calc(TrVariant v);
Calc tr_target_calc(TrVariant v);

Tp translate(const Tp& t, TrVariant v);
MultiDist translate_md(const MultiDist& m, TrVariant v);

// Image of a source redex position in the translated term.
Path translate_path(const Tp& src, const Path& p, TrVariant v);

// Per-term simulation check, recursively over everything reachable from t in
// at most `steps` reductions (any redex):
//   - translated source redexes biject with target redexes (for the cbv/bang
//     variants: beta redexes vs all target redexes; for cbn: all redexes);
//   - reducing corresponding redexes commutes with translation;
//   - surface flags agree (all variants except CbvSimple, which loses them);
//   - cbn only: t is head-normal iff the image is surface-normal.
struct SimReport {
  bool pass = true;
  long terms_checked = 0;
  std::vector<std::string> failures;  // capped, printable descriptions
};

SimReport check_simulation(const Tp& t, TrVariant v, int steps = 0);

}  // namespace lop
