#include <map>
#include <string>

#include "doctest.h"
#include "lop/calculus.hpp"
#include "lop/multidist.hpp"
#include "lop/parser.hpp"
#include "lop/propcheck.hpp"
#include "lop/term.hpp"
#include "lop/translate.hpp"

using namespace lop;

namespace {
Tp P(const std::string& s) { return parse(s, Calc::Cbv); }
Tp B(const std::string& s) { return parse(s, Calc::Bang); }
Tp N(const std::string& s) { return parse(s, Calc::Cbn); }

std::string img(const std::string& src, TrVariant v) {
  return print_term(translate(parse(src, tr_source_calc(v)), v));
}
}  // namespace

TEST_CASE("translation names and calculi") {
  CHECK(tr_from_name("cbv-simple") == TrVariant::CbvSimple);
  CHECK(tr_from_name("cbv-surface") == TrVariant::CbvSurface);
  CHECK(tr_from_name("bang") == TrVariant::TrBang);
  CHECK(tr_from_name("cbn") == TrVariant::TrCbn);
  CHECK_THROWS_AS(tr_from_name("x"), LopError);
  CHECK(std::string(tr_name(TrVariant::CbvSurface)) == "cbv-surface");

  CHECK(tr_source_calc(TrVariant::TrBang) == Calc::Bang);
  CHECK(tr_target_calc(TrVariant::TrBang) == Calc::Bang);
  CHECK(tr_source_calc(TrVariant::TrCbn) == Calc::Cbn);
  CHECK(tr_target_calc(TrVariant::TrCbn) == Calc::Bang);
  CHECK(tr_target_calc(TrVariant::CbvSimple) == Calc::Cbv);
}

TEST_CASE("choice encodings") {
  CHECK(img("x (+) y", TrVariant::CbvSimple) == "__z x y");
  CHECK(img("x (+) y", TrVariant::CbvSurface) == "__z (\\__w. x) (\\__w. y)");
  CHECK(img("x (+) y", TrVariant::TrBang) == "__z !x !y");
  CHECK(img("x (+) y", TrVariant::TrCbn) == "x (+) y");

  CHECK(img("(x (+) y) (+) z", TrVariant::CbvSimple) == "__z (__z x y) z");
  CHECK(img("\\x. x (+) x", TrVariant::CbvSurface) == "\\x. __z (\\__w. x) (\\__w. x)");
}

TEST_CASE("cbn translation: bang lambdas and banged arguments") {
  CHECK(img("\\x. x", TrVariant::TrCbn) == "\\!x. x");
  CHECK(img("(\\x. y) z", TrVariant::TrCbn) == "(\\!x. y) !z");
  CHECK(img("x (y z)", TrVariant::TrCbn) == "x !(y !z)");
  CHECK(img("\\x. x ((\\y. y) z)", TrVariant::TrCbn) == "\\!x. x !((\\!y. y) !z)");
}

TEST_CASE("translation rejects reserved names, wrong calculi, non-affine bang") {
  CHECK_THROWS_AS(translate(mk_app(mk_var("__z"), mk_var("x")), TrVariant::CbvSimple), CalcError);
  CHECK_THROWS_AS(translate(mk_lam("__w", mk_var("x")), TrVariant::CbvSurface), CalcError);
  CHECK_THROWS_AS(translate(B("!x"), TrVariant::CbvSimple), CalcError);  // cbv source
  CHECK_THROWS_AS(translate(B("\\x. x x"), TrVariant::TrBang), CalcError);
}

TEST_CASE("bang images may leave the affine fragment") {
  auto t = B("\\x. \\y. x (+) y");
  REQUIRE(affine_check(t));
  auto u = translate(t, TrVariant::TrBang);
  CHECK(print_term(u) == "\\x. \\y. __z !x !y");
  CHECK(!affine_check(u));
  CHECK(check_simulation(t, TrVariant::TrBang, 1).pass);
}

TEST_CASE("translate_path follows the encoding") {
  auto t = P("(x (+) y) (+) z");
  Path inner = {Sel::Left};
  CHECK(path_to_string(translate_path(t, inner, TrVariant::CbvSimple)) == "fun.arg");
  CHECK(path_to_string(translate_path(t, inner, TrVariant::CbvSurface)) == "fun.arg.body");
  CHECK(path_to_string(translate_path(t, {Sel::Right}, TrVariant::CbvSurface)) == "arg.body");

  auto n = N("x ((\\y. y) z)");
  CHECK(path_to_string(translate_path(n, {Sel::Arg}, TrVariant::TrCbn)) == "arg.bang-body");
}

TEST_CASE("cbv-surface preserves surface-ness, cbv-simple loses it") {
  // a beta redex inside a choice branch is deep in the source
  auto t = P("((\\v. v) (\\w. w)) (+) y");
  auto rs = cbv_redexes(t);
  REQUIRE(rs.size() == 2);
  REQUIRE(rs[1].kind == RK::BetaV);
  REQUIRE(rs[1].deep);

  auto simple = translate(t, TrVariant::CbvSimple);
  auto q1 = translate_path(t, rs[1].path, TrVariant::CbvSimple);
  auto f1 = find_redex_at(simple, Calc::Cbv, q1, RK::BetaV);
  REQUIRE(f1.has_value());
  CHECK(f1->surface);  // lost: deep became surface

  auto surf = translate(t, TrVariant::CbvSurface);
  auto q2 = translate_path(t, rs[1].path, TrVariant::CbvSurface);
  auto f2 = find_redex_at(surf, Calc::Cbv, q2, RK::BetaV);
  REQUIRE(f2.has_value());
  CHECK(!f2->surface);  // the thunk keeps it deep

  CHECK(check_simulation(t, TrVariant::CbvSimple, 2).pass);
  CHECK(check_simulation(t, TrVariant::CbvSurface, 2).pass);
}

TEST_CASE("steps commute with translation on worked examples") {
  CHECK(check_simulation(P("(\\x. x (+) x) (\\y. y)"), TrVariant::CbvSurface, 3).pass);
  CHECK(check_simulation(P("(\\x. x) ((\\y. y) (+) (\\z. z z))"), TrVariant::CbvSimple, 3).pass);
  CHECK(check_simulation(B("(\\!x. x (x (+) y)) !(\\v. v)"), TrVariant::TrBang, 3).pass);
  CHECK(check_simulation(N("(\\x. x x) (y (+) z)"), TrVariant::TrCbn, 3).pass);

  auto rep = check_simulation(
      P("(\\x. (\\y. \\z. y) (+) x x) (\\x. (\\y. \\z. y) (+) x x)"), TrVariant::CbvSurface, 2);
  CHECK(rep.pass);
  CHECK(rep.terms_checked > 1);
}

TEST_CASE("cbn head normal forms map to bang surface normal forms") {
  for (const char* s : {"\\x. x ((\\y. y) z)", "x", "x (y (+) z)", "\\x. \\y. x"}) {
    auto t = N(s);
    REQUIRE(is_head_nf(t));
    CHECK(is_surface_nf(translate(t, TrVariant::TrCbn), Calc::Bang));
  }
  for (const char* s : {"(\\x. x) y", "(y (+) z) x", "\\x. (\\y. y) x"}) {
    auto t = N(s);
    REQUIRE(!is_head_nf(t));
    CHECK(!is_surface_nf(translate(t, TrVariant::TrCbn), Calc::Bang));
  }
}

TEST_CASE("translations are injective on small universes") {
  auto run = [](Calc c, TrVariant v) {
    TermGen g;
    g.calc = c;
    g.max_size = 6;
    g.var_pool = 2;
    auto terms = gen_exhaustive(g);
    std::map<std::string, std::string> back;
    for (const auto& t : terms) {
      auto [it, fresh] = back.emplace(canon(translate(t, v)), canon(t));
      if (!fresh) {
        CAPTURE(print_term(t));
        CAPTURE(it->second);
        CHECK(false);
      }
    }
    return terms.size();
  };
  CHECK(run(Calc::Cbv, TrVariant::CbvSimple) > 1000);
  CHECK(run(Calc::Cbv, TrVariant::CbvSurface) > 1000);
  CHECK(run(Calc::Bang, TrVariant::TrBang) > 5000);
  CHECK(run(Calc::Cbn, TrVariant::TrCbn) > 1000);
}

TEST_CASE("translate_md maps entries pointwise") {
  MultiDist m;
  m.entries.push_back({Rat(1, 2), P("x (+) y")});
  m.entries.push_back({Rat(1, 4), P("\\x. x")});
  auto out = translate_md(m, TrVariant::CbvSimple);
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].first == Rat(1, 2));
  CHECK(print_term(out.entries[0].second) == "__z x y");
  CHECK(print_term(out.entries[1].second) == "\\x. x");
}
