#include "lop/translate.hpp"

#include <deque>
#include <set>

namespace lop {

static const char* kZ = "__z";
static const char* kW = "__w";

const char* tr_name(TrVariant v) {
  switch (v) {
    case TrVariant::CbvSimple: return "cbv-simple";
    case TrVariant::CbvSurface: return "cbv-surface";
    case TrVariant::TrBang: return "bang";
    case TrVariant::TrCbn: return "cbn";
  }
  return "?";
}

TrVariant tr_from_name(const std::string& s) {
  if (s == "cbv-simple") return TrVariant::CbvSimple;
  if (s == "cbv-surface") return TrVariant::CbvSurface;
  if (s == "bang") return TrVariant::TrBang;
  if (s == "cbn") return TrVariant::TrCbn;
  throw LopError("unknown translation: " + s);
}

Calc tr_source_calc(TrVariant v) {
  switch (v) {
    case TrVariant::CbvSimple:
    case TrVariant::CbvSurface:
      return Calc::Cbv;
    case TrVariant::TrBang:
      return Calc::Bang;
    case TrVariant::TrCbn:
      return Calc::Cbn;
  }
  return Calc::Cbv;
}

Calc tr_target_calc(TrVariant v) {
  switch (v) {
    case TrVariant::CbvSimple:
    case TrVariant::CbvSurface:
      return Calc::Cbv;
    case TrVariant::TrBang:
    case TrVariant::TrCbn:
      return Calc::Bang;
  }
  return Calc::Cbv;
}

static void reject_reserved(const Tp& t) {
  switch (t->k) {
    case K::Var:
      if (t->name.rfind("__", 0) == 0)
        throw CalcError("source term uses reserved name " + t->name);
      return;
    case K::Lam:
    case K::BangLam:
      if (t->name.rfind("__", 0) == 0)
        throw CalcError("source term binds reserved name " + t->name);
      reject_reserved(t->a);
      return;
    case K::App:
    case K::Choice:
      reject_reserved(t->a);
      reject_reserved(t->b);
      return;
    case K::Bang:
      reject_reserved(t->a);
      return;
  }
}

static Tp tr(const Tp& t, TrVariant v) {
  switch (t->k) {
    case K::Var:
      return t;
    case K::Lam:
      if (v == TrVariant::TrCbn) return mk_blam(t->name, tr(t->a, v));
      return mk_lam(t->name, tr(t->a, v));
    case K::BangLam:
      return mk_blam(t->name, tr(t->a, v));
    case K::App:
      if (v == TrVariant::TrCbn) return mk_app(tr(t->a, v), mk_bang(tr(t->b, v)));
      return mk_app(tr(t->a, v), tr(t->b, v));
    case K::Bang:
      return mk_bang(tr(t->a, v));
    case K::Choice: {
      Tp l = tr(t->a, v), r = tr(t->b, v);
      switch (v) {
        case TrVariant::CbvSimple:
          return mk_app(mk_app(mk_var(kZ), l), r);
        case TrVariant::CbvSurface:
          return mk_app(mk_app(mk_var(kZ), mk_lam(kW, l)), mk_lam(kW, r));
        case TrVariant::TrBang:
          return mk_app(mk_app(mk_var(kZ), mk_bang(l)), mk_bang(r));
        case TrVariant::TrCbn:
          return mk_choice(l, r);
      }
      break;
    }
  }
  throw LopError("translate: unreachable");
}

Tp translate(const Tp& t, TrVariant v) {
  validate_for_calc(t, tr_source_calc(v));
  if (tr_source_calc(v) == Calc::Bang) require_affine(t);
  reject_reserved(t);
  return tr(t, v);
}

MultiDist translate_md(const MultiDist& m, TrVariant v) {
  MultiDist out;
  out.entries.reserve(m.entries.size());
  for (auto& [p, t] : m.entries) out.entries.emplace_back(p, translate(t, v));
  return out;
}

Path translate_path(const Tp& src, const Path& p, TrVariant v) {
  Path out;
  Tp cur = src;
  for (Sel s : p) {
    switch (cur->k) {
      case K::Choice:
        switch (v) {
          case TrVariant::CbvSimple:
            if (s == Sel::Left) { out.push_back(Sel::Fun); out.push_back(Sel::Arg); }
            else { out.push_back(Sel::Arg); }
            break;
          case TrVariant::CbvSurface:
            if (s == Sel::Left) { out.push_back(Sel::Fun); out.push_back(Sel::Arg); }
            else { out.push_back(Sel::Arg); }
            out.push_back(Sel::Body);
            break;
          case TrVariant::TrBang:
            if (s == Sel::Left) { out.push_back(Sel::Fun); out.push_back(Sel::Arg); }
            else { out.push_back(Sel::Arg); }
            out.push_back(Sel::BangBody);
            break;
          case TrVariant::TrCbn:
            out.push_back(s);
            break;
        }
        break;
      case K::App:
        if (v == TrVariant::TrCbn && s == Sel::Arg) {
          out.push_back(Sel::Arg);
          out.push_back(Sel::BangBody);
        } else {
          out.push_back(s);
        }
        break;
      default:
        out.push_back(s);
        break;
    }
    // advance in the source
    switch (s) {
      case Sel::Fun:
      case Sel::Left:
        cur = cur->a;
        break;
      case Sel::Arg:
      case Sel::Right:
        cur = cur->b;
        break;
      case Sel::Body:
      case Sel::BangBody:
        cur = cur->a;
        break;
    }
  }
  return out;
}

// ---------- simulation check ----------

namespace {

bool check_one(const Tp& t, TrVariant v, SimReport& rep) {
  Calc cs = tr_source_calc(v), ct = tr_target_calc(v);
  Tp img = translate(t, v);
  bool ok = true;
  auto fail = [&](const std::string& msg) {
    ok = false;
    rep.pass = false;
    if (rep.failures.size() < 8)
      rep.failures.push_back(print_term(t) + ": " + msg);
  };

  std::vector<Redex> rs_all = redexes(t, cs);
  std::vector<Redex> rs;
  for (auto& r : rs_all)
    if (v == TrVariant::TrCbn || r.kind != RK::Oplus) rs.push_back(r);
  std::vector<Redex> rt = redexes(img, ct);

  if (rs.size() != rt.size())
    fail("redex count mismatch: source " + std::to_string(rs.size()) + " vs image " +
         std::to_string(rt.size()));

  for (auto& r : rs) {
    Path q = translate_path(t, r.path, v);
    RK want = RK::BetaV;
    switch (v) {
      case TrVariant::CbvSimple:
      case TrVariant::CbvSurface:
        want = RK::BetaV;
        break;
      case TrVariant::TrBang:
        want = r.kind;
        break;
      case TrVariant::TrCbn:
        want = (r.kind == RK::Oplus) ? RK::Oplus : RK::BetaBang;
        break;
    }
    auto found = find_redex_at(img, ct, q, want);
    if (!found) {
      fail("no image redex " + std::string(rk_name(want)) + " at '" + path_to_string(q) +
           "' for source redex at '" + path_to_string(r.path) + "'");
      continue;
    }
    if (v != TrVariant::CbvSimple && found->surface != r.surface)
      fail("surface flag mismatch at '" + path_to_string(r.path) + "'");
    MultiDist via_src = translate_md(apply_redex(t, r, cs), v);
    MultiDist via_img = apply_redex(img, *found, ct);
    if (!md_eq(via_src, via_img))
      fail("step at '" + path_to_string(r.path) + "' does not commute with translation: " +
           md_to_string(via_src) + " vs " + md_to_string(via_img));
  }

  if (v == TrVariant::TrCbn) {
    if (is_head_nf(t) != is_surface_nf(img, Calc::Bang))
      fail("head-normal/surface-normal mismatch");
  }
  return ok;
}

}  // namespace

SimReport check_simulation(const Tp& t, TrVariant v, int steps) {
  SimReport rep;
  Calc cs = tr_source_calc(v);
  std::set<std::string> seen;
  std::deque<std::pair<Tp, int>> q;
  q.emplace_back(t, steps);
  seen.insert(canon(t));
  while (!q.empty()) {
    auto [cur, fuel] = q.front();
    q.pop_front();
    ++rep.terms_checked;
    check_one(cur, v, rep);
    if (fuel == 0) continue;
    for (auto& r : redexes(cur, cs)) {
      for (auto& [p, u] : apply_redex(cur, r, cs).entries) {
        if (seen.insert(canon(u)).second) q.emplace_back(u, fuel - 1);
      }
    }
  }
  return rep;
}

}  // namespace lop
