#include "lop/calculus.hpp"

#include <algorithm>

namespace lop {

const char* rk_name(RK k) {
  switch (k) {
    case RK::BetaV: return "beta_v";
    case RK::BetaLin: return "beta_lin";
    case RK::BetaBang: return "beta_bang";
    case RK::BetaCbn: return "beta";
    case RK::Oplus: return "oplus";
  }
  return "?";
}

RK rk_from_name(const std::string& s) {
  if (s == "beta_v") return RK::BetaV;
  if (s == "beta_lin") return RK::BetaLin;
  if (s == "beta_bang") return RK::BetaBang;
  if (s == "beta") return RK::BetaCbn;
  if (s == "oplus") return RK::Oplus;
  throw LopError("unknown redex kind: " + s);
}

// ---------- redex enumeration ----------

namespace {

// cbn head contexts are body* fun*: a lambda prefix, then an application spine.
enum class HeadState { LamPrefix, Spine, No };

struct Walk {
  Calc calc;
  std::vector<Redex>* out;
  Path path;

  void node(const Tp& t, bool surface, bool left_ok, HeadState hs) {
    if (calc != Calc::Bang && (t->k == K::Bang || t->k == K::BangLam))
      throw CalcError(std::string(t->k == K::Bang ? "'!'" : "'\\!'") + " at '" +
                      path_to_string(path) + "' does not belong to the " + calc_name(calc) +
                      " calculus");
    switch (calc) {
      case Calc::Cbv:
        if (t->k == K::App && t->a->k == K::Lam && is_value(t->b))
          push(RK::BetaV, surface, left_ok, HeadState::No);
        if (t->k == K::Choice && surface)
          push(RK::Oplus, true, left_ok, HeadState::No);
        break;
      case Calc::Bang:
        if (t->k == K::App && t->a->k == K::Lam)
          push(RK::BetaLin, surface, false, HeadState::No);
        if (t->k == K::App && t->a->k == K::BangLam && t->b->k == K::Bang)
          push(RK::BetaBang, surface, false, HeadState::No);
        if (t->k == K::Choice && surface)
          push(RK::Oplus, true, false, HeadState::No);
        break;
      case Calc::Cbn:
        if (t->k == K::App && t->a->k == K::Lam)
          push(RK::BetaCbn, surface, false, hs);
        if (t->k == K::Choice && surface)
          push(RK::Oplus, true, false, hs);
        break;
    }

    switch (t->k) {
      case K::Var:
        return;
      case K::Lam:
      case K::BangLam: {
        bool s2 = surface;
        HeadState h2 = hs;
        if (calc == Calc::Cbv) s2 = false;
        if (calc == Calc::Cbn) h2 = (hs == HeadState::LamPrefix) ? HeadState::LamPrefix : HeadState::No;
        path.push_back(Sel::Body);
        node(t->a, s2, false, h2);
        path.pop_back();
        return;
      }
      case K::App: {
        HeadState hf = (hs == HeadState::No) ? HeadState::No : HeadState::Spine;
        path.push_back(Sel::Fun);
        node(t->a, surface, left_ok, hf);
        path.pop_back();
        bool arg_surface = (calc == Calc::Cbn) ? false : surface;
        bool arg_left = left_ok && is_value(t->a);
        path.push_back(Sel::Arg);
        node(t->b, arg_surface, arg_left, HeadState::No);
        path.pop_back();
        return;
      }
      case K::Bang:
        path.push_back(Sel::BangBody);
        node(t->a, false, false, HeadState::No);
        path.pop_back();
        return;
      case K::Choice:
        path.push_back(Sel::Left);
        node(t->a, false, false, HeadState::No);
        path.pop_back();
        path.push_back(Sel::Right);
        node(t->b, false, false, HeadState::No);
        path.pop_back();
        return;
    }
  }

  void push(RK kind, bool surface, bool left_ok, HeadState hs) {
    Redex r;
    r.path = path;
    r.kind = kind;
    r.surface = surface;
    r.deep = !surface;
    switch (calc) {
      case Calc::Cbv:
        r.left = left_ok;
        r.internal = !left_ok;
        break;
      case Calc::Bang:
        r.internal = r.deep;
        break;
      case Calc::Cbn:
        r.head = hs != HeadState::No;
        r.internal = !r.head;
        break;
    }
    out->push_back(r);
  }
};

}  // namespace

std::vector<Redex> redexes(const Tp& t, Calc c) {
  std::vector<Redex> out;
  Walk w{c, &out, {}};
  w.node(t, /*surface=*/true, /*left_ok=*/c == Calc::Cbv, HeadState::LamPrefix);
  return out;
}

std::optional<Redex> find_redex_at(const Tp& t, Calc c, const Path& p, RK kind) {
  for (const Redex& r : redexes(t, c))
    if (r.kind == kind && r.path == p) return r;
  return std::nullopt;
}

bool has_redex(const Tp& t, Calc c) { return !redexes(t, c).empty(); }

bool has_surface_redex(const Tp& t, Calc c) {
  for (const Redex& r : redexes(t, c))
    if (r.surface) return true;
  return false;
}

bool has_head_redex(const Tp& t) {
  for (const Redex& r : redexes(t, Calc::Cbn))
    if (r.head) return true;
  return false;
}

bool is_head_nf(const Tp& t) { return !has_head_redex(t); }

bool is_surface_nf(const Tp& t, Calc c) { return !has_surface_redex(t, c); }

NfKind cbv_nf_kind(const Tp& t) {
  auto rs = redexes(t, Calc::Cbv);
  if (rs.empty()) return NfKind::Normal;
  for (const Redex& r : rs)
    if (r.surface) return NfKind::Reducible;
  return NfKind::SurfaceNormalOnly;
}

// ---------- stepping ----------

MultiDist apply_redex(const Tp& t, const Redex& r, Calc c) {
  auto found = find_redex_at(t, c, r.path, r.kind);
  if (!found)
    throw InvalidRedex("no " + std::string(rk_name(r.kind)) + " redex at '" +
                       path_to_string(r.path) + "' in " + print_term(t));
  Tp sub = subterm_at(t, r.path);
  switch (r.kind) {
    case RK::BetaV:
    case RK::BetaLin:
    case RK::BetaCbn: {
      Tp res = subst(sub->a->a, sub->a->name, sub->b);
      return md_singleton(replace_at(t, r.path, res));
    }
    case RK::BetaBang: {
      Tp res = subst(sub->a->a, sub->a->name, sub->b->a);
      return md_singleton(replace_at(t, r.path, res));
    }
    case RK::Oplus: {
      Rat half(1, 2);
      MultiDist out;
      out.entries.emplace_back(half, replace_at(t, r.path, sub->a));
      out.entries.emplace_back(half, replace_at(t, r.path, sub->b));
      return out;
    }
  }
  throw LopError("apply_redex: unreachable");
}

// ---------- affine restriction ----------

namespace {

void count_occurrences(const Tp& t, const std::string& x, bool under_bang, int& count,
                       bool& banged) {
  switch (t->k) {
    case K::Var:
      if (t->name == x) {
        ++count;
        if (under_bang) banged = true;
      }
      return;
    case K::Lam:
    case K::BangLam:
      if (t->name == x) return;  // shadowed
      count_occurrences(t->a, x, under_bang, count, banged);
      return;
    case K::App:
    case K::Choice:
      count_occurrences(t->a, x, under_bang, count, banged);
      count_occurrences(t->b, x, under_bang, count, banged);
      return;
    case K::Bang:
      count_occurrences(t->a, x, true, count, banged);
      return;
  }
}

void affine_walk(const Tp& t, Path& path, std::vector<AffineViolation>& out) {
  if (t->k == K::Lam) {
    int count = 0;
    bool banged = false;
    count_occurrences(t->a, t->name, false, count, banged);
    if (banged)
      out.push_back({path, t->name, "under bang"});
    else if (count > 1)
      out.push_back({path, t->name, "duplicated"});
  }
  switch (t->k) {
    case K::Var:
      return;
    case K::Lam:
    case K::BangLam:
      path.push_back(Sel::Body);
      affine_walk(t->a, path, out);
      path.pop_back();
      return;
    case K::App:
      path.push_back(Sel::Fun);
      affine_walk(t->a, path, out);
      path.pop_back();
      path.push_back(Sel::Arg);
      affine_walk(t->b, path, out);
      path.pop_back();
      return;
    case K::Bang:
      path.push_back(Sel::BangBody);
      affine_walk(t->a, path, out);
      path.pop_back();
      return;
    case K::Choice:
      path.push_back(Sel::Left);
      affine_walk(t->a, path, out);
      path.pop_back();
      path.push_back(Sel::Right);
      affine_walk(t->b, path, out);
      path.pop_back();
      return;
  }
}

}  // namespace

std::vector<AffineViolation> affine_violations(const Tp& t) {
  std::vector<AffineViolation> out;
  Path path;
  affine_walk(t, path, out);
  return out;
}

bool affine_check(const Tp& t) { return affine_violations(t).empty(); }

void require_affine(const Tp& t) {
  auto vs = affine_violations(t);
  if (vs.empty()) return;
  const auto& v = vs.front();
  throw CalcError("term is not affine: variable '" + v.var + "' of \\" + v.var + " at '" +
                  path_to_string(v.lam_path) + "' is " + v.reason + " in " + print_term(t));
}

// ---------- lifting ----------

MultiDist lift_step(const MultiDist& m, const std::vector<LiftChoice>& choices, Calc c) {
  if (choices.size() != m.entries.size())
    throw InvalidRedex("lift_step: " + std::to_string(choices.size()) + " choices for " +
                       std::to_string(m.entries.size()) + " entries");
  MultiDist out;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const auto& [p, t] = m.entries[i];
    if (!choices[i].reduce) {
      out.entries.emplace_back(p, t);
      continue;
    }
    MultiDist res;
    try {
      res = apply_redex(t, choices[i].r, c);
    } catch (const InvalidRedex& e) {
      throw InvalidRedex("entry " + std::to_string(i) + ": " + e.what());
    }
    for (auto& [q, u] : res.entries) out.entries.emplace_back(p * q, u);
  }
  if (md_mass(out) != md_mass(m))
    throw std::logic_error("lift_step broke mass conservation");
  return out;
}

FullStepResult full_step_with(const MultiDist& m, const RedexSelector& pick, Calc c) {
  FullStepResult res;
  res.choices.resize(m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) {
    if (auto r = pick(m.entries[i].second)) {
      res.choices[i].reduce = true;
      res.choices[i].r = *r;
      res.any_reduced = true;
    }
  }
  res.next = lift_step(m, res.choices, c);
  return res;
}

}  // namespace lop
