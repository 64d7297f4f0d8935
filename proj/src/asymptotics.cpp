#include "lop/asymptotics.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

#include "lop/parser.hpp"

namespace lop {

// ---------- strategies ----------

Strategy make_strategy(const std::string& name, Calc c) {
  Strategy s;
  s.calc = c;
  if (name == "full-surface") s.name = StratName::FullSurface;
  else if (name == "full-left") s.name = StratName::FullLeft;
  else if (name == "full-head") s.name = StratName::FullHead;
  else if (name == "full-any") s.name = StratName::FullAny;
  else if (name == "leftmost-any") s.name = StratName::LeftmostAny;
  else if (name.rfind("random(", 0) == 0 && name.back() == ')') {
    s.name = StratName::Random;
    std::string seed = name.substr(7, name.size() - 8);
    try {
      s.seed = std::stoull(seed);
    } catch (...) {
      throw LopError("bad random strategy seed: " + seed);
    }
  } else {
    throw LopError("unknown strategy: " + name);
  }
  if (s.name == StratName::FullLeft && c != Calc::Cbv)
    throw CalcError("full-left is a cbv strategy");
  if (s.name == StratName::FullHead && c != Calc::Cbn)
    throw CalcError("full-head is a cbn strategy");
  return s;
}

std::string strategy_desc(const Strategy& s) {
  switch (s.name) {
    case StratName::FullSurface:
      switch (s.surface_pick) {
        case SurfacePick::Leftmost: return "full-surface";
        case SurfacePick::Rightmost: return "full-surface/rightmost";
        case SurfacePick::RandomPick: return "full-surface/random(" + std::to_string(s.seed) + ")";
      }
      return "full-surface";
    case StratName::FullLeft: return "full-left";
    case StratName::FullHead: return "full-head";
    case StratName::FullAny: return "full-any";
    case StratName::LeftmostAny: return "leftmost-any";
    case StratName::Random: return "random(" + std::to_string(s.seed) + ")";
  }
  return "?";
}

bool StrategyRunner::entry_is_normal(const Tp& t) const {
  auto rs = redexes(t, strat.calc);
  switch (strat.name) {
    case StratName::FullSurface:
      return std::none_of(rs.begin(), rs.end(), [](const Redex& r) { return r.surface; });
    case StratName::FullLeft:
      return std::none_of(rs.begin(), rs.end(), [](const Redex& r) { return r.left; });
    case StratName::FullHead:
      return std::none_of(rs.begin(), rs.end(), [](const Redex& r) { return r.head; });
    case StratName::FullAny:
    case StratName::LeftmostAny:
    case StratName::Random:
      return rs.empty();
  }
  return true;
}

bool StrategyRunner::all_normal(const MultiDist& m) const {
  for (auto& [p, t] : m.entries)
    if (!entry_is_normal(t)) return false;
  return true;
}

FullStepResult StrategyRunner::step(const MultiDist& m) {
  if (strat.name == StratName::LeftmostAny) {
    // single lifted step: only the first reducible entry moves
    FullStepResult res;
    res.choices.resize(m.entries.size());
    for (size_t i = 0; i < m.entries.size(); ++i) {
      auto rs = redexes(m.entries[i].second, strat.calc);
      if (!rs.empty()) {
        res.choices[i].reduce = true;
        res.choices[i].r = rs.front();
        res.any_reduced = true;
        break;
      }
    }
    res.next = lift_step(m, res.choices, strat.calc);
    return res;
  }

  auto pick = [this](const Tp& t) -> std::optional<Redex> {
    auto rs = redexes(t, strat.calc);
    switch (strat.name) {
      case StratName::FullSurface: {
        std::vector<Redex> surf;
        for (auto& r : rs)
          if (r.surface) surf.push_back(r);
        if (surf.empty()) return std::nullopt;
        switch (strat.surface_pick) {
          case SurfacePick::Leftmost: return surf.front();
          case SurfacePick::Rightmost: return surf.back();
          case SurfacePick::RandomPick: {
            std::uniform_int_distribution<size_t> d(0, surf.size() - 1);
            return surf[d(rng)];
          }
        }
        return surf.front();
      }
      case StratName::FullLeft:
        for (auto& r : rs)
          if (r.left) return r;
        return std::nullopt;
      case StratName::FullHead:
        for (auto& r : rs)
          if (r.head) return r;
        return std::nullopt;
      case StratName::FullAny:
        if (rs.empty()) return std::nullopt;
        return rs.front();
      case StratName::Random: {
        if (rs.empty()) return std::nullopt;
        std::uniform_int_distribution<size_t> d(0, rs.size() - 1);
        return rs[d(rng)];
      }
      case StratName::LeftmostAny:
        break;  // handled above
    }
    return std::nullopt;
  };
  return full_step_with(m, pick, strat.calc);
}

// ---------- observation sets ----------

const char* obs_name(ObsId id) {
  switch (id) {
    case ObsId::Values: return "values";
    case ObsId::ValuesUpToBeta: return "values-upto-beta";
    case ObsId::NormalForms: return "normal-forms";
    case ObsId::NormalFormSingletons: return "normal-form-singletons";
    case ObsId::SurfaceNfBang: return "surface-nf-bang";
    case ObsId::SurfaceNfBangUpToBeta: return "surface-nf-bang-upto-beta";
    case ObsId::Hnf: return "hnf";
    case ObsId::HnfUpToBeta: return "hnf-upto-beta";
    case ObsId::CbnNfSingletons: return "cbn-nf-singletons";
  }
  return "?";
}

ObsId obs_from_name(const std::string& s) {
  for (ObsId id : {ObsId::Values, ObsId::ValuesUpToBeta, ObsId::NormalForms,
                   ObsId::NormalFormSingletons, ObsId::SurfaceNfBang,
                   ObsId::SurfaceNfBangUpToBeta, ObsId::Hnf, ObsId::HnfUpToBeta,
                   ObsId::CbnNfSingletons})
    if (s == obs_name(id)) return id;
  throw LopError("unknown observation set: " + s);
}

ObsSet make_obs(const std::string& name, Calc c, int join_fuel) {
  ObsSet o;
  o.id = obs_from_name(name);
  o.calc = c;
  o.join_fuel = join_fuel;
  switch (o.id) {
    case ObsId::Values:
    case ObsId::ValuesUpToBeta:
      if (c != Calc::Cbv) throw CalcError(std::string(obs_name(o.id)) + " observes cbv terms");
      break;
    case ObsId::SurfaceNfBang:
    case ObsId::SurfaceNfBangUpToBeta:
      if (c != Calc::Bang) throw CalcError(std::string(obs_name(o.id)) + " observes bang terms");
      break;
    case ObsId::Hnf:
    case ObsId::HnfUpToBeta:
    case ObsId::CbnNfSingletons:
      if (c != Calc::Cbn) throw CalcError(std::string(obs_name(o.id)) + " observes cbn terms");
      break;
    case ObsId::NormalForms:
    case ObsId::NormalFormSingletons:
      break;
  }
  return o;
}

// ---------- classifier ----------

namespace {

std::vector<Tp> beta_successors(const Tp& t, Calc c) {
  std::vector<Tp> out;
  for (auto& r : redexes(t, c)) {
    if (r.kind == RK::Oplus) continue;
    out.push_back(apply_redex(t, r, c).entries.front().second);
  }
  return out;
}

// First beta-normal node of the reduction graph, if it fits in fuel nodes.
std::optional<Tp> bounded_beta_nf(const Tp& t, Calc c, int fuel) {
  std::set<std::string> seen{canon(t)};
  std::deque<Tp> q{t};
  while (!q.empty()) {
    Tp cur = q.front();
    q.pop_front();
    auto succ = beta_successors(cur, c);
    if (succ.empty()) return cur;
    for (auto& s : succ) {
      if (seen.contains(canon(s))) continue;
      if ((int)seen.size() >= fuel) return std::nullopt;
      seen.insert(canon(s));
      q.push_back(s);
    }
  }
  return std::nullopt;  // graph exhausted without a normal form (cycle)
}

// Bidirectional search for a common beta reduct.
bool beta_joinable(const Tp& a, const Tp& b, Calc c, int fuel) {
  std::string ka = canon(a), kb = canon(b);
  if (ka == kb) return true;
  std::set<std::string> seenA{ka}, seenB{kb};
  std::deque<Tp> qa{a}, qb{b};
  long nodes = 2;
  while (!qa.empty() || !qb.empty()) {
    bool expandA = !qa.empty() && (qb.empty() || qa.size() <= qb.size());
    auto& q = expandA ? qa : qb;
    auto& mine = expandA ? seenA : seenB;
    auto& other = expandA ? seenB : seenA;
    Tp cur = q.front();
    q.pop_front();
    for (auto& s : beta_successors(cur, c)) {
      std::string k = canon(s);
      if (other.contains(k)) return true;
      if (mine.insert(k).second) {
        if (++nodes > fuel) return false;
        q.push_back(s);
      }
    }
  }
  return false;
}

}  // namespace

bool Classifier::member(const Tp& t) const {
  switch (obs_.id) {
    case ObsId::Values:
    case ObsId::ValuesUpToBeta:
      return is_value(t);
    case ObsId::NormalForms:
    case ObsId::NormalFormSingletons:
      return !has_redex(t, obs_.calc);
    case ObsId::SurfaceNfBang:
    case ObsId::SurfaceNfBangUpToBeta:
      return is_surface_nf(t, Calc::Bang);
    case ObsId::Hnf:
    case ObsId::HnfUpToBeta:
      return is_head_nf(t);
    case ObsId::CbnNfSingletons:
      return !has_redex(t, Calc::Cbn);
  }
  return false;
}

std::string Classifier::class_of_member(const Tp& t) {
  switch (obs_.id) {
    case ObsId::Values:
    case ObsId::NormalForms:
    case ObsId::SurfaceNfBang:
    case ObsId::Hnf:
      return obs_name(obs_.id);
    case ObsId::NormalFormSingletons:
    case ObsId::CbnNfSingletons:
      return "term:" + canon(t);
    case ObsId::ValuesUpToBeta:
    case ObsId::SurfaceNfBangUpToBeta:
    case ObsId::HnfUpToBeta:
      break;
  }
  // quotient by beta: key by bounded normal form, else join an unresolved
  // class, else open a new one
  if (auto nf = bounded_beta_nf(t, obs_.calc, obs_.join_fuel)) {
    std::string key = "nf:" + canon(*nf);
    reprs_.emplace(key, *nf);
    return key;
  }
  for (auto& uc : unresolved_) {
    if (beta_joinable(t, uc.repr, obs_.calc, obs_.join_fuel)) return uc.key;
  }
  std::string key = "rep:" + canon(t);
  unresolved_.push_back({key, t});
  reprs_.emplace(key, t);
  warnings_.push_back("class " + key +
                      " is unresolved within join fuel; distinct unresolved classes may be "
                      "beta-convertible");
  return key;
}

std::optional<std::string> Classifier::classify(const Tp& t) {
  if (!member(t)) return std::nullopt;
  std::string c = canon(t);
  if (auto it = cache_.find(c); it != cache_.end()) return it->second;
  std::string key = class_of_member(t);
  cache_.emplace(c, key);
  reprs_.emplace(key, t);
  return key;
}

const Tp* Classifier::repr_of(const std::string& key) const {
  auto it = reprs_.find(key);
  return it == reprs_.end() ? nullptr : &it->second;
}

bool Classifier::resolved(const std::string& key) const { return key.rfind("rep:", 0) != 0; }

ClassDist class_distribution(const MultiDist& m, Classifier& cl) {
  // canonical processing order keeps registry keys deterministic
  std::vector<std::pair<std::string, size_t>> order;
  order.reserve(m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) order.emplace_back(canon(m.entries[i].second), i);
  std::sort(order.begin(), order.end());
  ClassDist d;
  for (auto& [c, i] : order) {
    const auto& [p, t] = m.entries[i];
    if (auto key = cl.classify(t))
      d.mass[*key] += p;
    else
      d.residual += p;
  }
  return d;
}

// ---------- evaluation ----------

LimitResult evaluate_limit(const MultiDist& m, const Strategy& strat, const ObsSet& obs,
                           int max_steps, const Rat& epsilon, Trace* trace_out) {
  if (strat.calc != obs.calc)
    throw CalcError("strategy calculus " + std::string(calc_name(strat.calc)) +
                    " does not match observation calculus " + calc_name(obs.calc));
  check_prob(epsilon, "epsilon");
  validate_md(m, strat.calc);
  if (max_steps < 0) throw LopError("max_steps must be >= 0");

  Classifier cl(obs);
  StrategyRunner runner(strat);
  if (trace_out) {
    trace_out->calc = strat.calc;
    trace_out->strategy = strategy_desc(strat);
    trace_out->obs = obs_name(obs.id);
    trace_out->steps.clear();
  }

  // classified members are strategy-normal under these, so masses are monotone
  bool strict_monotone = strat.name == StratName::FullSurface ||
                         strat.name == StratName::FullLeft || strat.name == StratName::FullHead;

  MultiDist cur = m;
  std::vector<LiftChoice> last_choices;
  std::map<std::string, Rat> prev_mass;
  LimitResult out;
  ClassDist d;
  for (int k = 0;; ++k) {
    d = class_distribution(cur, cl);
    if (trace_out) trace_out->steps.push_back({cur, last_choices, d});
    for (auto& [key, p] : prev_mass) {
      Rat now = 0;
      if (auto it = d.mass.find(key); it != d.mass.end()) now = it->second;
      if (now < p) {
        std::string w = "class mass for " + key + " decreased at step " + std::to_string(k) +
                        " (" + rat_str(p) + " -> " + rat_str(now) + ")";
        if (strict_monotone)
          throw std::logic_error("monotonicity violated: " + w);
        out.warnings.push_back(w + " [classifier granularity under a non-surface strategy]");
      }
    }
    for (auto& [key, p] : d.mass) {
      auto [it, fresh] = prev_mass.emplace(key, p);
      if (!fresh && p > it->second) it->second = p;
    }

    bool stop_eps = d.residual <= epsilon;
    bool stop_normal = !stop_eps && runner.all_normal(cur);
    if (stop_eps || stop_normal || k == max_steps) {
      out.steps = k;
      out.converged = stop_eps || stop_normal;
      break;
    }
    auto st = runner.step(cur);
    cur = std::move(st.next);
    last_choices = std::move(st.choices);
  }

  for (auto& [key, p] : d.mass) {
    ClassInfo ci;
    ci.key = key;
    ci.mass = p;
    ci.resolved = cl.resolved(key);
    if (const Tp* r = cl.repr_of(key)) ci.repr = *r;
    out.classes.push_back(std::move(ci));
  }
  out.residual = d.residual;
  for (auto& w : cl.warnings()) out.warnings.push_back(w);

  // exact bookkeeping: classes + residual account for the full mass
  Rat total = out.residual;
  for (auto& c : out.classes) total += c.mass;
  if (total != md_mass(m)) throw std::logic_error("class masses and residual do not sum to mass");
  return out;
}

Rat valuable_mass(const MultiDist& m, const Strategy& strat, int max_steps) {
  ObsSet obs;
  obs.id = ObsId::Values;
  obs.calc = Calc::Cbv;
  LimitResult r = evaluate_limit(m, strat, obs, max_steps, Rat(0));
  Rat total = 0;
  for (auto& c : r.classes) total += c.mass;
  return total;
}

// ---------- comparison ----------

const char* cmp_verdict_name(CmpVerdict v) {
  switch (v) {
    case CmpVerdict::EqualWithin: return "equal-within";
    case CmpVerdict::ABelowB: return "a-below-b";
    case CmpVerdict::BBelowA: return "b-below-a";
    case CmpVerdict::Incomparable: return "incomparable";
  }
  return "?";
}

CmpResult compare_limits(const LimitResult& a, const LimitResult& b) {
  std::map<std::string, std::pair<Rat, Rat>> table;
  for (auto& c : a.classes) table[c.key].first = c.mass;
  for (auto& c : b.classes) table[c.key].second = c.mass;

  Rat tol = a.residual + b.residual;
  CmpResult out;
  bool genuine_pos = false, genuine_neg = false;
  for (auto& [key, ab] : table) {
    CmpDelta d;
    d.key = key;
    d.a = ab.first;
    d.b = ab.second;
    Rat diff = d.b - d.a;
    d.genuine = diff > tol || -diff > tol;
    if (d.genuine && diff > 0) genuine_pos = true;
    if (d.genuine && diff < 0) genuine_neg = true;
    out.deltas.push_back(std::move(d));
  }
  if (genuine_pos && genuine_neg) out.verdict = CmpVerdict::Incomparable;
  else if (genuine_pos) out.verdict = CmpVerdict::ABelowB;
  else if (genuine_neg) out.verdict = CmpVerdict::BBelowA;
  else out.verdict = CmpVerdict::EqualWithin;
  return out;
}

// ---------- JSON ----------

nlohmann::json limit_to_json(const LimitResult& r) {
  nlohmann::json classes = nlohmann::json::array();
  for (auto& c : r.classes) {
    classes.push_back({{"key", c.key},
                       {"repr", c.repr ? print_term(c.repr) : ""},
                       {"mass", rat_str(c.mass)},
                       {"resolved", c.resolved}});
  }
  return nlohmann::json{{"classes", classes},
                        {"residual", rat_str(r.residual)},
                        {"steps", r.steps},
                        {"converged", r.converged},
                        {"warnings", r.warnings}};
}

static nlohmann::json choices_to_json(const std::vector<LiftChoice>& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& c : cs) {
    if (!c.reduce)
      arr.push_back({{"action", "keep"}});
    else
      arr.push_back({{"action", "reduce"},
                     {"path", path_to_string(c.r.path)},
                     {"kind", rk_name(c.r.kind)}});
  }
  return arr;
}

nlohmann::json trace_to_json(const Trace& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (auto& s : t.steps) {
    nlohmann::json classes = nlohmann::json::object();
    for (auto& [k, p] : s.dist.mass) classes[k] = rat_str(p);
    steps.push_back({{"md", md_to_json(s.md)},
                     {"choices", choices_to_json(s.choices)},
                     {"dist", {{"classes", classes}, {"residual", rat_str(s.dist.residual)}}}});
  }
  return nlohmann::json{{"calculus", calc_name(t.calc)},
                        {"strategy", t.strategy},
                        {"obs", t.obs},
                        {"steps", steps}};
}

void replay_trace_json(const nlohmann::json& j, Calc c) {
  const auto& steps = j.at("steps");
  if (!steps.is_array() || steps.empty()) throw LopError("trace has no steps");
  MultiDist prev;
  for (size_t i = 0; i < steps.size(); ++i) {
    MultiDist md = md_from_json(steps[i].at("md"), c);
    if (i > 0) {
      std::vector<LiftChoice> cs;
      for (auto& cj : steps[i].at("choices")) {
        LiftChoice lc;
        if (cj.at("action") == "reduce") {
          lc.reduce = true;
          lc.r.path = path_from_string(cj.at("path").get<std::string>());
          lc.r.kind = rk_from_name(cj.at("kind").get<std::string>());
        }
        cs.push_back(lc);
      }
      MultiDist expect = lift_step(prev, cs, c);
      if (!md_eq(expect, md))
        throw LopError("trace replay mismatch at step " + std::to_string(i) + ": expected " +
                       md_to_string(expect) + ", recorded " + md_to_string(md));
    }
    prev = std::move(md);
  }
}

}  // namespace lop
