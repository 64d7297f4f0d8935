#include "lop/propcheck.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "lop/parser.hpp"
#include "lop/translate.hpp"

namespace lop {

// ---------- generation ----------

namespace {

std::string free_name(int i) { return std::string(1, char('x' + i)); }
std::string binder_name(int depth) { return "b" + std::to_string(depth); }

// exact-size enumeration memoized per (size, binder depth)
struct Enumerator {
  TermGen g;
  std::map<std::pair<int, int>, std::vector<Tp>> memo;

  const std::vector<Tp>& exact(int n, int depth) {
    auto key = std::make_pair(n, depth);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<Tp> out;
    if (n == 1) {
      if (!g.closed_only)
        for (int i = 0; i < g.var_pool; ++i) out.push_back(mk_var(free_name(i)));
      for (int d = 0; d < depth; ++d) out.push_back(mk_var(binder_name(d)));
    } else if (n >= 2) {
      for (auto& b : exact(n - 1, depth + 1)) out.push_back(mk_lam(binder_name(depth), b));
      if (g.calc == Calc::Bang) {
        for (auto& b : exact(n - 1, depth + 1)) out.push_back(mk_blam(binder_name(depth), b));
        for (auto& b : exact(n - 1, depth)) out.push_back(mk_bang(b));
      }
      for (int i = 1; i <= n - 2; ++i) {
        const auto& ls = exact(i, depth);
        const auto& rs = exact(n - 1 - i, depth);
        for (auto& l : ls)
          for (auto& r : rs) out.push_back(mk_app(l, r));
        for (auto& l : ls)
          for (auto& r : rs) out.push_back(mk_choice(l, r));
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

}  // namespace

std::vector<Tp> gen_exhaustive(const TermGen& g) {
  Enumerator e{g, {}};
  std::vector<Tp> out;
  for (int n = 1; n <= g.max_size; ++n) {
    for (auto& t : e.exact(n, 0)) {
      if (g.calc == Calc::Bang && g.affine_only && !affine_check(t)) continue;
      out.push_back(t);
    }
  }
  return out;
}

Tp gen_random_term(const TermGen& g, std::mt19937_64& rng) {
  // recursive descent over a size budget; retries until the side conditions
  // (affine, generable at all) work out
  // smallest term buildable at this depth: a variable when one is in scope,
  // else an identity abstraction (size 2)
  auto min_size = [&](int depth) {
    return (depth > 0 || (!g.closed_only && g.var_pool > 0)) ? 1 : 2;
  };
  std::function<Tp(int, int)> build = [&](int budget, int depth) -> Tp {
    bool have_var = min_size(depth) == 1;
    std::vector<int> opts;
    if (have_var && budget >= 1) opts.push_back(0);
    if (budget >= 2) {
      opts.push_back(1);
      if (g.calc == Calc::Bang) {
        opts.push_back(2);
        if (budget >= 1 + min_size(depth)) opts.push_back(3);
      }
    }
    if (budget >= 1 + 2 * min_size(depth)) {
      opts.push_back(4);
      opts.push_back(5);
    }
    if (opts.empty()) throw LopError("cannot generate a term under these constraints");
    switch (opts[rng() % opts.size()]) {
      case 0: {
        int pool = g.closed_only ? 0 : g.var_pool;
        int n = pool + depth;
        int i = (int)(rng() % (unsigned)n);
        return i < pool ? mk_var(free_name(i)) : mk_var(binder_name(i - pool));
      }
      case 1:
        return mk_lam(binder_name(depth), build(budget - 1, depth + 1));
      case 2:
        return mk_blam(binder_name(depth), build(budget - 1, depth + 1));
      case 3:
        return mk_bang(build(budget - 1, depth));
      case 4: {
        int lo = min_size(depth), hi = budget - 1 - lo;
        int l = lo + (int)(rng() % (unsigned)(hi - lo + 1));
        return mk_app(build(l, depth), build(budget - 1 - l, depth));
      }
      default: {
        int lo = min_size(depth), hi = budget - 1 - lo;
        int l = lo + (int)(rng() % (unsigned)(hi - lo + 1));
        return mk_choice(build(l, depth), build(budget - 1 - l, depth));
      }
    }
  };
  for (int tries = 0; tries < 1000; ++tries) {
    Tp t = build(g.max_size, 0);
    if (g.calc == Calc::Bang && g.affine_only && !affine_check(t)) continue;
    return t;
  }
  throw LopError("failed to generate a term within 1000 tries");
}

MultiDist gen_random_md(const TermGen& g, std::mt19937_64& rng) {
  if (rng() % 2 == 0) return md_singleton(gen_random_term(g, rng));
  MultiDist m;
  Rat half(1, 2);
  m.entries.emplace_back(half, gen_random_term(g, rng));
  m.entries.emplace_back(half, gen_random_term(g, rng));
  return m;
}

// ---------- reachability ----------

bool redex_in_class(const Redex& r, RedexClass rc) {
  switch (rc) {
    case RedexClass::Any: return true;
    case RedexClass::BetaOnly: return r.kind != RK::Oplus;
    case RedexClass::OplusOnly: return r.kind == RK::Oplus;
    case RedexClass::SurfaceOnly: return r.surface;
    case RedexClass::DeepOnly: return r.deep;
  }
  return false;
}

std::vector<MultiDist> md_successors(const MultiDist& m, Calc c, RedexClass rc) {
  std::vector<MultiDist> out;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const auto& [p, t] = m.entries[i];
    for (auto& r : redexes(t, c)) {
      if (!redex_in_class(r, rc)) continue;
      MultiDist next;
      next.entries.reserve(m.entries.size() + 1);
      for (size_t j = 0; j < i; ++j) next.entries.push_back(m.entries[j]);
      for (auto& [q, u] : apply_redex(t, r, c).entries) next.entries.emplace_back(p * q, u);
      for (size_t j = i + 1; j < m.entries.size(); ++j) next.entries.push_back(m.entries[j]);
      out.push_back(std::move(next));
    }
  }
  return out;
}

namespace {

JoinResult join_search(const MultiDist& a, const MultiDist& b, Calc c, long budget,
                       RedexClass rc, bool merged) {
  auto key_of = [&](const MultiDist& m) {
    return merged ? dist_key(associated_distribution(m)) : md_key(m);
  };
  JoinResult res;
  std::string ka = key_of(a), kb = key_of(b);
  res.nodes = 2;
  if (ka == kb) {
    res.joined = true;
    res.meet_key = ka;
    return res;
  }
  std::set<std::string> seen[2] = {{ka}, {kb}};
  std::deque<MultiDist> q[2];
  q[0].push_back(a);
  q[1].push_back(b);
  while (!q[0].empty() || !q[1].empty()) {
    int side = q[0].empty() ? 1 : (q[1].empty() ? 0 : (q[0].size() <= q[1].size() ? 0 : 1));
    MultiDist cur = std::move(q[side].front());
    q[side].pop_front();
    for (auto& s : md_successors(cur, c, rc)) {
      std::string k = key_of(s);
      if (seen[1 - side].contains(k)) {
        res.joined = true;
        res.meet_key = k;
        return res;
      }
      if (seen[side].insert(k).second) {
        if (++res.nodes > budget) return res;  // not exhausted, not joined
        q[side].push_back(std::move(s));
      }
    }
  }
  res.frontier_exhausted = true;
  return res;
}

}  // namespace

JoinResult joinable(const MultiDist& a, const MultiDist& b, Calc c, long budget, RedexClass rc) {
  return join_search(a, b, c, budget, rc, false);
}

JoinResult joinable_merged(const MultiDist& a, const MultiDist& b, Calc c, long budget) {
  return join_search(a, b, c, budget, RedexClass::Any, true);
}

// ---------- reports ----------

std::string report_to_json_line(const CheckReport& r) {
  nlohmann::json j{{"check", r.check},
                   {"calculus", calc_name(r.calc)},
                   {"term", r.term},
                   {"verdict", r.verdict}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j.dump();
}

// ---------- one-lifted-step combinations ----------

namespace {

// every result of one lifted step where each reducing entry uses a redex of
// the class (all Keep/Reduce combinations except all-Keep)
std::vector<MultiDist> lift_combos(const MultiDist& m, Calc c, RedexClass rc) {
  std::vector<std::vector<std::optional<Redex>>> options(m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) {
    options[i].push_back(std::nullopt);
    for (auto& r : redexes(m.entries[i].second, c))
      if (redex_in_class(r, rc)) options[i].emplace_back(r);
  }
  std::vector<MultiDist> out;
  std::vector<LiftChoice> cur(m.entries.size());
  std::function<void(size_t, bool)> rec = [&](size_t i, bool any) {
    if (i == m.entries.size()) {
      if (any) out.push_back(lift_step(m, cur, c));
      return;
    }
    for (auto& opt : options[i]) {
      cur[i].reduce = opt.has_value();
      if (opt) cur[i].r = *opt;
      rec(i + 1, any || opt.has_value());
    }
  };
  rec(0, false);
  return out;
}

std::set<std::string> closure_keys(const MultiDist& m, Calc c, RedexClass rc) {
  std::set<std::string> keys{md_key(m)};
  for (auto& s : lift_combos(m, c, rc)) keys.insert(md_key(s));
  return keys;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& big = a.size() <= b.size() ? b : a;
  for (auto& k : small)
    if (big.contains(k)) return true;
  return false;
}

void base_report(CheckReport* rep, const char* check, Calc c, const Tp& t) {
  if (!rep) return;
  rep->check = check;
  rep->calc = c;
  rep->term = print_term(t);
  rep->verdict = "pass";
  rep->detail.clear();
  rep->witness.clear();
}

}  // namespace

// ---------- diamond / commutation / confluence ----------

bool check_diamond_oplus(const Tp& t, Calc c, CheckReport* rep) {
  base_report(rep, "diamond", c, t);
  MultiDist m = md_singleton(t);
  auto starts = lift_combos(m, c, RedexClass::OplusOnly);
  for (size_t i = 0; i < starts.size(); ++i) {
    for (size_t j = i + 1; j < starts.size(); ++j) {
      if (md_eq(starts[i], starts[j])) continue;
      auto ci = closure_keys(starts[i], c, RedexClass::OplusOnly);
      auto cj = closure_keys(starts[j], c, RedexClass::OplusOnly);
      if (!intersects(ci, cj)) {
        if (rep) {
          rep->verdict = "fail";
          rep->detail = "oplus steps do not rejoin in one lifted step";
          rep->witness = {md_to_string(starts[i]), md_to_string(starts[j])};
        }
        return false;
      }
    }
  }
  return true;
}

bool check_commute_pointwise(const Tp& t, Calc c, CheckReport* rep) {
  base_report(rep, "commute", c, t);
  auto rs = redexes(t, c);
  for (auto& rb : rs) {
    if (rb.kind == RK::Oplus) continue;
    for (auto& ro : rs) {
      if (ro.kind != RK::Oplus) continue;
      MultiDist n = apply_redex(t, rb, c);
      MultiDist s = apply_redex(t, ro, c);
      auto na = closure_keys(n, c, RedexClass::OplusOnly);
      auto sb = closure_keys(s, c, RedexClass::BetaOnly);
      if (!intersects(na, sb)) {
        if (rep) {
          rep->verdict = "fail";
          auto mj = joinable_merged(n, s, c, 20000);
          rep->detail = "beta at '" + path_to_string(rb.path) + "' and oplus at '" +
                        path_to_string(ro.path) + "' do not close in one lifted step each; " +
                        "joinable modulo merging duplicates: " + (mj.joined ? "yes" : "no");
          rep->witness = {md_to_string(n), md_to_string(s)};
        }
        return false;
      }
    }
  }
  return true;
}

bool check_confluence_from(const Tp& t, Calc c, long budget, CheckReport* rep) {
  base_report(rep, "confluence", c, t);
  MultiDist m = md_singleton(t);
  auto starts = md_successors(m, c, RedexClass::Any);
  bool budget_hit = false;
  for (size_t i = 0; i < starts.size(); ++i) {
    for (size_t j = i + 1; j < starts.size(); ++j) {
      if (md_eq(starts[i], starts[j])) continue;
      JoinResult jr = joinable(starts[i], starts[j], c, budget);
      if (jr.joined) continue;
      if (!jr.frontier_exhausted) {
        budget_hit = true;
        continue;
      }
      if (rep) {
        rep->verdict = "fail";
        auto mj = joinable_merged(starts[i], starts[j], c, budget);
        rep->detail = "one-step divergence is definitively unjoinable (explored " +
                      std::to_string(jr.nodes) + " nodes); joinable modulo merging duplicates: " +
                      (mj.joined ? "yes" : "no");
        rep->witness = {md_to_string(starts[i]), md_to_string(starts[j])};
      }
      return false;
    }
  }
  if (budget_hit) {
    if (rep) {
      rep->verdict = "budget-exhausted";
      rep->detail = "some divergence neither joined nor exhausted within budget";
    }
    return false;
  }
  return true;
}

// ---------- standardization ----------

namespace {

// term-level deep reachability with memo shared per search
struct DeepReach {
  Calc calc;
  long budget;
  bool budget_hit = false;
  std::map<std::pair<std::string, std::string>, bool> memo;

  bool reaches(const Tp& a, const Tp& b) {
    std::string ka = canon(a), kb = canon(b);
    if (ka == kb) return true;
    auto key = std::make_pair(ka, kb);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool found = false;
    std::set<std::string> seen{ka};
    std::deque<Tp> q{a};
    long nodes = 1;
    while (!q.empty() && !found) {
      Tp cur = q.front();
      q.pop_front();
      for (auto& r : redexes(cur, calc)) {
        if (!r.deep) continue;
        // deep steps are beta steps (oplus is always surface): singletons
        Tp nxt = apply_redex(cur, r, calc).entries.front().second;
        std::string k = canon(nxt);
        if (k == kb) {
          found = true;
          break;
        }
        if (seen.insert(k).second) {
          if (++nodes > budget) {
            budget_hit = true;
            memo.emplace(key, false);
            return false;
          }
          q.push_back(nxt);
        }
      }
    }
    memo.emplace(key, found);
    return found;
  }
};

std::vector<std::string> prob_multiset(const MultiDist& m) {
  std::vector<std::string> ps;
  ps.reserve(m.entries.size());
  for (auto& [p, t] : m.entries) ps.push_back(rat_str(p));
  std::sort(ps.begin(), ps.end());
  return ps;
}

// perfect bipartite matching: entry i of `from` may serve entry j of `to`
// when probabilities are equal and edge(i, j) holds
bool entries_match(const MultiDist& from, const MultiDist& to,
                   const std::function<bool(const Tp&, const Tp&)>& edge) {
  size_t n = from.entries.size();
  if (n != to.entries.size()) return false;
  std::vector<std::vector<int>> adj(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (from.entries[i].first == to.entries[j].first &&
          edge(from.entries[i].second, to.entries[j].second))
        adj[i].push_back((int)j);
  std::vector<int> match_to(n, -1);
  std::function<bool(size_t, std::vector<bool>&)> augment = [&](size_t i,
                                                                std::vector<bool>& used) {
    for (int j : adj[i]) {
      if (used[j]) continue;
      used[j] = true;
      if (match_to[j] < 0 || augment((size_t)match_to[j], used)) {
        match_to[j] = (int)i;
        return true;
      }
    }
    return false;
  };
  for (size_t i = 0; i < n; ++i) {
    std::vector<bool> used(n, false);
    if (!augment(i, used)) return false;
  }
  return true;
}

}  // namespace

StdWitness standardization_witness(const MultiDist& from, const MultiDist& to, Calc c,
                                   long budget) {
  StdWitness w;
  DeepReach dr{c, budget, false, {}};
  auto target_probs = prob_multiset(to);
  auto deep_edge = [&](const Tp& a, const Tp& b) { return dr.reaches(a, b); };

  std::set<std::string> seen{md_key(from)};
  std::deque<std::pair<MultiDist, int>> q;
  q.emplace_back(from, 0);
  w.nodes = 1;
  while (!q.empty()) {
    auto [cur, depth] = std::move(q.front());
    q.pop_front();
    // deep phase never changes entry count or probabilities
    if (prob_multiset(cur) == target_probs && entries_match(cur, to, deep_edge)) {
      w.found = true;
      w.surface_steps = depth;
      return w;
    }
    // surface phase: single-entry surface steps
    for (auto& s : md_successors(cur, c, RedexClass::SurfaceOnly)) {
      // entries only ever split, so entry count bounds prune the frontier
      if (s.entries.size() > to.entries.size()) continue;
      std::string k = md_key(s);
      if (seen.insert(k).second) {
        if (++w.nodes > budget) {
          w.budget_exhausted = true;
          return w;
        }
        q.emplace_back(std::move(s), depth + 1);
      }
    }
  }
  w.budget_exhausted = dr.budget_hit;  // a definitive no needs exact deep answers
  return w;
}

StdWitness check_standardization_witness(const Trace& tr, long budget) {
  if (tr.steps.empty()) throw LopError("empty trace");
  return standardization_witness(tr.steps.front().md, tr.steps.back().md, tr.calc, budget);
}

bool check_left_standardization_fails(Calc c, CheckReport* rep) {
  // worked counterexamples: a probabilistic target reachable by an interleaved
  // reduction becomes unreachable once the left/head redex is fired first
  std::string src, target_a, target_b;
  if (c == Calc::Cbv) {
    src = "((\\v. v) (\\v. v)) ((\\x. y (+) z) (\\v. v))";
    target_a = "(\\v. v) y";
    target_b = "((\\v. v) (\\v. v)) z";
  } else if (c == Calc::Cbn) {
    src = "(\\x. (\\v. v) (y (+) z)) (\\v. v)";
    target_a = "y";
    target_b = "(\\x. z) (\\v. v)";
  } else {
    throw CalcError("left-standardization fixtures exist for cbv and cbn");
  }
  Tp t = parse(src, c);
  base_report(rep, "regression", c, t);
  MultiDist target;
  Rat half(1, 2);
  target.entries.emplace_back(half, parse(target_a, c));
  target.entries.emplace_back(half, parse(target_b, c));

  // sanity: the target is reachable from the source
  {
    std::set<std::string> seen{md_key(md_singleton(t))};
    std::deque<MultiDist> q{md_singleton(t)};
    bool reachable = false;
    std::string want = md_key(target);
    long nodes = 1;
    while (!q.empty() && !reachable) {
      MultiDist cur = std::move(q.front());
      q.pop_front();
      for (auto& s : md_successors(cur, c, RedexClass::Any)) {
        std::string k = md_key(s);
        if (k == want) {
          reachable = true;
          break;
        }
        if (seen.insert(k).second) {
          ++nodes;
          q.push_back(std::move(s));
        }
      }
    }
    if (!reachable) {
      if (rep) {
        rep->verdict = "fail";
        rep->detail = "fixture target is not reachable at all";
      }
      return false;
    }
  }

  // fire the left (cbv) / head (cbn) redex first
  auto rs = redexes(t, c);
  const Redex* first = nullptr;
  for (auto& r : rs) {
    if ((c == Calc::Cbv && r.left) || (c == Calc::Cbn && r.head)) {
      first = &r;
      break;
    }
  }
  if (!first) throw std::logic_error("fixture has no left/head redex");
  MultiDist m1 = apply_redex(t, *first, c);

  // exhaust the closure; the target must never appear
  std::string want = md_key(target);
  std::set<std::string> seen{md_key(m1)};
  std::deque<MultiDist> q{m1};
  long nodes = 1;
  while (!q.empty()) {
    MultiDist cur = std::move(q.front());
    q.pop_front();
    for (auto& s : md_successors(cur, c, RedexClass::Any)) {
      std::string k = md_key(s);
      if (k == want) {
        if (rep) {
          rep->verdict = "fail";
          rep->detail = "target became reachable after the left-first step";
        }
        return false;
      }
      if (seen.insert(k).second) {
        if (++nodes > 20000)
          throw std::logic_error("fixture closure exceeded its budget; not definitive");
        q.push_back(std::move(s));
      }
    }
  }
  if (rep)
    rep->detail = "target " + md_to_string(target) + " unreachable after left-first step (" +
                  std::to_string(nodes) + " multidistributions exhausted)";
  return true;
}

// ---------- parallel beta-v reduction ----------

namespace {

void dedup_terms(std::vector<Tp>& v) {
  std::set<std::string> seen;
  std::vector<Tp> out;
  for (auto& t : v)
    if (seen.insert(canon(t)).second) out.push_back(t);
  v = std::move(out);
}

}  // namespace

std::vector<Tp> par_successors(const Tp& t) {
  validate_for_calc(t, Calc::Cbv);
  std::vector<Tp> out;
  switch (t->k) {
    case K::Var:
      return {t};
    case K::Lam:
      for (auto& b : par_successors(t->a)) out.push_back(mk_lam(t->name, b));
      break;
    case K::Choice:
      for (auto& l : par_successors(t->a))
        for (auto& r : par_successors(t->b)) out.push_back(mk_choice(l, r));
      break;
    case K::App: {
      auto fs = par_successors(t->a);
      auto as = par_successors(t->b);
      for (auto& f : fs)
        for (auto& a : as) out.push_back(mk_app(f, a));
      if (t->a->k == K::Lam && is_value(t->b)) {
        for (auto& b : par_successors(t->a->a)) {
          for (auto& w : as) {
            if (!is_value(w))
              throw std::logic_error("parallel reduct of a value is not a value");
            out.push_back(subst(b, t->a->name, w));
          }
        }
      }
      break;
    }
    case K::Bang:
    case K::BangLam:
      throw CalcError("parallel reduction is defined on cbv terms");
  }
  dedup_terms(out);
  return out;
}

std::vector<Tp> deep_par_successors(const Tp& t) {
  validate_for_calc(t, Calc::Cbv);
  std::vector<Tp> out;
  switch (t->k) {
    case K::Var:
      return {t};
    case K::Lam:
      for (auto& b : par_successors(t->a)) out.push_back(mk_lam(t->name, b));
      break;
    case K::Choice:
      for (auto& l : par_successors(t->a))
        for (auto& r : par_successors(t->b)) out.push_back(mk_choice(l, r));
      break;
    case K::App:
      for (auto& f : deep_par_successors(t->a))
        for (auto& a : deep_par_successors(t->b)) out.push_back(mk_app(f, a));
      break;
    case K::Bang:
    case K::BangLam:
      throw CalcError("parallel reduction is defined on cbv terms");
  }
  dedup_terms(out);
  return out;
}

bool par_reduces(const Tp& a, const Tp& b) {
  std::string kb = canon(b);
  for (auto& s : par_successors(a))
    if (canon(s) == kb) return true;
  return false;
}

bool deep_par_reduces(const Tp& a, const Tp& b) {
  std::string kb = canon(b);
  for (auto& s : deep_par_successors(a))
    if (canon(s) == kb) return true;
  return false;
}

bool check_postponement(const Tp& t, long budget, CheckReport* rep) {
  base_report(rep, "postpone", Calc::Cbv, t);
  auto deep_edge = [](const Tp& a, const Tp& b) { return deep_par_reduces(a, b); };
  for (auto& m1 : deep_par_successors(t)) {
    for (auto& r : redexes(m1, Calc::Cbv)) {
      if (!r.surface) continue;
      MultiDist n = apply_redex(m1, r, Calc::Cbv);
      // search s with [t] =>surface* s and s deep-parallel-lifts to n
      auto target_probs = prob_multiset(n);
      std::set<std::string> seen{md_key(md_singleton(t))};
      std::deque<MultiDist> q{md_singleton(t)};
      long nodes = 1;
      bool found = false, budget_hit = false;
      while (!q.empty() && !found) {
        MultiDist cur = std::move(q.front());
        q.pop_front();
        if (prob_multiset(cur) == target_probs && entries_match(cur, n, deep_edge)) {
          found = true;
          break;
        }
        for (auto& s : md_successors(cur, Calc::Cbv, RedexClass::SurfaceOnly)) {
          if (s.entries.size() > n.entries.size()) continue;
          std::string k = md_key(s);
          if (seen.insert(k).second) {
            if (++nodes > budget) {
              budget_hit = true;
              break;
            }
            q.push_back(std::move(s));
          }
        }
        if (budget_hit) break;
      }
      if (!found) {
        if (rep) {
          rep->verdict = budget_hit ? "budget-exhausted" : "fail";
          rep->detail = "deep-parallel to " + print_term(m1) + ", then surface at '" +
                        path_to_string(r.path) + "' -> " + md_to_string(n) +
                        " has no surface-first reordering";
        }
        return false;
      }
    }
  }
  return true;
}

// ---------- suite drivers ----------

void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  int nw = (int)std::min<long>(jobs, n);
  std::vector<std::thread> ws;
  ws.reserve(nw);
  for (int w = 0; w < nw; ++w)
    ws.emplace_back([&] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& th : ws) th.join();
}

namespace {

struct Collector {
  const SuiteOptions& opt;
  SuiteSummary sum;
  std::mutex mu;

  void add(const CheckReport& r) {
    std::lock_guard<std::mutex> lk(mu);
    ++sum.checked;
    if (r.verdict == "pass") {
      ++sum.passed;
    } else {
      if (r.verdict == "budget-exhausted")
        ++sum.budget_exhausted;
      else
        ++sum.failed;
      if ((long)sum.failures.size() < opt.max_failures) sum.failures.push_back(r);
    }
    if (opt.sink) opt.sink(r);
  }
};

std::vector<Tp> suite_universe(const SuiteOptions& o) {
  TermGen g;
  g.calc = o.calc;
  g.max_size = o.size;
  g.var_pool = o.var_pool;
  g.affine_only = true;
  return gen_exhaustive(g);
}

SuiteSummary run_term_suite(const SuiteOptions& o,
                            const std::function<bool(const Tp&, CheckReport*)>& check) {
  auto universe = suite_universe(o);
  Collector col{o, {}, {}};
  parallel_for((long)universe.size(), o.jobs, [&](long i) {
    CheckReport rep;
    try {
      check(universe[i], &rep);
    } catch (const std::exception& e) {
      rep.verdict = "fail";
      rep.detail = std::string("exception: ") + e.what();
      rep.term = print_term(universe[i]);
      rep.calc = o.calc;
    }
    col.add(rep);
  });
  return col.sum;
}

}  // namespace

SuiteSummary run_confluence_suite(const SuiteOptions& o) {
  return run_term_suite(o, [&](const Tp& t, CheckReport* rep) {
    return check_confluence_from(t, o.calc, o.budget, rep);
  });
}

SuiteSummary run_diamond_suite(const SuiteOptions& o) {
  return run_term_suite(
      o, [&](const Tp& t, CheckReport* rep) { return check_diamond_oplus(t, o.calc, rep); });
}

SuiteSummary run_commute_suite(const SuiteOptions& o) {
  return run_term_suite(
      o, [&](const Tp& t, CheckReport* rep) { return check_commute_pointwise(t, o.calc, rep); });
}

namespace {

// full reduction graph of the term: finite and acyclic means strongly
// normalizing; budget overflow leaves it unknown
enum class SnStatus { SN, NotSN, Unknown };

SnStatus term_sn_status(const Tp& t, Calc c, long budget) {
  std::map<std::string, std::vector<std::string>> adj;
  std::map<std::string, Tp> terms;
  std::deque<Tp> q{t};
  terms.emplace(canon(t), t);
  while (!q.empty()) {
    Tp cur = q.front();
    q.pop_front();
    std::string k = canon(cur);
    auto& edges = adj[k];
    for (auto& r : redexes(cur, c)) {
      for (auto& [p, u] : apply_redex(cur, r, c).entries) {
        std::string ku = canon(u);
        edges.push_back(ku);
        if (terms.emplace(ku, u).second) {
          if ((long)terms.size() > budget) return SnStatus::Unknown;
          q.push_back(u);
        }
      }
    }
  }
  // DFS cycle detection
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::vector<std::pair<std::string, size_t>> stack;
  for (auto& [k, _] : adj) {
    if (color[k]) continue;
    stack.emplace_back(k, 0);
    color[k] = 1;
    while (!stack.empty()) {
      auto& [cur, idx] = stack.back();
      auto& edges = adj[cur];
      if (idx == edges.size()) {
        color[cur] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& nxt = edges[idx++];
      if (color[nxt] == 1) return SnStatus::NotSN;
      if (color[nxt] == 0) {
        color[nxt] = 1;
        stack.emplace_back(nxt, 0);
      }
    }
  }
  return SnStatus::SN;
}

// Random applicative combination of closed combinators; unlike uniform random
// terms (which are normal or one step away from normal most of the time)
// these keep reducing, so the traces exercise real surface/deep interleavings.
Tp trace_seed(Calc c, int slots, std::mt19937_64& rng) {
  std::vector<Tp> pool;
  Tp vx = mk_var("x");
  Tp idm = mk_lam("v", mk_var("v"));
  if (c == Calc::Bang) {
    pool = {idm, mk_blam("v", mk_var("v")),
            mk_blam("v", mk_app(mk_var("v"), mk_var("v"))),  // duplicator, legal under \!
            mk_blam("v", mk_blam("w", mk_var("v"))), vx};
  } else {
    pool = {idm,
            mk_lam("v", mk_app(mk_var("v"), mk_var("v"))),
            mk_lam("v", mk_lam("w", mk_var("v"))),
            mk_lam("v", mk_lam("w", mk_var("w"))),
            mk_lam("v", mk_lam("w", mk_app(mk_var("v"), mk_var("w")))),
            vx};
  }
  std::function<Tp(int)> build = [&](int n) -> Tp {
    if (n <= 1) return pool[rng() % pool.size()];
    int split = 1 + (int)(rng() % (unsigned)(n - 1));
    Tp f = build(split), a = build(n - split);
    if (c == Calc::Bang && rng() % 2) a = mk_bang(a);
    if (rng() % 8 == 0) return mk_choice(f, a);
    return mk_app(f, a);
  };
  return build(std::max(2, slots));
}

Trace random_trace(const Tp& t, Calc c, int max_len, std::mt19937_64& rng) {
  Trace tr;
  tr.calc = c;
  tr.strategy = "random-lift";
  MultiDist cur = md_singleton(t);
  tr.steps.push_back({cur, {}, {}});
  for (int k = 0; k < max_len; ++k) {
    std::vector<LiftChoice> cs(cur.entries.size());
    bool any = false, possible = false;
    for (size_t i = 0; i < cur.entries.size(); ++i) {
      auto rs = redexes(cur.entries[i].second, c);
      if (rs.empty()) continue;
      possible = true;
      if (rng() % 4 == 0) continue;  // keep
      cs[i].reduce = true;
      cs[i].r = rs[rng() % rs.size()];
      any = true;
    }
    if (!possible) break;
    if (!any) {
      for (size_t i = 0; i < cur.entries.size(); ++i) {
        auto rs = redexes(cur.entries[i].second, c);
        if (!rs.empty()) {
          cs[i].reduce = true;
          cs[i].r = rs[rng() % rs.size()];
          break;
        }
      }
    }
    cur = lift_step(cur, cs, c);
    tr.steps.push_back({cur, cs, {}});
  }
  return tr;
}

}  // namespace

SuiteSummary run_standardize_suite(const SuiteOptions& o, int traces, int max_len) {
  Collector col{o, {}, {}};
  int slots = std::max(2, o.size / 3);
  parallel_for(traces, o.jobs, [&](long i) {
    std::mt19937_64 rng(o.seed + (std::uint64_t)i);
    CheckReport rep;
    rep.check = "standardize";
    rep.calc = o.calc;
    try {
      Tp t = trace_seed(o.calc, slots, rng);
      for (int tries = 0; tries < 100 && !has_redex(t, o.calc); ++tries)
        t = trace_seed(o.calc, slots, rng);
      rep.term = print_term(t);
      Trace tr = random_trace(t, o.calc, max_len, rng);
      StdWitness w = check_standardization_witness(tr, o.budget);
      SnStatus sn = term_sn_status(t, o.calc, std::min<long>(o.budget, 5000));
      const char* sn_str =
          sn == SnStatus::SN ? "sn" : (sn == SnStatus::NotSN ? "non-sn" : "sn-unknown");
      if (w.found) {
        rep.verdict = "pass";
        rep.detail = std::string(sn_str) + "; surface prefix " +
                     std::to_string(w.surface_steps) + " steps, " + std::to_string(w.nodes) +
                     " nodes";
      } else if (w.budget_exhausted && sn == SnStatus::SN) {
        // finite reduction graph, so the search space is finite too: treat an
        // exhausted budget here as a real failure, not an unknown
        rep.verdict = "fail";
        rep.detail = std::string("witness search exhausted budget on a strongly ") +
                     "normalizing instance; trace end " + md_to_string(tr.steps.back().md);
      } else {
        rep.verdict = w.budget_exhausted ? "budget-exhausted" : "fail";
        rep.detail = std::string(sn_str) + "; trace end " + md_to_string(tr.steps.back().md);
      }
    } catch (const std::exception& e) {
      rep.verdict = "fail";
      rep.detail = std::string("exception: ") + e.what();
    }
    col.add(rep);
  });
  return col.sum;
}

SuiteSummary run_postpone_suite(const SuiteOptions& o) {
  if (o.calc != Calc::Cbv) throw CalcError("postponement checks run on cbv");
  return run_term_suite(
      o, [&](const Tp& t, CheckReport* rep) { return check_postponement(t, o.budget, rep); });
}

SuiteSummary run_simulate_suite(const SuiteOptions& o, TrVariant v) {
  SuiteOptions o2 = o;
  o2.calc = tr_source_calc(v);
  return run_term_suite(o2, [&](const Tp& t, CheckReport* rep) {
    base_report(rep, "simulate", o2.calc, t);
    SimReport sr = check_simulation(t, v, 0);
    if (!sr.pass && rep) {
      rep->verdict = "fail";
      rep->detail = tr_name(v) + std::string(": ") +
                    (sr.failures.empty() ? "mismatch" : sr.failures.front());
    }
    return sr.pass;
  });
}

// ---------- regressions ----------

namespace {

const char* kPreludeText =
    "T = \\x. \\y. x\n"
    "F = \\x. \\y. y\n"
    "I = \\x. x\n"
    "D = \\x. x x\n"
    "w3 = \\x. x x x\n"
    "XOR = \\a. \\b. a (b F T) b\n";

struct Reg {
  Collector& col;
  Prelude prelude;

  explicit Reg(Collector& c) : col(c), prelude(load_prelude_text(kPreludeText)) {}

  Tp term(const std::string& s, Calc c) { return parse_with_prelude(s, c, prelude); }

  void report(const std::string& name, Calc c, const std::string& term_str, bool ok,
              const std::string& detail) {
    CheckReport r;
    r.check = "regression";
    r.calc = c;
    r.term = term_str.empty() ? name : term_str;
    r.verdict = ok ? "pass" : "fail";
    r.detail = name + (detail.empty() ? "" : ": " + detail);
    col.add(r);
  }

  LimitResult eval(const std::string& s, Calc c, const char* strat, const char* obs, int fuel,
                   const Rat& eps) {
    MultiDist m = md_singleton(term(s, c));
    return evaluate_limit(m, make_strategy(strat, c), make_obs(obs, c), fuel, eps);
  }

  static Rat total_class_mass(const LimitResult& r) {
    Rat s = 0;
    for (auto& c : r.classes) s += c.mass;
    return s;
  }

  static Rat mass_of(const LimitResult& r, const std::string& key) {
    for (auto& c : r.classes)
      if (c.key == key) return c.mass;
    return Rat(0);
  }

  void run() {
    // geometric convergence: [1 PP] gains mass 1 - 2^-n on the class of T at
    // step 2n and keeps it at step 2n+1
    {
      std::string pp = "(\\x. x x (+) T) (\\x. x x (+) T)";
      std::string key = "nf:" + canon(term("T", Calc::Cbv));
      bool ok = true;
      std::string detail;
      for (int n : {1, 3, 5}) {
        Rat want = Rat(1) - pow2_inv((unsigned)n);
        auto r_even = eval(pp, Calc::Cbv, "full-surface", "values-upto-beta", 2 * n, Rat(0));
        auto r_odd = eval(pp, Calc::Cbv, "full-surface", "values-upto-beta", 2 * n + 1, Rat(0));
        if (mass_of(r_even, key) != want || mass_of(r_odd, key) != want) {
          ok = false;
          detail = "n=" + std::to_string(n) + " got " + rat_str(mass_of(r_even, key)) + " / " +
                   rat_str(mass_of(r_odd, key)) + ", want " + rat_str(want);
          break;
        }
      }
      report("pp-geometric", Calc::Cbv, pp, ok, detail);
    }
    // fair coin: both boolean classes reach 1/2 - 2^-10 by fuel 50
    {
      std::string qq = "(\\x. x x (+) (T (+) F)) (\\x. x x (+) (T (+) F))";
      auto r = eval(qq, Calc::Cbv, "full-surface", "values-upto-beta", 50, pow2_inv(20));
      Rat bound = Rat(1, 2) - pow2_inv(10);
      std::string kt = "nf:" + canon(term("T", Calc::Cbv));
      std::string kf = "nf:" + canon(term("F", Calc::Cbv));
      bool ok = mass_of(r, kt) >= bound && mass_of(r, kf) >= bound;
      report("qq-fair-coin", Calc::Cbv, qq, ok,
             ok ? "" : "T=" + rat_str(mass_of(r, kt)) + " F=" + rat_str(mass_of(r, kf)));
    }
    // half-valuable: mass 1/2 on T, residual stuck at 1/2 (divergent branch)
    {
      std::string nn = "(\\x. x x (+) (T (+) D D)) (\\x. x x (+) (T (+) D D))";
      auto r = eval(nn, Calc::Cbv, "full-surface", "values-upto-beta", 50, pow2_inv(20));
      Rat tol = pow2_inv(10);
      std::string kt = "nf:" + canon(term("T", Calc::Cbv));
      Rat dr = r.residual - Rat(1, 2);
      bool ok = mass_of(r, kt) >= Rat(1, 2) - tol && (dr <= tol && -dr <= tol) && !r.converged;
      report("nn-half-valuable", Calc::Cbv, nn, ok,
             ok ? "" : "T=" + rat_str(mass_of(r, kt)) + " residual=" + rat_str(r.residual));
    }
    // duplicated choice resolves before copying: XOR z z over a fair coin is
    // deterministically false
    {
      std::string ex = "(\\z. XOR z z) (T (+) F)";
      std::string kf = "nf:" + canon(term("F", Calc::Cbv));
      bool ok = true;
      std::string detail;
      for (const char* strat : {"full-surface", "full-left", "full-any"}) {
        auto r = eval(ex, Calc::Cbv, strat, "values-upto-beta", 200, Rat(0));
        if (!(r.converged && mass_of(r, kf) == Rat(1) && r.residual == Rat(0))) {
          ok = false;
          detail = std::string(strat) + ": F=" + rat_str(mass_of(r, kf)) + " residual=" +
                   rat_str(r.residual);
          break;
        }
      }
      report("xor-self-application", Calc::Cbv, ex, ok, detail);
    }
    // cbn reaches a head normal form without touching the divergent argument
    {
      std::string s = "(\\x. y) (D D)";
      auto r = eval(s, Calc::Cbn, "full-head", "hnf", 10, Rat(0));
      bool ok = r.converged && r.steps == 1 && total_class_mass(r) == Rat(1);
      report("cbn-discards-divergent-argument", Calc::Cbn, s, ok,
             ok ? "" : "steps=" + std::to_string(r.steps));
      // cbv keeps evaluating the argument forever
      auto rv = eval(s, Calc::Cbv, "full-left", "values", 50, pow2_inv(20));
      bool okv = !rv.converged && total_class_mass(rv) == Rat(0);
      report("cbv-keeps-divergent-argument", Calc::Cbv, s, okv,
             okv ? "" : "mass=" + rat_str(total_class_mass(rv)));
    }
    // left-first reduction misses probabilistic targets (both calculi)
    for (Calc c : {Calc::Cbv, Calc::Cbn}) {
      CheckReport r;
      bool ok = check_left_standardization_fails(c, &r);
      (void)ok;
      col.add(r);
    }
    // bang: surface and deep steps of (\!x. !x) !(I I)
    {
      Tp t = term("(\\!x. !x) !(I I)", Calc::Bang);
      auto rs = redexes(t, Calc::Bang);
      bool ok = rs.size() == 2 && rs[0].kind == RK::BetaBang && rs[0].surface &&
                rs[0].path.empty() && rs[1].kind == RK::BetaLin && rs[1].deep;
      std::string detail;
      if (ok) {
        MultiDist after = apply_redex(t, rs[0], Calc::Bang);
        ok = md_eq(after, md_singleton(term("!(I I)", Calc::Bang)));
        if (!ok) detail = "beta_bang result " + md_to_string(after);
      } else {
        detail = "redex table mismatch";
      }
      report("bang-surface-vs-deep", Calc::Bang, print_term(t), ok, detail);
    }
  }
};

}  // namespace

SuiteSummary run_regression_suite(const SuiteOptions& o) {
  Collector col{o, {}, {}};
  Reg reg(col);
  reg.run();
  return col.sum;
}

}  // namespace lop
