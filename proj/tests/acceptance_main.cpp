// Acceptance gate. Each product claim gets one labeled [PASS]/[FAIL] line;
// the exit code is the number of failed criteria. The oracles are strict
// multiset-level checks on purpose: the two known-red bang lines (criteria 4
// and 5) are genuine failures of the pointwise commutation property in that
// calculus, not test bugs. See README for the analysis.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lop/asymptotics.hpp"
#include "lop/calculus.hpp"
#include "lop/multidist.hpp"
#include "lop/parser.hpp"
#include "lop/propcheck.hpp"
#include "lop/term.hpp"
#include "lop/translate.hpp"

using namespace lop;

namespace {

int g_failed = 0;

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt_secs(double s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(s < 10 ? 2 : 1);
  os << s << " s";
  return os.str();
}

void criterion(int n, const std::string& title, const std::function<Outcome()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (o.ok ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << title << "  ["
            << fmt_secs(secs) << "]\n";
  if (!o.detail.empty()) std::cout << "       " << o.detail << "\n";
  std::cout.flush();
  if (!o.ok) ++g_failed;
}

// ---------- fixtures ----------

std::string env_or(const char* key, const std::string& dflt) {
  const char* v = std::getenv(key);
  return v ? std::string(v) : dflt;
}

std::string prelude_path() { return env_or("LOP_PRELUDE_FILE", "docs/prelude.lop"); }

const Prelude& prelude() {
  static Prelude p = load_prelude_file(prelude_path());
  return p;
}

Tp PT(const std::string& s) { return parse_with_prelude(s, Calc::Cbv, prelude()); }

const char* kPP = "(\\x. x x (+) T) (\\x. x x (+) T)";
const char* kQQ = "(\\x. x x (+) (T (+) F)) (\\x. x x (+) (T (+) F))";
const char* kNN = "(\\x. x x (+) (T (+) D D)) (\\x. x x (+) (T (+) D D))";

struct CliOut {
  int code = -1;
  std::string out;
};

CliOut run_cli(const std::string& args) {
  std::string cmd = env_or("LOP_BIN", "./build/lop") + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  CliOut r;
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string counts(const SuiteSummary& s) {
  std::string out = std::to_string(s.checked) + " checked, " + std::to_string(s.failed) + " failed";
  if (s.budget_exhausted) out += ", " + std::to_string(s.budget_exhausted) + " budget-exhausted";
  return out;
}

// ---------- criteria 1-3: limit evaluation fixtures ----------

Outcome crit_geometric() {
  Outcome o;
  Tp pp = PT(kPP);
  std::string want_key = "nf:" + canon(PT("T"));
  Strategy strat = make_strategy("full-surface", Calc::Cbv);
  ObsSet obs = make_obs("values-upto-beta", Calc::Cbv);
  auto t0 = std::chrono::steady_clock::now();
  for (int n = 1; n <= 10; ++n) {
    LimitResult r = evaluate_limit(md_singleton(pp), strat, obs, 2 * n + 1, Rat(0));
    Rat want = Rat(1) - pow2_inv((unsigned)n);
    if (r.steps != 2 * n + 1 || r.classes.size() != 1 || r.classes[0].key != want_key ||
        r.classes[0].mass != want) {
      o.ok = false;
      o.detail = "n=" + std::to_string(n) + ": got " +
                 (r.classes.empty() ? std::string("no classes") : rat_str(r.classes[0].mass)) +
                 " after " + std::to_string(r.steps) + " steps, wanted " + rat_str(want);
      return o;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 1.0) {
    o.ok = false;
    o.detail = "exact masses correct but took " + fmt_secs(secs) + " (budget 1 s)";
    return o;
  }

  // cross-check the reported fields through the CLI
  CliOut r = run_cli(
      "eval --calculus cbv --strategy full-surface --obs values-upto-beta "
      "--max-steps 21 --epsilon 0 --json --prelude " +
      prelude_path() + " -e '" + kPP + "'");
  bool cli_ok = false;
  std::string cli_why = "CLI run failed: " + r.out.substr(0, 120);
  if (r.code == 2) {
    auto j = nlohmann::json::parse(r.out, nullptr, false);
    if (!j.is_discarded() && j["converged"] == false && j["steps"] == 21 &&
        j["residual"] == "1/1024" && j["classes"].size() == 1 &&
        j["classes"][0]["mass"] == "1023/1024") {
      cli_ok = true;
    } else {
      cli_why = "CLI JSON fields mismatch: " + r.out.substr(0, 200);
    }
  }
  if (!cli_ok) {
    o.ok = false;
    o.detail = cli_why;
    return o;
  }
  o.detail = "exact for n = 1..10 in " + fmt_secs(secs) +
             "; CLI --max-steps 21 reports 1023/1024, residual 1/1024, exit 2";
  return o;
}

Outcome crit_fair_and_half() {
  Outcome o;
  Strategy strat = make_strategy("full-surface", Calc::Cbv);
  ObsSet obs = make_obs("values-upto-beta", Calc::Cbv);
  Rat half(1, 2), tol = pow2_inv(10);
  std::string key_t = "nf:" + canon(PT("T")), key_f = "nf:" + canon(PT("F"));

  LimitResult q = evaluate_limit(md_singleton(PT(kQQ)), strat, obs, 50, Rat(0));
  Rat mt(-1), mf(-1);
  for (const auto& c : q.classes) {
    if (c.key == key_t) mt = c.mass;
    if (c.key == key_f) mf = c.mass;
  }
  if (q.classes.size() != 2 || mt < half - tol || mt > half || mf < half - tol || mf > half) {
    o.ok = false;
    o.detail = "fair recursion at fuel 50: T " + rat_str(mt) + ", F " + rat_str(mf) +
               ", wanted both in [1/2 - 2^-10, 1/2]";
    return o;
  }

  LimitResult nn = evaluate_limit(md_singleton(PT(kNN)), strat, obs, 50, Rat(0));
  bool nn_ok = nn.classes.size() == 1 && nn.classes[0].key == key_t &&
               nn.classes[0].mass >= half - tol && nn.classes[0].mass <= half &&
               nn.residual >= half - tol && nn.residual <= half + tol && !nn.converged;
  if (!nn_ok) {
    o.ok = false;
    o.detail = "half-diverging variant at fuel 50: T " +
               (nn.classes.empty() ? std::string("absent") : rat_str(nn.classes[0].mass)) +
               ", residual " + rat_str(nn.residual) + ", wanted both at 1/2 within 2^-10";
    return o;
  }
  o.detail = "fair: T = F = " + rat_str(mt) + "; half-valuable: T " + rat_str(nn.classes[0].mass) +
             " with residual " + rat_str(nn.residual) + " (never converges)";
  return o;
}

Outcome crit_xor_coin() {
  Outcome o;
  std::string key_f = "nf:" + canon(PT("F"));
  std::string got;
  for (const char* sname : {"full-surface", "full-left", "full-any"}) {
    LimitResult r = evaluate_limit(md_singleton(PT("(\\z. XOR z z) (T (+) F)")),
                                   make_strategy(sname, Calc::Cbv),
                                   make_obs("values-upto-beta", Calc::Cbv), 50, Rat(0));
    bool ok = r.converged && r.residual == 0 && r.classes.size() == 1 &&
              r.classes[0].key == key_f && r.classes[0].mass == 1;
    if (!ok) {
      o.ok = false;
      o.detail = std::string(sname) + ": expected exactly {class(F): 1}, got residual " +
                 rat_str(r.residual) + " over " + std::to_string(r.classes.size()) + " classes";
      return o;
    }
    got += std::string(got.empty() ? "" : ", ") + sname + " in " + std::to_string(r.steps) +
           " steps";
  }
  o.detail = "xor of one coin flip against itself is deterministically false: " + got;
  return o;
}

// ---------- criteria 4-5: exhaustive rewriting sweeps ----------

struct SweepLine {
  SuiteSummary sum;
  long merged_ok = 0;  // failures that rejoin once duplicate entries merge
};

SweepLine sweep(SuiteSummary (*suite)(const SuiteOptions&), Calc c, int size) {
  SweepLine out;
  SuiteOptions so;
  so.calc = c;
  so.size = size;
  so.max_failures = 3;
  long merged = 0;
  so.sink = [&merged](const CheckReport& r) {
    if (r.verdict == "fail" && r.detail.find("merging duplicates: yes") != std::string::npos)
      ++merged;
  };
  out.sum = suite(so);
  out.merged_ok = merged;
  return out;
}

std::string sweep_detail(const char* label, const SweepLine& s) {
  std::string out = std::string(label) + " " + counts(s.sum);
  if (s.sum.failed > 0)
    out += " (" + std::to_string(s.merged_ok) + "/" + std::to_string(s.sum.failed) +
           " rejoin after merging duplicate entries)";
  return out;
}

Outcome crit_confluence() {
  Outcome o;
  SweepLine cv = sweep(run_confluence_suite, Calc::Cbv, 9);
  SweepLine cn = sweep(run_confluence_suite, Calc::Cbn, 9);
  SweepLine bg = sweep(run_confluence_suite, Calc::Bang, 8);
  auto clean = [](const SweepLine& s) { return s.sum.failed == 0 && s.sum.budget_exhausted == 0; };
  o.ok = clean(cv) && clean(cn) && clean(bg);
  o.detail = sweep_detail("cbv<=9:", cv) + "; " + sweep_detail("cbn<=9:", cn) + "; " +
             sweep_detail("bang<=8:", bg);
  if (!o.ok && bg.sum.failed > 0 && bg.merged_ok == bg.sum.failed)
    o.detail +=
        ". every bang counterexample is a beta that can discard its argument along a "
        "probabilistic branch, fired against a choice inside that argument; all of them close "
        "at associated-distribution granularity";
  return o;
}

Outcome crit_diamond_commute() {
  Outcome o;
  SweepLine d_cv = sweep(run_diamond_suite, Calc::Cbv, 9);
  SweepLine d_cn = sweep(run_diamond_suite, Calc::Cbn, 9);
  SweepLine d_bg = sweep(run_diamond_suite, Calc::Bang, 8);
  SweepLine c_cv = sweep(run_commute_suite, Calc::Cbv, 9);
  SweepLine c_cn = sweep(run_commute_suite, Calc::Cbn, 9);
  SweepLine c_bg = sweep(run_commute_suite, Calc::Bang, 8);
  auto clean = [](const SweepLine& s) { return s.sum.failed == 0 && s.sum.budget_exhausted == 0; };
  o.ok = clean(d_cv) && clean(d_cn) && clean(d_bg) && clean(c_cv) && clean(c_cn) && clean(c_bg);
  o.detail = "diamond " + sweep_detail("cbv<=9:", d_cv) + "; " + sweep_detail("cbn<=9:", d_cn) +
             "; " + sweep_detail("bang<=8:", d_bg) + "\n       commute " +
             sweep_detail("cbv<=9:", c_cv) + "; " + sweep_detail("cbn<=9:", c_cn) + "; " +
             sweep_detail("bang<=8:", c_bg);
  return o;
}

// ---------- criterion 6: standardization witnesses on random traces ----------

Outcome crit_standardize() {
  Outcome o;
  std::string detail;
  for (Calc c : {Calc::Cbv, Calc::Bang, Calc::Cbn}) {
    SuiteOptions so;
    so.calc = c;
    so.size = 9;  // seed-combination slots, not a term bound
    so.seed = 20260815;
    SuiteSummary s = run_standardize_suite(so, 1000, 6);
    if (s.failed != 0) {
      o.ok = false;
      std::string first = s.failures.empty() ? "" : ": " + s.failures.front().term + " (" +
                                                        s.failures.front().detail + ")";
      o.detail = std::string(calc_name(c)) + " " + counts(s) + first;
      return o;
    }
    detail += std::string(detail.empty() ? "" : "; ") + calc_name(c) + " 1000 traces, 0 failed";
    if (s.budget_exhausted)
      detail += " (" + std::to_string(s.budget_exhausted) + " non-terminating seeds deferred)";
  }
  o.detail = detail;
  return o;
}

// ---------- criterion 7: left/head-first counterexamples ----------

Outcome crit_left_not_standard() {
  Outcome o;
  CheckReport a, b;
  bool cbv_ok = check_left_standardization_fails(Calc::Cbv, &a);
  bool cbn_ok = check_left_standardization_fails(Calc::Cbn, &b);
  o.ok = cbv_ok && cbn_ok;
  o.detail = "cbv " + a.verdict + " (" + a.term + "); cbn " + b.verdict + " (" + b.term + ")";
  return o;
}

// ---------- criterion 8: translation bisimulations ----------

Outcome crit_simulate() {
  Outcome o;
  std::string detail;
  for (TrVariant v : {TrVariant::CbvSimple, TrVariant::CbvSurface, TrVariant::TrBang,
                      TrVariant::TrCbn}) {
    SuiteOptions so;
    so.size = 7;
    SuiteSummary s = run_simulate_suite(so, v);
    if (s.failed != 0 || s.budget_exhausted != 0) {
      o.ok = false;
      o.detail = std::string(tr_name(v)) + ": " + counts(s) +
                 (s.failures.empty() ? "" : "; first: " + s.failures.front().detail);
      return o;
    }
    detail += std::string(detail.empty() ? "" : "; ") + tr_name(v) + " " +
              std::to_string(s.checked) + "/0 failed";
  }
  o.detail = detail + " (cbn->bang run includes the hnf/surface-nf correspondence per term)";
  return o;
}

// ---------- criterion 9: stepwise strategy equivalence ----------

// Runs both strategies from m0 and compares the classified distribution at
// every step index. A mismatch is retried with more classifier fuel first:
// the up-to-beta families are approximated by bounded normalization, and only
// a mismatch that survives on fully resolved classes is a real one.
std::string stepwise_mismatch(const MultiDist& m0, Calc c, const char* obs_name_, Strategy sa,
                              Strategy sb, int fuel) {
  std::string last;
  for (int join_fuel : {200, 2000, 20000}) {
    ObsSet obs = make_obs(obs_name_, c, join_fuel);
    Classifier cl(obs);
    StrategyRunner ra(sa), rb(sb);
    MultiDist a = m0, b = m0;
    std::string mismatch;
    for (int k = 0; k <= fuel; ++k) {
      ClassDist da = class_distribution(a, cl);
      ClassDist db = class_distribution(b, cl);
      if (da.mass != db.mass || da.residual != db.residual) {
        mismatch = "distributions differ at step " + std::to_string(k);
        break;
      }
      bool na = ra.all_normal(a), nb = rb.all_normal(b);
      if (na && nb) break;
      if (!na) a = ra.step(a).next;
      if (!nb) b = rb.step(b).next;
    }
    if (mismatch.empty()) return "";
    last = mismatch + " (classifier fuel " + std::to_string(join_fuel) + ")";
    if (cl.warnings().empty()) break;  // no unresolved classes, more fuel cannot help
  }
  return last;
}

Outcome crit_stepwise() {
  Outcome o;
  long checked = 0;
  auto side = [&](Calc c, const char* base, const char* obsname, std::uint64_t seed_base,
                  std::string& err) {
    TermGen g;
    g.calc = c;
    g.max_size = 9;
    g.closed_only = true;
    std::mt19937_64 rng(seed_base);
    Strategy unique_strat = make_strategy(base, c);
    for (int i = 0; i < 500; ++i) {
      MultiDist m = gen_random_md(g, rng);
      Strategy rightmost = make_strategy("full-surface", c);
      rightmost.surface_pick = SurfacePick::Rightmost;
      Strategy randpick = make_strategy("full-surface", c);
      randpick.surface_pick = SurfacePick::RandomPick;
      randpick.seed = seed_base + 1000 + (std::uint64_t)i;
      for (const Strategy& alt : {rightmost, randpick}) {
        std::string why = stepwise_mismatch(m, c, obsname, unique_strat, alt, 100);
        ++checked;
        if (!why.empty()) {
          err = std::string(calc_name(c)) + " " + base + " vs " + strategy_desc(alt) + " on " +
                md_to_string(m) + ": " + why;
          return false;
        }
      }
    }
    return true;
  };
  std::string err;
  if (!side(Calc::Cbv, "full-left", "values-upto-beta", 0xC0FFEE, err) ||
      !side(Calc::Cbn, "full-head", "hnf-upto-beta", 0xBEEF, err)) {
    o.ok = false;
    o.detail = err;
    return o;
  }
  o.detail = "500 cbv mds (full-left vs rightmost/random surface picks) and 500 cbn mds "
             "(full-head likewise): " +
             std::to_string(checked) + " paired runs classwise-equal at every step to fuel 100";
  return o;
}

// ---------- criterion 10: parallel reduction vs closure oracles ----------

// All terms reachable from t by singleton beta steps (optionally deep-only),
// keyed by canonical form. Size-7 graphs are tiny; the budget is a tripwire.
std::set<std::string> beta_closure(const Tp& t0, bool deep_only, long budget, bool* exhausted) {
  std::set<std::string> seen{canon(t0)};
  std::deque<Tp> q{t0};
  while (!q.empty()) {
    Tp t = q.front();
    q.pop_front();
    for (const Redex& r : cbv_redexes(t)) {
      if (r.kind != RK::BetaV) continue;
      if (deep_only && r.surface) continue;
      Tp u = apply_redex(t, r, Calc::Cbv).entries[0].second;
      if ((long)seen.size() >= budget) {
        *exhausted = true;
        return seen;
      }
      if (seen.insert(canon(u)).second) q.push_back(u);
    }
  }
  return seen;
}

Outcome crit_parallel() {
  Outcome o;
  TermGen g;
  g.calc = Calc::Cbv;
  g.max_size = 7;
  auto terms = gen_exhaustive(g);
  long beta_edges = 0, deep_edges = 0, par_pairs = 0, deep_pairs = 0;
  for (const Tp& t : terms) {
    for (const Redex& r : cbv_redexes(t)) {
      if (r.kind != RK::BetaV) continue;
      Tp u = apply_redex(t, r, Calc::Cbv).entries[0].second;
      ++beta_edges;
      if (!par_reduces(t, u)) {
        o.ok = false;
        o.detail = "single beta step missing from parallel reduction: " + print_term(t) +
                   " -> " + print_term(u);
        return o;
      }
      if (!r.surface) {
        ++deep_edges;
        if (!deep_par_reduces(t, u)) {
          o.ok = false;
          o.detail = "single deep beta step missing from deep parallel reduction: " +
                     print_term(t) + " -> " + print_term(u);
          return o;
        }
      }
    }
    bool exhausted = false;
    std::set<std::string> full = beta_closure(t, false, 100000, &exhausted);
    std::set<std::string> deep = beta_closure(t, true, 100000, &exhausted);
    if (exhausted) {
      o.ok = false;
      o.detail = "closure budget exhausted on " + print_term(t);
      return o;
    }
    for (const Tp& u : par_successors(t)) {
      ++par_pairs;
      if (!full.count(canon(u))) {
        o.ok = false;
        o.detail = "parallel step not in the beta closure: " + print_term(t) + " -> " +
                   print_term(u);
        return o;
      }
    }
    for (const Tp& u : deep_par_successors(t)) {
      ++deep_pairs;
      if (!deep.count(canon(u))) {
        o.ok = false;
        o.detail = "deep parallel step not in the deep beta closure: " + print_term(t) + " -> " +
                   print_term(u);
        return o;
      }
    }
  }

  SuiteOptions so;
  so.size = 7;
  SuiteSummary ps = run_postpone_suite(so);
  if (ps.failed != 0 || ps.budget_exhausted != 0) {
    o.ok = false;
    o.detail = "postponement: " + counts(ps) +
               (ps.failures.empty() ? "" : "; first: " + ps.failures.front().term);
    return o;
  }
  o.detail = std::to_string(terms.size()) + " terms: " + std::to_string(beta_edges) +
             " beta edges in parallel, " + std::to_string(deep_edges) +
             " deep edges in deep-parallel, " + std::to_string(par_pairs) + "/" +
             std::to_string(deep_pairs) + " parallel/deep-parallel pairs inside the closures; "
             "postponement " + counts(ps);
  return o;
}

}  // namespace

int main() {
  std::cout << "acceptance: multidistribution rewriting for three probabilistic lambda calculi\n";

  criterion(1, "recursive coin flip gains value mass exactly 1 - 2^-n by lifted step 2n+1",
            crit_geometric);
  criterion(2, "fair recursion converges to {T: 1/2, F: 1/2}; half-diverging variant is "
               "1/2-valuable with residual pinned at 1/2",
            crit_fair_and_half);
  criterion(3, "cbv evaluates (\\z. XOR z z) (T (+) F) to exactly {class(F): 1} under "
               "full-surface, full-left and full-any",
            crit_xor_coin);
  criterion(4, "every one-step divergence rejoins: cbv/cbn terms to size 9, affine bang terms "
               "to size 8",
            crit_confluence);
  criterion(5, "choice-step diamond and pointwise beta/choice commutation on the same universes",
            crit_diamond_commute);
  criterion(6, "1000 random traces per calculus (length <= 6) admit surface-then-deep "
               "reorderings within budget",
            crit_standardize);
  criterion(7, "left-first (cbv) and head-first (cbn) are not standard: documented targets "
               "become unreachable after the first left/head step",
            crit_left_not_standard);
  criterion(8, "all four translations are step bisimulations on exhaustive size-7 universes",
            crit_simulate);
  criterion(9, "strategy independence of the limit, stepwise: unique-redex strategies match "
               "adversarial full-surface picks classwise",
            crit_stepwise);
  criterion(10, "parallel and deep-parallel reduction match their singleton-step closure "
                "oracles at size <= 7; deep steps postpone",
            crit_parallel);

  if (g_failed == 0) {
    std::cout << "all 10 criteria passed\n";
  } else {
    std::cout << g_failed << " of 10 criteria failed; the oracles are strict multiset-level "
                             "checks and the failures are real properties of the bang calculus "
                             "(see README)\n";
  }
  return g_failed == 0 ? 0 : 1;
}
