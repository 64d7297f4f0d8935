#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "lop/asymptotics.hpp"
#include "lop/calculus.hpp"
#include "lop/multidist.hpp"
#include "lop/parser.hpp"
#include "lop/propcheck.hpp"
#include "lop/translate.hpp"

using namespace lop;

namespace {

struct InputArgs {
  std::string expr;     // -e
  std::string file;     // positional
  std::string prelude;  // --prelude / LOP_PRELUDE
};

void add_input_flags(CLI::App* cmd, InputArgs& in) {
  auto* e = cmd->add_option("-e,--expr", in.expr, "term given inline");
  cmd->add_option("file", in.file, "file containing the term")->excludes(e);
  cmd->add_option("--prelude", in.prelude, "prelude definitions file")->envname("LOP_PRELUDE");
}

std::string read_input_text(const InputArgs& in) {
  if (!in.expr.empty()) return in.expr;
  if (in.file.empty()) throw LopError("no input term: use -e or a file argument");
  std::ifstream f(in.file);
  if (!f) throw LopError("cannot open " + in.file);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Tp parse_input(const InputArgs& in, Calc c) {
  std::string text = read_input_text(in);
  if (in.prelude.empty()) return parse(text, c);
  return parse_with_prelude(text, c, load_prelude_file(in.prelude));
}

std::string flag_list(const Redex& r, Calc c) {
  std::string s = r.surface ? "surface" : "deep";
  if (c == Calc::Cbv) s += r.left ? ", left" : ", internal";
  if (c == Calc::Cbn) s += r.head ? ", head" : ", internal";
  return s;
}

// ---------- eval ----------

struct EvalArgs {
  std::string calc = "cbv";
  std::string strategy = "full-surface";
  std::string obs;
  int max_steps = 10000;
  std::string epsilon = "1/1048576";  // 2^-20
  bool json = false;
  InputArgs in;
};

int run_eval(const EvalArgs& a) {
  Calc c = calc_from_name(a.calc);
  std::string obs_id = a.obs;
  if (obs_id.empty())
    obs_id = c == Calc::Cbv ? "values-upto-beta"
                            : (c == Calc::Cbn ? "hnf-upto-beta" : "surface-nf-bang-upto-beta");
  Strategy strat = make_strategy(a.strategy, c);
  ObsSet obs = make_obs(obs_id, c);
  Rat eps = parse_rat(a.epsilon);
  Tp t = parse_input(a.in, c);
  LimitResult r = evaluate_limit(md_singleton(t), strat, obs, a.max_steps, eps);
  if (a.json) {
    nlohmann::json j = limit_to_json(r);
    j["term"] = print_term(t);
    j["strategy"] = strategy_desc(strat);
    j["obs"] = obs_id;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "term:      " << print_term(t) << "\n";
    std::cout << "strategy:  " << strategy_desc(strat) << "  obs: " << obs_id << "\n";
    std::cout << "steps:     " << r.steps << (r.converged ? "  (converged)" : "  (fuel exhausted)")
              << "\n";
    std::cout << "residual:  " << rat_str(r.residual) << "\n";
    for (auto& ci : r.classes) {
      std::cout << "  " << rat_str(ci.mass) << "  " << ci.key;
      if (ci.repr) std::cout << "  [" << print_term(ci.repr) << "]";
      std::cout << (ci.resolved ? "" : "  (unresolved)") << "\n";
    }
    for (auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  }
  return r.converged ? 0 : 2;
}

// ---------- step ----------

struct StepArgs {
  std::string calc = "cbv";
  bool show_redexes = false;
  int pick = -1;
  std::string trace_path;
  InputArgs in;
};

Trace trace_from_json(const nlohmann::json& j) {
  Trace tr;
  tr.calc = calc_from_name(j.at("calculus").get<std::string>());
  tr.strategy = j.value("strategy", "");
  tr.obs = j.value("obs", "");
  for (auto& sj : j.at("steps")) {
    StepRecord rec;
    rec.md = md_from_json(sj.at("md"), tr.calc);
    for (auto& cj : sj.at("choices")) {
      LiftChoice lc;
      if (cj.at("action") == "reduce") {
        lc.reduce = true;
        lc.r.path = path_from_string(cj.at("path").get<std::string>());
        lc.r.kind = rk_from_name(cj.at("kind").get<std::string>());
      }
      rec.choices.push_back(lc);
    }
    tr.steps.push_back(std::move(rec));
  }
  if (tr.steps.empty()) throw LopError("trace has no steps");
  return tr;
}

int run_step(const StepArgs& a) {
  Calc c = calc_from_name(a.calc);

  std::optional<Trace> trace;
  MultiDist md;
  bool resumed = false;
  if (!a.trace_path.empty()) {
    std::ifstream f(a.trace_path);
    if (f) {
      nlohmann::json j;
      f >> j;
      trace = trace_from_json(j);
      if (trace->calc != c)
        throw LopError(std::string("trace calculus ") + calc_name(trace->calc) +
                       " does not match --calculus " + calc_name(c));
      md = trace->steps.back().md;
      resumed = true;
    }
  }
  if (!resumed) {
    md = md_singleton(parse_input(a.in, c));
    if (!a.trace_path.empty()) {
      trace = Trace{c, "manual", "", {}};
      trace->steps.push_back({md, {}, {}});
    }
  }

  std::cout << md_to_string(md) << "\n";

  // global redex index across entries
  std::vector<std::pair<size_t, Redex>> all;
  for (size_t i = 0; i < md.entries.size(); ++i)
    for (auto& r : redexes(md.entries[i].second, c)) all.emplace_back(i, r);

  if (all.empty()) {
    std::cout << "no redexes\n";
    return 0;
  }
  if (a.show_redexes || a.pick < 0) {
    for (size_t k = 0; k < all.size(); ++k) {
      auto& [i, r] = all[k];
      std::cout << "  #" << k << "  entry " << i << "  " << rk_name(r.kind) << " at '"
                << path_to_string(r.path) << "'  (" << flag_list(r, c) << ")\n";
    }
  }
  if (a.pick < 0) return 0;
  if ((size_t)a.pick >= all.size()) {
    std::cerr << "error: --pick " << a.pick << " out of range (have " << all.size()
              << " redexes)\n";
    return 1;
  }
  auto& [entry, redex] = all[(size_t)a.pick];
  std::vector<LiftChoice> choices(md.entries.size());
  choices[entry].reduce = true;
  choices[entry].r = redex;
  MultiDist next = lift_step(md, choices, c);
  std::cout << "-> " << md_to_string(next) << "\n";
  if (trace) {
    trace->steps.push_back({next, choices, {}});
    std::ofstream out(a.trace_path, std::ios::trunc);
    if (!out) throw LopError("cannot write " + a.trace_path);
    out << trace_to_json(*trace).dump(2) << "\n";
  }
  return 0;
}

// ---------- translate ----------

struct TranslateArgs {
  std::string from = "cbv";
  std::string variant;
  bool json = false;
  InputArgs in;
};

int run_translate(const TranslateArgs& a) {
  Calc src = calc_from_name(a.from);
  std::string vname = a.variant;
  if (vname.empty())
    vname = src == Calc::Cbv ? "cbv-surface" : (src == Calc::Bang ? "bang" : "cbn");
  TrVariant v = tr_from_name(vname);
  if (tr_source_calc(v) != src)
    throw LopError("variant " + vname + " translates from " +
                   calc_name(tr_source_calc(v)) + ", not " + calc_name(src));
  Tp t = parse_input(a.in, src);
  Tp img = translate(t, v);
  if (a.json) {
    std::cout << nlohmann::json{{"variant", vname},
                                {"source", print_term(t)},
                                {"image", print_term(img)},
                                {"target-calculus", calc_name(tr_target_calc(v))}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << print_term(img) << "\n";
  }
  return 0;
}

// ---------- check ----------

struct CheckArgs {
  std::string what;
  std::string calc = "cbv";
  int size = 7;
  std::uint64_t seed = 0;
  long budget = 20000;
  int jobs = 1;
  std::string report_path;
};

int run_check(const CheckArgs& a) {
  Calc c = calc_from_name(a.calc);
  std::ofstream report;
  if (!a.report_path.empty()) {
    report.open(a.report_path, std::ios::trunc);
    if (!report) throw LopError("cannot write " + a.report_path);
  }
  std::mutex out_mu;
  SuiteOptions o;
  o.calc = c;
  o.size = a.size;
  o.seed = a.seed;
  o.budget = a.budget;
  o.jobs = a.jobs;
  o.sink = [&](const CheckReport& r) {
    std::lock_guard<std::mutex> lk(out_mu);
    std::string line = report_to_json_line(r);
    if (report.is_open())
      report << line << "\n";
    else if (r.verdict != "pass")
      std::cout << line << "\n";
  };

  SuiteSummary s;
  if (a.what == "confluence") {
    s = run_confluence_suite(o);
  } else if (a.what == "diamond") {
    s = run_diamond_suite(o);
  } else if (a.what == "commute") {
    s = run_commute_suite(o);
  } else if (a.what == "standardize") {
    s = run_standardize_suite(o, 200, 6);
  } else if (a.what == "postpone") {
    o.calc = Calc::Cbv;
    s = run_postpone_suite(o);
  } else if (a.what == "simulate") {
    TrVariant v = c == Calc::Cbv ? TrVariant::CbvSurface
                                 : (c == Calc::Bang ? TrVariant::TrBang : TrVariant::TrCbn);
    s = run_simulate_suite(o, v);
  } else if (a.what == "regressions") {
    s = run_regression_suite(o);
  } else {
    throw LopError("unknown check: " + a.what);
  }

  std::cout << a.what << ": " << s.checked << " checked, " << s.passed << " passed, " << s.failed
            << " failed, " << s.budget_exhausted << " budget-exhausted\n";
  for (auto& f : s.failures)
    std::cout << "  " << f.verdict << " " << f.term << (f.detail.empty() ? "" : ": " + f.detail)
              << "\n";
  return s.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multidistribution rewriting for three probabilistic lambda calculi"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a term to its limit distribution");
  eval_cmd->add_option("--calculus", ev.calc)->check(CLI::IsMember({"cbv", "cbn", "bang"}));
  eval_cmd->add_option("--strategy", ev.strategy)
      ->check(CLI::IsMember({"full-surface", "full-left", "full-head", "full-any"}));
  eval_cmd->add_option("--obs", ev.obs, "observation classes (default per calculus)");
  eval_cmd->add_option("--max-steps", ev.max_steps);
  eval_cmd->add_option("--epsilon", ev.epsilon, "stop when residual <= this (rational)");
  eval_cmd->add_flag("--json", ev.json);
  add_input_flags(eval_cmd, ev.in);

  StepArgs st;
  auto* step_cmd = app.add_subcommand("step", "apply a single reduction step");
  step_cmd->add_option("--calculus", st.calc)->check(CLI::IsMember({"cbv", "cbn", "bang"}));
  step_cmd->add_flag("--show-redexes", st.show_redexes);
  step_cmd->add_option("--pick", st.pick, "redex index to reduce");
  step_cmd->add_option("--trace", st.trace_path, "trace file to create or resume");
  add_input_flags(step_cmd, st.in);

  TranslateArgs tr;
  auto* tr_cmd = app.add_subcommand("translate", "translate into the probability-free image");
  tr_cmd->add_option("--from", tr.from)->check(CLI::IsMember({"cbv", "cbn", "bang"}));
  tr_cmd->add_option("--variant", tr.variant)
      ->check(CLI::IsMember({"cbv-simple", "cbv-surface", "bang", "cbn"}));
  tr_cmd->add_flag("--json", tr.json);
  add_input_flags(tr_cmd, tr.in);

  CheckArgs ck;
  auto* ck_cmd = app.add_subcommand("check", "run a property suite");
  ck_cmd
      ->add_option("what", ck.what, "which suite")
      ->required()
      ->check(CLI::IsMember({"confluence", "diamond", "commute", "standardize", "postpone",
                             "simulate", "regressions"}));
  ck_cmd->add_option("--calculus", ck.calc)->check(CLI::IsMember({"cbv", "cbn", "bang"}));
  ck_cmd->add_option("--size", ck.size);
  ck_cmd->add_option("--seed", ck.seed);
  ck_cmd->add_option("--budget", ck.budget);
  ck_cmd->add_option("--jobs", ck.jobs);
  ck_cmd->add_option("--report", ck.report_path, "write JSON-lines reports here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed()) return run_eval(ev);
    if (step_cmd->parsed()) return run_step(st);
    if (tr_cmd->parsed()) return run_translate(tr);
    if (ck_cmd->parsed()) return run_check(ck);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
