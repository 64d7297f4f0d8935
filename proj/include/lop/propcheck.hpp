#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lop/asymptotics.hpp"
#include "lop/calculus.hpp"
#include "lop/multidist.hpp"
#include "lop/term.hpp"
#include "lop/translate.hpp"

namespace lop {

// ---------- term generation ----------

struct TermGen {
  Calc calc = Calc::Cbv;
  int max_size = 7;      // AST node bound, inclusive
  int var_pool = 2;      // free variable names x, y, ...
  bool closed_only = false;
  bool affine_only = true;  // bang only: restrict to the affine fragment
};

// Deterministic, alpha-distinct enumeration of every term up to max_size.
std::vector<Tp> gen_exhaustive(const TermGen& g);

// Seeded random term / multidistribution (1 or 2 entries, closed option).
Tp gen_random_term(const TermGen& g, std::mt19937_64& rng);
MultiDist gen_random_md(const TermGen& g, std::mt19937_64& rng);

// ---------- reachability and joinability ----------

// Single-entry successors of m: entry i reduced at redex r (optionally
// filtered), other entries untouched. This generates exactly the one-lifted-
// step relation restricted to single reductions, whose closure is =>*.
enum class RedexClass { Any, BetaOnly, OplusOnly, SurfaceOnly, DeepOnly };

bool redex_in_class(const Redex& r, RedexClass rc);

std::vector<MultiDist> md_successors(const MultiDist& m, Calc c, RedexClass rc = RedexClass::Any);

// Bidirectional breadth-first joinability over =>*. budget bounds the total
// number of distinct multidistributions explored. frontier_exhausted means the
// full reachable sets were seen, so a "no" is definitive.
struct JoinResult {
  bool joined = false;
  bool frontier_exhausted = false;
  long nodes = 0;
  std::string meet_key;  // md_key of the common reduct when joined
};

JoinResult joinable(const MultiDist& a, const MultiDist& b, Calc c, long budget,
                    RedexClass rc = RedexClass::Any);

// Same search, but states are keyed by associated distribution: joinability
// modulo merging duplicates. Diagnostic companion for the strict check.
JoinResult joinable_merged(const MultiDist& a, const MultiDist& b, Calc c, long budget);

// ---------- reports ----------

// One json-lines record per outcome, e.g.
//   {"check":"commute","calculus":"bang","term":"...","verdict":"fail","detail":"..."}
struct CheckReport {
  std::string check;
  Calc calc = Calc::Cbv;
  std::string term;
  std::string verdict;  // "pass" | "fail" | "budget-exhausted"
  std::string detail;
  std::vector<std::string> witness;
};

std::string report_to_json_line(const CheckReport& r);

using ReportSink = std::function<void(const CheckReport&)>;

// ---------- single-instance checks ----------

// Diamond of the full oplus step: for every pair of one-lifted oplus steps
// m => a, m => b (enumerated over all Keep/Reduce combinations), a and b rejoin
// in at most one further lifted oplus step each.
bool check_diamond_oplus(const Tp& t, Calc c, CheckReport* rep = nullptr);

// Pointwise commutation: for every beta redex and every oplus redex of t with
// results n and s, there is r with n =>oplus r and s =>beta r, each in at most
// one lifted step. (Fails for bang erasing/under-choice substitutions; the
// report then carries the witness.)
bool check_commute_pointwise(const Tp& t, Calc c, CheckReport* rep = nullptr);

// Joinability of every one-step divergence from [1 t] within budget.
bool check_confluence_from(const Tp& t, Calc c, long budget, CheckReport* rep = nullptr);

// ---------- standardization ----------

// Searches for r with trace.front() =>surface* r =>deep* trace.back().
// budget bounds explored nodes across both phases.
struct StdWitness {
  bool found = false;
  bool budget_exhausted = false;
  int surface_steps = 0;
  long nodes = 0;
};

StdWitness standardization_witness(const MultiDist& from, const MultiDist& to, Calc c,
                                   long budget);
StdWitness check_standardization_witness(const Trace& tr, long budget);

// The two counterexamples showing left-first / head-first strategies are not
// standard: after the left(cbv)/head(cbn) first step the documented target
// multidistribution is unreachable (checked by exhausting the closure).
bool check_left_standardization_fails(Calc c, CheckReport* rep = nullptr);

// ---------- parallel beta-v reduction (cbv) ----------

// One-step parallel beta-v reduction: simultaneously fires any set of nested/
// disjoint beta-v redexes (never oplus, so results are single terms). The
// relation is reflexive; values parallel-reduce to values (asserted).
std::vector<Tp> par_successors(const Tp& t);
// The deep restriction: no beta at the root of any application spine position;
// lambda bodies and choice branches use full parallel reduction, application
// components stay deep.
std::vector<Tp> deep_par_successors(const Tp& t);

bool par_reduces(const Tp& a, const Tp& b);
bool deep_par_reduces(const Tp& a, const Tp& b);

// Postponement: for every deep-parallel reduct M' of M and every surface step
// M' -> n, there is s with [M] =>surface* s and s deep-parallel-lifts to n.
bool check_postponement(const Tp& t, long budget, CheckReport* rep = nullptr);

// ---------- suite drivers ----------

struct SuiteOptions {
  Calc calc = Calc::Cbv;
  int size = 7;
  int var_pool = 2;
  std::uint64_t seed = 0;
  long budget = 20000;
  int jobs = 1;
  long max_failures = 25;  // reports kept / printed
  ReportSink sink;         // optional, called under a lock
};

struct SuiteSummary {
  long checked = 0;
  long passed = 0;
  long failed = 0;
  long budget_exhausted = 0;
  std::vector<CheckReport> failures;  // capped at max_failures
};

SuiteSummary run_confluence_suite(const SuiteOptions& o);
SuiteSummary run_diamond_suite(const SuiteOptions& o);
SuiteSummary run_commute_suite(const SuiteOptions& o);
// traces: count random Keep/Reduce traces of length <= max_len from seeded terms.
SuiteSummary run_standardize_suite(const SuiteOptions& o, int traces, int max_len);
SuiteSummary run_postpone_suite(const SuiteOptions& o);
SuiteSummary run_simulate_suite(const SuiteOptions& o, TrVariant v);
// The fixed regression fixtures (worked examples with exact expected outputs).
SuiteSummary run_regression_suite(const SuiteOptions& o);

// Map over an index range with a small worker pool; order of sink calls is
// unspecified, results are reduced associatively.
void parallel_for(long n, int jobs, const std::function<void(long)>& fn);

}  // namespace lop
