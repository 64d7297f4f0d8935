#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lop/calculus.hpp"
#include "lop/multidist.hpp"

namespace lop {

// ---------- strategies ----------

// full-surface : every entry reduces one surface redex (pick policy below)
// full-left    : cbv, every entry reduces its unique left redex
// full-head    : cbn, every entry reduces its unique head redex
// full-any     : every entry reduces its leftmost redex of any kind
// leftmost-any : only the first entry that has a redex reduces (single lifted step)
// random(seed) : every entry reduces a uniformly chosen redex, deterministic in seed
enum class StratName { FullSurface, FullLeft, FullHead, FullAny, LeftmostAny, Random };

// Which surface redex full-surface picks. The stepwise-equivalence theorems
// quantify over all full surface sequences, so the checks exercise non-default
// picks; the CLI always uses Leftmost.
enum class SurfacePick { Leftmost, Rightmost, RandomPick };

struct Strategy {
  StratName name = StratName::FullSurface;
  Calc calc = Calc::Cbv;
  std::uint64_t seed = 0;
  SurfacePick surface_pick = SurfacePick::Leftmost;
};

// Parses "full-surface" | "full-left" | "full-head" | "full-any" |
// "leftmost-any" | "random(seed)"; validates the calculus fit (full-left is
// cbv-only, full-head cbn-only).
Strategy make_strategy(const std::string& name, Calc c);
std::string strategy_desc(const Strategy& s);

// Stateful so random strategies stay deterministic across a run.
struct StrategyRunner {
  Strategy strat;
  std::mt19937_64 rng;
  explicit StrategyRunner(const Strategy& s) : strat(s), rng(s.seed) {}
  FullStepResult step(const MultiDist& m);
  bool entry_is_normal(const Tp& t) const;  // no redex of the strategy's class
  bool all_normal(const MultiDist& m) const;
};

// ---------- observation sets ----------

// A family of pairwise-disjoint observable classes. The *-upto-beta families
// quotient by beta convertibility (approximated by bounded normalization /
// joinability, see Classifier); the others are syntactic.
enum class ObsId {
  Values,                 // cbv:  one class, all values
  ValuesUpToBeta,         // cbv:  values modulo beta-v
  NormalForms,            // any:  one class, ->-normal terms
  NormalFormSingletons,   // any:  one class per normal form (up to alpha)
  SurfaceNfBang,          // bang: one class, surface-normal terms
  SurfaceNfBangUpToBeta,  // bang: surface-normal modulo beta
  Hnf,                    // cbn:  one class, head-normal terms
  HnfUpToBeta,            // cbn:  head-normal modulo beta
  CbnNfSingletons,        // cbn:  one class per normal form
};

const char* obs_name(ObsId id);
ObsId obs_from_name(const std::string& s);

struct ObsSet {
  ObsId id = ObsId::Values;
  Calc calc = Calc::Cbv;
  int join_fuel = 200;  // reduction-graph node budget for the upto-beta families
};

// Throws CalcError when the family does not exist in the calculus.
ObsSet make_obs(const std::string& name, Calc c, int join_fuel = 200);

// Maps member terms to class keys. Stateful: the upto-beta families build
// their class registry lazily; keys are deterministic because evaluate_limit
// feeds terms in canonical order. Keys:
//   syntactic one-class families: the family name
//   singleton families:           "term:<canon>"
//   resolved upto-beta classes:   "nf:<canon of the beta-normal form>"
//   unresolved classes:           "rep:<canon of first representative>"
class Classifier {
 public:
  explicit Classifier(const ObsSet& obs) : obs_(obs) {}

  // nullopt when t is not in the observed set.
  std::optional<std::string> classify(const Tp& t);
  bool member(const Tp& t) const;

  const Tp* repr_of(const std::string& key) const;
  // True if the class key came from a found beta-normal form.
  bool resolved(const std::string& key) const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  const ObsSet& obs() const { return obs_; }

 private:
  struct UnresolvedClass {
    std::string key;
    Tp repr;
  };
  ObsSet obs_;
  std::map<std::string, std::string> cache_;  // canon -> class key
  std::map<std::string, Tp> reprs_;           // class key -> representative
  std::vector<UnresolvedClass> unresolved_;   // creation order
  std::vector<std::string> warnings_;

  std::string class_of_member(const Tp& t);
};

// Restriction of the associated distribution to the observed classes.
// residual = mass not yet classified.
struct ClassDist {
  std::map<std::string, Rat> mass;
  Rat residual = 0;
};

ClassDist class_distribution(const MultiDist& m, Classifier& cl);

// ---------- evaluation ----------

struct StepRecord {
  MultiDist md;
  std::vector<LiftChoice> choices;  // choices that produced this md (empty at step 0)
  ClassDist dist;
};

struct Trace {
  Calc calc = Calc::Cbv;
  std::string strategy;
  std::string obs;
  std::vector<StepRecord> steps;
};

struct ClassInfo {
  std::string key;
  Tp repr;
  Rat mass = 0;
  bool resolved = true;
};

struct LimitResult {
  std::vector<ClassInfo> classes;  // sorted by key
  Rat residual = 0;
  int steps = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Iterates full steps of the strategy, accumulating class masses, and stops
// when residual <= epsilon, or every entry is strategy-normal (both report
// converged), or after max_steps (converged = residual <= epsilon). Class
// masses are monotone for surface-class strategies; violations under other
// strategies are reported as warnings (classifier granularity artifact).
LimitResult evaluate_limit(const MultiDist& m, const Strategy& strat, const ObsSet& obs,
                           int max_steps, const Rat& epsilon, Trace* trace_out = nullptr);

// Mass on values reached by the strategy within max_steps (cbv).
Rat valuable_mass(const MultiDist& m, const Strategy& strat, int max_steps);

// ---------- comparison ----------

// Compares per-class masses over the key union; a difference counts as
// genuine only when it exceeds residual_a + residual_b.
enum class CmpVerdict { EqualWithin, ABelowB, BBelowA, Incomparable };

const char* cmp_verdict_name(CmpVerdict v);

struct CmpDelta {
  std::string key;
  Rat a = 0, b = 0;
  bool genuine = false;
};

struct CmpResult {
  CmpVerdict verdict = CmpVerdict::EqualWithin;
  std::vector<CmpDelta> deltas;
};

CmpResult compare_limits(const LimitResult& a, const LimitResult& b);

// ---------- JSON ----------

nlohmann::json limit_to_json(const LimitResult& r);
nlohmann::json trace_to_json(const Trace& t);
// Validates that each recorded step follows from the previous one by the
// recorded choices; used by tests and by `lop step --trace` consumers.
void replay_trace_json(const nlohmann::json& j, Calc c);

}  // namespace lop
