#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lop/rational.hpp"
#include "lop/term.hpp"

namespace lop {

// A multidistribution: a finite multiset of probability-weighted terms with
// total mass <= 1. Duplicates are NOT merged: [1/2 a, 1/2 a] and [1 a] are
// different objects (the reduction relation distinguishes them).
struct MultiDist {
  std::vector<std::pair<Rat, Tp>> entries;
};

MultiDist md_singleton(const Tp& t);                 // [1 t]
MultiDist md_scale(const Rat& p, const MultiDist& m);
MultiDist md_sum(const MultiDist& a, const MultiDist& b);  // throws MassError if > 1
Rat md_mass(const MultiDist& m);

// Entry probabilities must each lie in (0,1] and total mass in (0,1]; zero
// entries are rejected. Terms must fit the calculus.
void validate_md(const MultiDist& m, Calc c);

// Canonical key: entries sorted by (canon(term), p). Equal keys iff the two
// multidistributions are equal as multisets up to alpha.
std::string md_key(const MultiDist& m);
bool md_eq(const MultiDist& a, const MultiDist& b);

std::string md_to_string(const MultiDist& m);        // "[1/2 x, 1/2 \y. y]"

// The associated distribution: merges alpha-equivalent terms, keyed by canon.
// repr keeps one representative term per key.
struct Dist {
  std::map<std::string, Rat> mass;
  std::map<std::string, Tp> repr;
};

Dist associated_distribution(const MultiDist& m);
std::string dist_key(const Dist& d);  // canonical, for joinability modulo merging

// ---------- JSON ----------

nlohmann::json md_to_json(const MultiDist& m);
// Parses {"entries":[{"p":"1/2","term":"..."}]}. Terms are parsed with
// allow_reserved so translated traces round-trip.
MultiDist md_from_json(const nlohmann::json& j, Calc c);

}  // namespace lop
