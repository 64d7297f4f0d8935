#include "lop/multidist.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "lop/parser.hpp"

namespace lop {

// ---------- rationals ----------

std::string rat_str(const Rat& r) {
  Int num = numerator(r), den = denominator(r);
  return num.str() + "/" + den.str();
}

Rat parse_rat(const std::string& s) {
  size_t slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den == 0) throw LopError("rational with zero denominator: " + s);
    return Rat(num, den);
  } catch (const std::runtime_error& e) {
    throw LopError("bad rational '" + s + "': " + e.what());
  }
}

void check_prob(const Rat& r, const char* what) {
  if (r < 0 || r > 1)
    throw MassError(std::string(what) + " out of range [0,1]: " + rat_str(r));
}

Rat pow2_inv(unsigned k) {
  Int den = Int(1) << k;
  return Rat(1, den);
}

// ---------- multidistributions ----------

MultiDist md_singleton(const Tp& t) { return MultiDist{{{Rat(1), t}}}; }

MultiDist md_scale(const Rat& p, const MultiDist& m) {
  check_prob(p, "scale factor");
  MultiDist out;
  out.entries.reserve(m.entries.size());
  for (auto& [q, t] : m.entries) out.entries.emplace_back(p * q, t);
  return out;
}

MultiDist md_sum(const MultiDist& a, const MultiDist& b) {
  MultiDist out;
  out.entries.reserve(a.entries.size() + b.entries.size());
  out.entries.insert(out.entries.end(), a.entries.begin(), a.entries.end());
  out.entries.insert(out.entries.end(), b.entries.begin(), b.entries.end());
  Rat mass = md_mass(out);
  if (mass > 1) throw MassError("multidistribution mass exceeds 1: " + rat_str(mass));
  return out;
}

Rat md_mass(const MultiDist& m) {
  Rat s = 0;
  for (auto& [p, t] : m.entries) s += p;
  return s;
}

void validate_md(const MultiDist& m, Calc c) {
  if (m.entries.empty()) throw MassError("empty multidistribution");
  Rat mass = 0;
  for (auto& [p, t] : m.entries) {
    if (p <= 0 || p > 1)
      throw MassError("entry probability out of range (0,1]: " + rat_str(p));
    validate_for_calc(t, c);
    mass += p;
  }
  if (mass > 1) throw MassError("multidistribution mass exceeds 1: " + rat_str(mass));
}

std::string md_key(const MultiDist& m) {
  std::vector<std::pair<std::string, Rat>> items;
  items.reserve(m.entries.size());
  for (auto& [p, t] : m.entries) items.emplace_back(canon(t), p);
  std::sort(items.begin(), items.end());
  std::string key;
  for (auto& [c, p] : items) {
    key += rat_str(p);
    key += '@';
    key += c;
    key += '|';
  }
  return key;
}

bool md_eq(const MultiDist& a, const MultiDist& b) {
  if (a.entries.size() != b.entries.size()) return false;
  return md_key(a) == md_key(b);
}

std::string md_to_string(const MultiDist& m) {
  std::string out = "[";
  for (size_t i = 0; i < m.entries.size(); ++i) {
    if (i) out += ", ";
    out += rat_str(m.entries[i].first);
    out += ' ';
    out += print_term(m.entries[i].second);
  }
  out += ']';
  return out;
}

Dist associated_distribution(const MultiDist& m) {
  Dist d;
  for (auto& [p, t] : m.entries) {
    std::string c = canon(t);
    d.mass[c] += p;
    d.repr.emplace(c, t);
  }
  return d;
}

std::string dist_key(const Dist& d) {
  std::string key;
  for (auto& [c, p] : d.mass) {
    key += rat_str(p);
    key += '@';
    key += c;
    key += '|';
  }
  return key;
}

// ---------- JSON ----------

nlohmann::json md_to_json(const MultiDist& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (auto& [p, t] : m.entries)
    entries.push_back({{"p", rat_str(p)}, {"term", print_term(t)}});
  return nlohmann::json{{"entries", entries}};
}

MultiDist md_from_json(const nlohmann::json& j, Calc c) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw LopError("multidistribution JSON must be {\"entries\": [...]}");
  MultiDist m;
  ParseOpts opts;
  opts.allow_reserved = true;
  for (auto& e : j["entries"]) {
    Rat p = parse_rat(e.at("p").get<std::string>());
    Tp t = parse(e.at("term").get<std::string>(), c, opts);
    m.entries.emplace_back(p, t);
  }
  validate_md(m, c);
  return m;
}

}  // namespace lop
