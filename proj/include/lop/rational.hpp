#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "lop/error.hpp"

namespace lop {

// Exact rational arithmetic. All probabilities and masses in the library are
// Rat; nothing is ever rounded.
using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

// Serializes as "num/den" with den > 0 and gcd(num, den) = 1; integers print
// with an explicit denominator ("1/1", "0/1") so the format is uniform.
std::string rat_str(const Rat& r);

// Accepts "p/q" or a bare integer "p". Throws LopError on malformed input or
// q = 0. No range restriction; use check_prob for probabilities.
Rat parse_rat(const std::string& s);

// Throws MassError unless 0 <= r <= 1.
void check_prob(const Rat& r, const char* what);

// 2^-k, the shape all default tolerances take.
Rat pow2_inv(unsigned k);

}  // namespace lop
