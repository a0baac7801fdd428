#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace finact {

/// Exact rational arithmetic used throughout the pseudonorm machinery.
/// All metric values are rationals; no floating point anywhere.
using Rat = boost::rational<std::int64_t>;

inline Rat rat(std::int64_t num, std::int64_t den = 1) { return Rat(num, den); }

inline std::string to_string(const Rat& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

/// Parses "p", "p/q" or a plain decimal like "0.25".
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
    if (tail.size() > 15) throw std::invalid_argument("decimal too long: " + s);
    std::int64_t den = 1;
    for (size_t i = 0; i < tail.size(); ++i) den *= 10;
    std::int64_t sign = (!head.empty() && head[0] == '-') ? -1 : 1;
    std::int64_t whole = head.empty() || head == "-" ? 0 : std::stoll(head);
    std::int64_t frac = tail.empty() ? 0 : std::stoll(tail);
    return Rat(whole * den + sign * frac, den);
  }
  return Rat(std::stoll(s));
}

inline Rat rat_abs(const Rat& r) { return r < Rat(0) ? -r : r; }

/// Least integer >= r.
inline std::int64_t rat_ceil(const Rat& r) {
  std::int64_t q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r > Rat(0)) ++q;
  return q;
}

/// Greatest integer <= r.
inline std::int64_t rat_floor(const Rat& r) {
  std::int64_t q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r < Rat(0)) --q;
  return q;
}

}  // namespace finact
