#include "prefixes.hpp"

#include <algorithm>

namespace arith::fixtures {

std::optional<UnitInterval<Rational>> prefix_interval(const ExactCodebook& codebook, const Sequence& prefix) {
  std::optional<Rational> lo, hi;
  for (const auto& e : codebook.entries()) {
    if (e.sequence.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), e.sequence.begin())) continue;
    if (!lo) lo = e.interval.lo;
    hi = e.interval.hi;
  }
  if (!lo) return std::nullopt;
  return UnitInterval<Rational>(*lo, *hi);
}

std::map<Sequence, std::size_t> prefix_counts(const std::vector<Sequence>& sequences) {
  std::map<Sequence, std::size_t> counts;
  for (const auto& s : sequences) {
    for (std::size_t len = 1; len <= s.size(); ++len) ++counts[Sequence(s.begin(), s.begin() + len)];
  }
  return counts;
}

std::map<Sequence, Rational> prefix_masses(const ExactJoint& joint) {
  std::map<Sequence, Rational> masses;
  for (const auto& e : joint.entries) {
    for (std::size_t len = 1; len <= e.sequence.size(); ++len) {
      masses[Sequence(e.sequence.begin(), e.sequence.begin() + len)] += e.probability;
    }
  }
  return masses;
}

std::size_t common_prefix_length(const Sequence& a, const Sequence& b) {
  auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return static_cast<std::size_t>(ia - a.begin());
}

Rational floor_rational(const Rational& x) {
  Integer q = numerator(x) / denominator(x);
  if (x < 0 && Rational(q) != x) q -= 1;
  return Rational(q);
}

}  // namespace arith::fixtures
