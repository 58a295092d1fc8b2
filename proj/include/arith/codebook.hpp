#pragma once

// Interval arithmetic on the unit interval.
//
// Every type here is templated on the scalar used for code points: `double`
// for the fast path and `Rational` for exact work. A categorical distribution
// partitions [0,1) into half-open intervals in vocabulary order; a code point
// selects the interval containing it and is then mapped back onto [0,1) so
// the next step can repeat the process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arith/errors.hpp"
#include "arith/rational.hpp"

namespace arith {

using Token = std::int32_t;
using Sequence = std::vector<Token>;

enum class Repr { fast, exact };

template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr Repr repr = Repr::fast;
  // Allowed deviation of a probability vector's sum from 1.
  static double sum_tolerance() { return 1e-9; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr Repr repr = Repr::exact;
  static Rational sum_tolerance() { return Rational(0); }
};

template <class Scalar>
inline Scalar abs_value(const Scalar& x) {
  return x < 0 ? Scalar(-x) : x;
}

/// A position in [0,1). Construction validates the range.
template <class Scalar>
class CodePoint {
 public:
  explicit CodePoint(Scalar value) : value_(std::move(value)) {
    if (!(value_ >= 0 && value_ < 1)) {
      throw ContractViolation("code point outside [0,1)");
    }
  }

  const Scalar& value() const { return value_; }
  static constexpr Repr repr() { return ScalarTraits<Scalar>::repr; }

  friend bool operator==(const CodePoint& a, const CodePoint& b) { return a.value_ == b.value_; }
  friend bool operator<(const CodePoint& a, const CodePoint& b) { return a.value_ < b.value_; }

 private:
  Scalar value_;
};

using FastCode = CodePoint<double>;
using ExactCode = CodePoint<Rational>;

/// Half-open subinterval [lo, hi) of [0,1) with lo < hi.
template <class Scalar>
struct UnitInterval {
  Scalar lo;
  Scalar hi;

  UnitInterval(Scalar lo_, Scalar hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (!(lo >= 0 && lo < hi && hi <= 1)) {
      throw ContractViolation("unit interval requires 0 <= lo < hi <= 1");
    }
  }

  Scalar width() const { return hi - lo; }
  bool contains(const Scalar& c) const { return lo <= c && c < hi; }

  friend bool operator==(const UnitInterval& a, const UnitInterval& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/// Probabilities over an ordered vocabulary. Entries are non-negative and sum
/// to one (within 1e-9 for doubles, exactly for rationals).
template <class Scalar>
class Distribution {
 public:
  Distribution() = default;

  explicit Distribution(std::vector<Scalar> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidDistribution("distribution has no entries");
    Scalar sum = 0;
    for (const auto& p : probs_) {
      if (!(p >= 0)) throw InvalidDistribution("negative or NaN probability");
      sum += p;
    }
    if (abs_value(Scalar(sum - 1)) > ScalarTraits<Scalar>::sum_tolerance()) {
      throw InvalidDistribution("probabilities do not sum to 1");
    }
  }

  // Divides non-negative weights by their sum.
  static Distribution normalized(std::vector<Scalar> weights) {
    Scalar sum = 0;
    for (const auto& w : weights) {
      if (!(w >= 0)) throw InvalidDistribution("negative or NaN weight");
      sum += w;
    }
    if (!(sum > 0)) throw InvalidDistribution("weights sum to zero");
    for (auto& w : weights) w /= sum;
    return Distribution(std::move(weights));
  }

  std::size_t size() const { return probs_.size(); }
  const Scalar& operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<Scalar>& probs() const { return probs_; }

 private:
  std::vector<Scalar> probs_;
};

template <class Scalar>
struct SymbolInterval {
  Token symbol;
  UnitInterval<Scalar> interval;
};

template <class Scalar>
using Partition = std::vector<SymbolInterval<Scalar>>;

/// Running-sum CDF partition of [0,1) in vocabulary order. Zero-probability
/// symbols are omitted and the last upper bound is exactly 1.
template <class Scalar>
Partition<Scalar> cdf_intervals(const Distribution<Scalar>& dist) {
  std::size_t last = dist.size();
  for (std::size_t i = dist.size(); i-- > 0;) {
    if (dist[i] > 0) {
      last = i;
      break;
    }
  }
  if (last == dist.size()) throw InvalidDistribution("distribution has no positive entry");

  Partition<Scalar> out;
  Scalar lo = 0;
  for (std::size_t i = 0; i <= last; ++i) {
    if (!(dist[i] > 0)) continue;
    Scalar hi = (i == last) ? Scalar(1) : Scalar(lo + dist[i]);
    if (hi > 1) hi = 1;
    // Floating rounding can collapse a tiny interval; such a symbol is unreachable.
    if (lo < hi) out.push_back({static_cast<Token>(i), UnitInterval<Scalar>(lo, hi)});
    lo = hi;
  }
  return out;
}

// Counts codes that fell outside every interval of a partition.
struct DriftCounter {
  std::size_t count = 0;
};

/// Symbol whose interval contains c. Codes outside every interval (possible
/// only through representation drift) go to the last interval and bump the
/// counter when one is supplied.
template <class Scalar>
Token locate(const Scalar& c, const Partition<Scalar>& intervals, DriftCounter* drift = nullptr) {
  if (intervals.empty()) throw InvalidDistribution("empty partition");
  auto it = std::upper_bound(intervals.begin(), intervals.end(), c,
                             [](const Scalar& x, const SymbolInterval<Scalar>& s) { return x < s.interval.lo; });
  if (it != intervals.begin()) {
    const auto& hit = *std::prev(it);
    if (hit.interval.contains(c)) return hit.symbol;
  }
  if (drift) ++drift->count;
  return intervals.back().symbol;
}

template <class Scalar>
Token locate(const CodePoint<Scalar>& c, const Partition<Scalar>& intervals, DriftCounter* drift = nullptr) {
  return locate(c.value(), intervals, drift);
}

/// Maps c in [lo, hi) affinely onto [0,1).
template <class Scalar>
CodePoint<Scalar> renormalize(const CodePoint<Scalar>& c, const UnitInterval<Scalar>& interval) {
  if (!interval.contains(c.value())) throw ContractViolation("renormalize: code outside interval");
  Scalar r = (c.value() - interval.lo) / interval.width();
  if constexpr (ScalarTraits<Scalar>::repr == Repr::fast) {
    if (r >= 1) r = std::nextafter(1.0, 0.0);
    if (r < 0) r = 0;
  }
  return CodePoint<Scalar>(std::move(r));
}

/// (c + b) mod 1.
template <class Scalar>
CodePoint<Scalar> shift_mod1(const CodePoint<Scalar>& c, const CodePoint<Scalar>& b) {
  Scalar s = c.value() + b.value();
  if (s >= 1) s -= 1;
  if constexpr (ScalarTraits<Scalar>::repr == Repr::fast) {
    if (s < 0) s = 0;
  }
  return CodePoint<Scalar>(std::move(s));
}

enum class LatticeMode {
  paper,    // i/(N+1) + b, i = 1..N
  uniform,  // i/N + b,     i = 0..N-1
};

std::string to_string(LatticeMode mode);
LatticeMode parse_lattice_mode(const std::string& text);

template <class Scalar>
struct LatticeSpec {
  std::size_t n;
  LatticeMode mode;
  CodePoint<Scalar> shift;

  LatticeSpec(std::size_t n_, LatticeMode mode_, CodePoint<Scalar> shift_)
      : n(n_), mode(mode_), shift(std::move(shift_)) {
    if (n == 0) throw ParameterError("lattice needs at least one code");
  }
};

/// Shifted lattice codes in lattice-index order.
template <class Scalar>
std::vector<CodePoint<Scalar>> lattice_codes(const LatticeSpec<Scalar>& spec) {
  std::vector<CodePoint<Scalar>> codes;
  codes.reserve(spec.n);
  const std::size_t first = spec.mode == LatticeMode::paper ? 1 : 0;
  const std::size_t denom = spec.mode == LatticeMode::paper ? spec.n + 1 : spec.n;
  for (std::size_t i = first; i < first + spec.n; ++i) {
    Scalar base;
    if constexpr (ScalarTraits<Scalar>::repr == Repr::exact) {
      base = Rational(static_cast<long>(i), static_cast<long>(denom));
    } else {
      base = static_cast<double>(i) / static_cast<double>(denom);
    }
    codes.push_back(shift_mod1(CodePoint<Scalar>(std::move(base)), spec.shift));
  }
  return codes;
}

}  // namespace arith
