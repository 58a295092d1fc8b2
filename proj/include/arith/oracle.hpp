#pragma once

// Brute-force ground truth for small models. Everything here is exact
// rational arithmetic and deliberately avoids the incremental decoder: the
// joint is enumerated, the codebook is laid out by cumulative sums in
// dictionary order, and decoding is a search over that table.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "arith/codebook.hpp"
#include "arith/models.hpp"

namespace arith {

struct JointEntry {
  Sequence sequence;
  Rational probability;
};

/// Positive-probability complete sequences in dictionary order, summing to 1.
struct ExactJoint {
  std::vector<JointEntry> entries;
};

inline constexpr std::size_t kDefaultEnumerationBound = 1'000'000;

/// Depth-first enumeration of every positive-probability complete sequence.
/// Throws TooLarge once more than `bound` sequences have been produced.
ExactJoint enumerate_joint(const SequenceModel& model, const ModifierChain& chain = {},
                           std::size_t bound = kDefaultEnumerationBound);

struct CodebookEntry {
  Sequence sequence;
  UnitInterval<Rational> interval;
};

/// Sequence -> interval map laid out by cumulative sums over the joint.
class ExactCodebook {
 public:
  explicit ExactCodebook(std::vector<CodebookEntry> entries);

  const std::vector<CodebookEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<UnitInterval<Rational>> find(const Sequence& seq) const;

 private:
  std::vector<CodebookEntry> entries_;
};

ExactCodebook exact_codebook(const ExactJoint& joint);

using ExactReward = std::function<Rational(const Sequence&)>;

Rational exact_expectation(const ExactJoint& joint, const ExactReward& reward);

/// The sequence whose half-open interval contains c.
Sequence brute_force_decode(const Rational& c, const ExactCodebook& codebook);

/// Smallest multiple of the codebook's endpoint denominators that is at least
/// `min_k`. A grid of spacing 1/(K(N+1)) then contains every breakpoint of the
/// lattice estimator as a function of the shift.
Integer refining_period(const ExactCodebook& codebook, std::size_t min_k = 10);

/// Average of the arithmetic-sampling estimator over every shift
/// b = j/(K(N+1)), j = 0..K(N+1)-1, decoding with the exact sampler.
Rational full_period_average(const SequenceModel& model, std::size_t n, LatticeMode mode, const ExactReward& reward,
                             const Integer& k, const ModifierChain& chain = {});

/// CSV with columns sequence,probability_num,probability_den,lo,hi.
void write_oracle_csv(std::ostream& out, const ExactJoint& joint, const Vocabulary& vocab);

}  // namespace arith
