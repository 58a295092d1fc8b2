#include "arith/oracle.hpp"

#include <algorithm>
#include <ostream>

#include "arith/sampler.hpp"

namespace arith {

namespace {

void enumerate_from(const SequenceModel& model, const ModifierChain& chain, std::size_t bound, Sequence& prefix,
                    const Rational& mass, std::vector<JointEntry>& out) {
  if (is_complete(model, prefix)) {
    if (out.size() >= bound) throw TooLarge("model has more than " + std::to_string(bound) + " sequences");
    out.push_back({prefix, mass});
    return;
  }
  auto dist = conditional_modified<Rational>(model, prefix, chain);
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] == 0) continue;
    prefix.push_back(static_cast<Token>(v));
    enumerate_from(model, chain, bound, prefix, Rational(mass * dist[v]), out);
    prefix.pop_back();
  }
}

}  // namespace

ExactJoint enumerate_joint(const SequenceModel& model, const ModifierChain& chain, std::size_t bound) {
  validate(chain);
  ExactJoint joint;
  Sequence prefix;
  enumerate_from(model, chain, bound, prefix, Rational(1), joint.entries);
  return joint;
}

ExactCodebook::ExactCodebook(std::vector<CodebookEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i - 1].sequence < entries_[i].sequence) || entries_[i - 1].interval.hi != entries_[i].interval.lo) {
      throw ContractViolation("codebook entries must be dictionary ordered and contiguous");
    }
  }
}

std::optional<UnitInterval<Rational>> ExactCodebook::find(const Sequence& seq) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), seq,
                             [](const CodebookEntry& e, const Sequence& s) { return e.sequence < s; });
  if (it == entries_.end() || it->sequence != seq) return std::nullopt;
  return it->interval;
}

ExactCodebook exact_codebook(const ExactJoint& joint) {
  std::vector<CodebookEntry> entries;
  entries.reserve(joint.entries.size());
  Rational lo = 0;
  for (const auto& e : joint.entries) {
    Rational hi = lo + e.probability;
    entries.push_back({e.sequence, UnitInterval<Rational>(lo, hi)});
    lo = hi;
  }
  if (lo != 1) throw ContractViolation("joint does not sum to 1");
  return ExactCodebook(std::move(entries));
}

Rational exact_expectation(const ExactJoint& joint, const ExactReward& reward) {
  Rational total = 0;
  for (const auto& e : joint.entries) total += reward(e.sequence) * e.probability;
  return total;
}

Sequence brute_force_decode(const Rational& c, const ExactCodebook& codebook) {
  if (!(c >= 0 && c < 1)) throw ContractViolation("code outside [0,1)");
  const auto& entries = codebook.entries();
  auto it = std::partition_point(entries.begin(), entries.end(),
                                 [&](const CodebookEntry& e) { return e.interval.hi <= c; });
  if (it == entries.end() || !it->interval.contains(c)) throw ContractViolation("code not covered by codebook");
  return it->sequence;
}

Integer refining_period(const ExactCodebook& codebook, std::size_t min_k) {
  Integer k = 1;
  for (const auto& e : codebook.entries()) {
    k = lcm(k, denominator(e.interval.lo));
    k = lcm(k, denominator(e.interval.hi));
  }
  if (k < min_k) {
    Integer target(min_k);
    k *= (target + k - 1) / k;
  }
  return k;
}

Rational full_period_average(const SequenceModel& model, std::size_t n, LatticeMode mode, const ExactReward& reward,
                             const Integer& k, const ModifierChain& chain) {
  if (n == 0 || k <= 0) throw ParameterError("full-period average needs n >= 1 and k >= 1");
  const Integer period = k * Integer(mode == LatticeMode::paper ? n + 1 : n);
  Rational total = 0;
  for (Integer j = 0; j < period; ++j) {
    LatticeSpec<Rational> spec(n, mode, ExactCode(Rational(j, period)));
    auto samples = arithmetic_sample<Rational>(model, spec, chain);
    Rational estimate = 0;
    for (const auto& e : samples.entries) estimate += reward(e.sequence);
    total += estimate / static_cast<long>(n);
  }
  return total / period;
}

void write_oracle_csv(std::ostream& out, const ExactJoint& joint, const Vocabulary& vocab) {
  out << "sequence,probability_num,probability_den,lo,hi\n";
  auto codebook = exact_codebook(joint);
  for (const auto& e : codebook.entries()) {
    const Rational p = e.interval.width();
    out << vocab.render(e.sequence) << ',' << numerator(p) << ',' << denominator(p) << ','
        << to_string(e.interval.lo) << ',' << to_string(e.interval.hi) << '\n';
  }
}

}  // namespace arith
