#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "arith/codebook.hpp"
#include "arith/rational.hpp"

namespace arith {

/// Ordered, duplicate-free symbol list with an optional end-of-sequence token.
/// Without EOS every sequence runs to the model's maximum length.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> symbols, std::optional<Token> eos);

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(Token t) const { return symbols_.at(static_cast<std::size_t>(t)); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::optional<Token> eos() const { return eos_; }
  std::optional<Token> index_of(const std::string& symbol) const;

  // Space-joined symbols.
  std::string render(std::span<const Token> tokens) const;
  // Inverse of render; unknown symbols raise InputError.
  Sequence parse(const std::string& line) const;

 private:
  std::vector<std::string> symbols_;
  std::optional<Token> eos_;
  std::unordered_map<std::string, Token> index_;
};

// Logit modifiers, applied left to right to every conditional.
struct Temperature {
  double value;
};
struct TopK {
  std::size_t k;
};
struct Nucleus {
  double p;
};
using Modifier = std::variant<Temperature, TopK, Nucleus>;
using ModifierChain = std::vector<Modifier>;

void validate(const ModifierChain& chain);
// e.g. "temperature=0.5;top_k=2", empty for the empty chain.
std::string describe(const ModifierChain& chain);

/// p_i^(1/T), renormalized. Zero entries stay zero. The exact path is exact
/// when 1/T is an integer; otherwise the powers are computed in double and
/// snapped to their exact binary values before exact renormalization.
template <class Scalar>
Distribution<Scalar> apply_temperature(const Distribution<Scalar>& dist, double temperature);

/// Keeps the k largest entries (ties by vocabulary order) and renormalizes.
template <class Scalar>
Distribution<Scalar> apply_top_k(const Distribution<Scalar>& dist, std::size_t k);

/// Keeps the smallest probability-sorted set (ties by vocabulary order) whose
/// mass reaches p, then renormalizes.
template <class Scalar>
Distribution<Scalar> apply_nucleus(const Distribution<Scalar>& dist, double p);

template <class Scalar>
Distribution<Scalar> apply_modifiers(const Distribution<Scalar>& dist, const ModifierChain& chain);

/// Conditional distributions over the next token given a prefix.
///
/// Implementations are immutable after construction, so one instance can be
/// queried from many threads. Both representations must describe the same
/// distribution: `conditional` is the double image of `conditional_exact`
/// (up to rounding).
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t max_length() const = 0;
  virtual Distribution<double> conditional(std::span<const Token> prefix) const = 0;
  virtual Distribution<Rational> conditional_exact(std::span<const Token> prefix) const = 0;
};

using ModelPtr = std::shared_ptr<const SequenceModel>;

// Complete at EOS or at the maximum length, whichever comes first.
bool is_complete(const SequenceModel& model, std::span<const Token> prefix);

// Throws InvalidSequence on out-of-vocabulary tokens, tokens after EOS or
// sequences longer than the maximum length.
void check_sequence(const SequenceModel& model, std::span<const Token> seq);

template <class Scalar>
Distribution<Scalar> raw_conditional(const SequenceModel& model, std::span<const Token> prefix) {
  if constexpr (ScalarTraits<Scalar>::repr == Repr::exact) {
    return model.conditional_exact(prefix);
  } else {
    return model.conditional(prefix);
  }
}

/// Raw conditional with the modifier chain applied. Throws InvalidPrefix for
/// complete prefixes.
template <class Scalar>
Distribution<Scalar> conditional_modified(const SequenceModel& model, std::span<const Token> prefix,
                                          const ModifierChain& chain);

/// Sum of log conditional probabilities; -inf when a step has zero mass.
double sequence_logprob(const SequenceModel& model, std::span<const Token> seq, const ModifierChain& chain = {});

/// Product of exact conditional probabilities.
Rational sequence_probability(const SequenceModel& model, std::span<const Token> seq,
                              const ModifierChain& chain = {});

struct TableEntry {
  Sequence sequence;
  Rational probability;
};

/// Model defined by an explicit joint over complete sequences; conditionals
/// come from marginalizing the table.
ModelPtr make_tabular_model(Vocabulary vocab, std::size_t max_length, std::vector<TableEntry> table);

/// Order-k Markov chain. Rows are keyed by the last min(k, |prefix|) tokens;
/// every context reachable within the maximum length needs a row.
ModelPtr make_markov_model(std::size_t order, std::map<Sequence, Distribution<Rational>> rows, Vocabulary vocab,
                           std::size_t max_length);

struct SyntheticOptions {
  std::uint64_t seed = 0;
  std::size_t vocab_size = 4;
  std::size_t max_length = 4;
  double peakedness = 1.0;
  bool with_eos = true;
  // Custom symbols; when set, vocab_size and with_eos are taken from it.
  std::optional<Vocabulary> vocabulary;
};

/// Pseudo-random language model. Conditionals are a stateless hash of
/// (seed, prefix): Gumbel scores scaled by `peakedness`, softmaxed and
/// quantized to integer weights so the exact and fast views agree. The
/// default vocabulary is w0, w1, ... with "</s>" last as the end token.
ModelPtr make_synthetic_lm(const SyntheticOptions& options);

}  // namespace arith
