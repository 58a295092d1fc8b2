#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arith/codebook.hpp"
#include "arith/models.hpp"

namespace arith {

enum class Method { arithmetic, ancestral };

std::string to_string(Method method);
Method parse_method(const std::string& text);

template <class Scalar>
struct SampleEntry {
  Sequence sequence;
  std::optional<CodePoint<Scalar>> code;  // absent for ancestral samples
  double logprob;
};

/// Decoded samples in input (lattice index) order.
template <class Scalar>
struct SampleSet {
  std::vector<SampleEntry<Scalar>> entries;
  std::optional<CodePoint<Scalar>> shift;
  Method method = Method::arithmetic;
  std::string modifiers;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<Sequence> sequences() const;
  // Entry indices ordered by code; entries without a code keep their position.
  std::vector<std::size_t> code_order() const;
};

struct DecodeOptions {
  std::size_t workers = 1;
  // Tokens to condition on. Decoded sequences include them.
  Sequence context;
};

/// Decodes one code point: at every step the modified conditional partitions
/// [0,1), the code selects a symbol, and the code is rescaled into that
/// symbol's interval. Stops at EOS or the maximum length.
template <class Scalar>
Sequence decode_code(const SequenceModel& model, const CodePoint<Scalar>& code, const ModifierChain& chain = {},
                     std::span<const Token> context = {});

/// Exact codebook interval of a complete sequence or prefix. Width equals the
/// sequence's probability. Throws EmptyInterval for zero-probability input.
UnitInterval<Rational> code_interval_of_sequence(const SequenceModel& model, std::span<const Token> seq,
                                                 const ModifierChain& chain = {});

/// Decodes every code, fanning out over `options.workers` threads. Output is
/// in input order and independent of the worker count.
template <class Scalar>
SampleSet<Scalar> parallel_decode(const SequenceModel& model, std::span<const CodePoint<Scalar>> codes,
                                  const ModifierChain& chain = {}, const DecodeOptions& options = {});

template <class Scalar>
SampleSet<Scalar> arithmetic_sample(const SequenceModel& model, const LatticeSpec<Scalar>& spec,
                                    const ModifierChain& chain = {}, const DecodeOptions& options = {});

/// n i.i.d. samples: decode_code applied to n seeded uniform codes.
SampleSet<double> ancestral_sample(const SequenceModel& model, std::size_t n, std::uint64_t seed,
                                   const ModifierChain& chain = {}, const DecodeOptions& options = {});

// Shift b drawn from a seed; the exact form is the exact value of the double.
double shift_from_seed(std::uint64_t seed);

}  // namespace arith
