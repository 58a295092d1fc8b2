#include "arith/sampler.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "arith/hashing.hpp"

namespace arith {

std::string to_string(LatticeMode mode) { return mode == LatticeMode::paper ? "paper" : "uniform"; }

LatticeMode parse_lattice_mode(const std::string& text) {
  if (text == "paper") return LatticeMode::paper;
  if (text == "uniform") return LatticeMode::uniform;
  throw ParameterError("unknown lattice mode '" + text + "'");
}

std::string to_string(Method method) { return method == Method::arithmetic ? "arithmetic" : "ancestral"; }

Method parse_method(const std::string& text) {
  if (text == "arithmetic") return Method::arithmetic;
  if (text == "ancestral") return Method::ancestral;
  throw ParameterError("unknown method '" + text + "'");
}

template <class Scalar>
std::vector<Sequence> SampleSet<Scalar>::sequences() const {
  std::vector<Sequence> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.sequence);
  return out;
}

template <class Scalar>
std::vector<std::size_t> SampleSet<Scalar>::code_order() const {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = entries[a].code;
    const auto& cb = entries[b].code;
    return ca && cb && *ca < *cb;
  });
  return order;
}

template <class Scalar>
Sequence decode_code(const SequenceModel& model, const CodePoint<Scalar>& code, const ModifierChain& chain,
                     std::span<const Token> context) {
  check_sequence(model, context);
  if (!context.empty() && is_complete(model, context)) throw InvalidPrefix("context is already complete");
  Sequence seq(context.begin(), context.end());
  CodePoint<Scalar> c = code;
  while (!is_complete(model, seq)) {
    auto intervals = cdf_intervals(conditional_modified<Scalar>(model, seq, chain));
    const Token symbol = locate(c, intervals);
    auto hit = std::find_if(intervals.begin(), intervals.end(), [&](const auto& s) { return s.symbol == symbol; });
    seq.push_back(symbol);
    if (hit->interval.contains(c.value())) {
      c = renormalize(c, hit->interval);
    } else {
      // Drifted outside every interval; restart at the bottom of the fallback.
      c = renormalize(CodePoint<Scalar>(hit->interval.lo), hit->interval);
    }
  }
  return seq;
}

UnitInterval<Rational> code_interval_of_sequence(const SequenceModel& model, std::span<const Token> seq,
                                                 const ModifierChain& chain) {
  check_sequence(model, seq);
  Rational lo = 0;
  Rational width = 1;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto dist = conditional_modified<Rational>(model, seq.first(t), chain);
    const auto symbol = static_cast<std::size_t>(seq[t]);
    if (dist[symbol] == 0) throw EmptyInterval("sequence has zero probability");
    Rational below = 0;
    for (std::size_t j = 0; j < symbol; ++j) below += dist[j];
    lo += width * below;
    width *= dist[symbol];
  }
  return UnitInterval<Rational>(lo, lo + width);
}

template <class Scalar>
SampleSet<Scalar> parallel_decode(const SequenceModel& model, std::span<const CodePoint<Scalar>> codes,
                                  const ModifierChain& chain, const DecodeOptions& options) {
  if (options.workers == 0) throw ParameterError("worker count must be at least 1");
  validate(chain);
  SampleSet<Scalar> out;
  out.modifiers = describe(chain);
  out.entries.resize(codes.size(), SampleEntry<Scalar>{{}, std::nullopt, 0.0});

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& e = out.entries[i];
      e.sequence = decode_code(model, codes[i], chain, options.context);
      e.code = codes[i];
      e.logprob = sequence_logprob(model, e.sequence, chain) -
                  (options.context.empty() ? 0.0 : sequence_logprob(model, options.context, chain));
    }
  };

  const std::size_t workers = std::min<std::size_t>(options.workers, std::max<std::size_t>(codes.size(), 1));
  if (workers <= 1) {
    work(0, codes.size());
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (codes.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(codes.size(), w * chunk);
      const std::size_t end = std::min(codes.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <class Scalar>
SampleSet<Scalar> arithmetic_sample(const SequenceModel& model, const LatticeSpec<Scalar>& spec,
                                    const ModifierChain& chain, const DecodeOptions& options) {
  const auto codes = lattice_codes(spec);
  auto out = parallel_decode<Scalar>(model, codes, chain, options);
  out.method = Method::arithmetic;
  out.shift = spec.shift;
  return out;
}

double shift_from_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return uniform01(rng);
}

SampleSet<double> ancestral_sample(const SequenceModel& model, std::size_t n, std::uint64_t seed,
                                   const ModifierChain& chain, const DecodeOptions& options) {
  if (n == 0) throw ParameterError("ancestral sampling needs n >= 1");
  std::mt19937_64 rng(seed);
  std::vector<FastCode> codes;
  codes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) codes.emplace_back(uniform01(rng));
  auto out = parallel_decode<double>(model, codes, chain, options);
  out.method = Method::ancestral;
  for (auto& e : out.entries) e.code.reset();
  return out;
}

template struct SampleSet<double>;
template struct SampleSet<Rational>;
template Sequence decode_code(const SequenceModel&, const CodePoint<double>&, const ModifierChain&,
                              std::span<const Token>);
template Sequence decode_code(const SequenceModel&, const CodePoint<Rational>&, const ModifierChain&,
                              std::span<const Token>);
template SampleSet<double> parallel_decode(const SequenceModel&, std::span<const CodePoint<double>>,
                                           const ModifierChain&, const DecodeOptions&);
template SampleSet<Rational> parallel_decode(const SequenceModel&, std::span<const CodePoint<Rational>>,
                                             const ModifierChain&, const DecodeOptions&);
template SampleSet<double> arithmetic_sample(const SequenceModel&, const LatticeSpec<double>&, const ModifierChain&,
                                             const DecodeOptions&);
template SampleSet<Rational> arithmetic_sample(const SequenceModel&, const LatticeSpec<Rational>&,
                                               const ModifierChain&, const DecodeOptions&);

}  // namespace arith
