#include "random_models.hpp"

#include <functional>

namespace arith::fixtures {

namespace {

Vocabulary letters(std::size_t size, bool with_eos) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i + (with_eos ? 1 : 0) < size; ++i) symbols.push_back(std::string(1, char('A' + i)));
  std::optional<Token> eos;
  if (with_eos) {
    eos = static_cast<Token>(symbols.size());
    symbols.push_back("</s>");
  }
  return Vocabulary(std::move(symbols), eos);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Integer weights with at least one positive entry; with `units`, they sum to it.
std::vector<long> random_weights(std::mt19937_64& rng, std::size_t count, std::optional<int> units) {
  std::vector<long> w(count, 0);
  if (units) {
    for (int u = 0; u < *units; ++u) ++w[pick(rng, 0, count - 1)];
    return w;
  }
  bool any = false;
  for (auto& x : w) {
    x = pick(rng, 0, 3) == 0 ? 0 : static_cast<long>(pick(rng, 1, 9));
    any = any || x > 0;
  }
  if (!any) w[pick(rng, 0, count - 1)] = 1;
  return w;
}

}  // namespace

ModelPtr random_tabular_model(std::mt19937_64& rng, const RandomModelOptions& options) {
  for (;;) {
    const bool with_eos = pick(rng, 0, 1) == 1;
    const std::size_t vocab_size = pick(rng, with_eos ? 3 : 2, options.max_vocab);
    const std::size_t length = pick(rng, 1, options.max_length);
    Vocabulary vocab = letters(vocab_size, with_eos);

    std::vector<Sequence> sequences;
    Sequence prefix;
    std::function<void()> walk = [&] {
      const bool done = prefix.size() == length || (with_eos && !prefix.empty() && prefix.back() == *vocab.eos());
      if (done) {
        sequences.push_back(prefix);
        return;
      }
      for (std::size_t v = 0; v < vocab_size; ++v) {
        prefix.push_back(static_cast<Token>(v));
        walk();
        prefix.pop_back();
      }
    };
    walk();
    if (sequences.size() > options.max_sequences) continue;

    auto weights = random_weights(rng, sequences.size(), options.units);
    long total = 0;
    for (long w : weights) total += w;
    std::vector<TableEntry> table;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      if (weights[i] > 0) table.push_back({sequences[i], Rational(weights[i], total)});
    }
    return make_tabular_model(std::move(vocab), length, std::move(table));
  }
}

ModelPtr random_markov_model(std::mt19937_64& rng, const RandomModelOptions& options) {
  const bool with_eos = pick(rng, 0, 1) == 1;
  const std::size_t vocab_size = pick(rng, with_eos ? 3 : 2, options.max_vocab);
  const std::size_t length = pick(rng, 1, options.max_length);
  const std::size_t order = pick(rng, 0, 2);
  Vocabulary vocab = letters(vocab_size, with_eos);
  const std::size_t words = with_eos ? vocab_size - 1 : vocab_size;

  std::map<Sequence, Distribution<Rational>> rows;
  std::vector<Sequence> contexts{{}};
  for (std::size_t depth = 0; depth < order; ++depth) {
    std::vector<Sequence> next;
    for (const auto& c : contexts) {
      if (c.size() != depth) continue;
      for (std::size_t v = 0; v < words; ++v) {
        Sequence extended = c;
        extended.push_back(static_cast<Token>(v));
        next.push_back(std::move(extended));
      }
    }
    contexts.insert(contexts.end(), next.begin(), next.end());
  }
  for (const auto& c : contexts) {
    auto w = random_weights(rng, vocab_size, options.units);
    long total = 0;
    for (long x : w) total += x;
    std::vector<Rational> probs;
    for (long x : w) probs.emplace_back(x, total);
    rows.emplace(c, Distribution<Rational>(std::move(probs)));
  }
  return make_markov_model(order, std::move(rows), std::move(vocab), length);
}

ModelPtr random_model(std::mt19937_64& rng, std::size_t index, const RandomModelOptions& options) {
  return index % 2 == 0 ? random_tabular_model(rng, options) : random_markov_model(rng, options);
}

ModelPtr bernoulli_model(const Rational& p_a, std::size_t length) {
  std::map<Sequence, Distribution<Rational>> rows;
  rows.emplace(Sequence{}, Distribution<Rational>({p_a, Rational(1 - p_a)}));
  return make_markov_model(0, std::move(rows), Vocabulary({"A", "B"}, std::nullopt), length);
}

ModelPtr deterministic_model(std::size_t length) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < length; ++i) symbols.push_back("s" + std::to_string(i));
  symbols.push_back("</s>");
  const auto eos = static_cast<Token>(length);
  Sequence seq;
  for (std::size_t i = 0; i <= length; ++i) seq.push_back(static_cast<Token>(i));
  return make_tabular_model(Vocabulary(std::move(symbols), eos), length + 1, {{seq, Rational(1)}});
}

}  // namespace arith::fixtures
