#include "arith/models.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "arith/hashing.hpp"

namespace arith {

Vocabulary::Vocabulary(std::vector<std::string> symbols, std::optional<Token> eos)
    : symbols_(std::move(symbols)), eos_(eos) {
  if (symbols_.empty()) throw InvalidModel("vocabulary is empty");
  if (eos_ && (*eos_ < 0 || static_cast<std::size_t>(*eos_) >= symbols_.size())) {
    throw InvalidModel("eos index out of range");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty() || symbols_[i].find_first_of(" \t\r\n") != std::string::npos) {
      throw InvalidModel("vocabulary symbols must be non-empty and free of whitespace");
    }
    if (!index_.emplace(symbols_[i], static_cast<Token>(i)).second) {
      throw InvalidModel("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

std::optional<Token> Vocabulary::index_of(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::render(std::span<const Token> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += symbol(tokens[i]);
  }
  return out;
}

Sequence Vocabulary::parse(const std::string& line) const {
  Sequence out;
  std::istringstream in(line);
  std::string word;
  while (in >> word) {
    auto t = index_of(word);
    if (!t) throw InputError("unknown token '" + word + "'");
    out.push_back(*t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Modifiers

void validate(const ModifierChain& chain) {
  for (const auto& m : chain) {
    if (auto* t = std::get_if<Temperature>(&m); t && !(t->value > 0 && std::isfinite(t->value))) {
      throw ParameterError("temperature must be positive");
    }
    if (auto* k = std::get_if<TopK>(&m); k && k->k == 0) throw ParameterError("top_k must be positive");
    if (auto* n = std::get_if<Nucleus>(&m); n && !(n->p > 0 && n->p <= 1)) {
      throw ParameterError("nucleus p must lie in (0, 1]");
    }
  }
}

std::string describe(const ModifierChain& chain) {
  std::string out;
  for (const auto& m : chain) {
    if (!out.empty()) out += ';';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Temperature>) {
            out += "temperature=" + format_double(v.value);
          } else if constexpr (std::is_same_v<T, TopK>) {
            out += "top_k=" + std::to_string(v.k);
          } else {
            out += "nucleus=" + format_double(v.p);
          }
        },
        m);
  }
  return out;
}

namespace {

// Vocabulary indices sorted by decreasing probability, ties by index.
template <class Scalar>
std::vector<std::size_t> ranked(const Distribution<Scalar>& dist) {
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  return order;
}

template <class Scalar>
Distribution<Scalar> keep_only(const Distribution<Scalar>& dist, const std::vector<bool>& keep) {
  std::vector<Scalar> w(dist.size(), Scalar(0));
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (keep[i]) w[i] = dist[i];
  }
  return Distribution<Scalar>::normalized(std::move(w));
}

std::vector<double> tempered_weights(const std::vector<double>& probs, double temperature) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (double p : probs) {
    if (p > 0) max_log = std::max(max_log, std::log(p));
  }
  std::vector<double> w(probs.size(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0) w[i] = std::exp((std::log(probs[i]) - max_log) / temperature);
  }
  return w;
}

}  // namespace

template <class Scalar>
Distribution<Scalar> apply_temperature(const Distribution<Scalar>& dist, double temperature) {
  if (!(temperature > 0 && std::isfinite(temperature))) throw ParameterError("temperature must be positive");
  if (temperature == 1.0) return dist;
  if constexpr (ScalarTraits<Scalar>::repr == Repr::fast) {
    return Distribution<double>::normalized(tempered_weights(dist.probs(), temperature));
  } else {
    Rational inverse = 1 / snap_to_decimal(temperature);
    if (denominator(inverse) == 1) {
      const unsigned long power = numerator(inverse).convert_to<unsigned long>();
      std::vector<Rational> w;
      w.reserve(dist.size());
      for (const auto& p : dist.probs()) {
        Rational acc = 1;
        for (unsigned long i = 0; i < power; ++i) acc *= p;
        w.push_back(std::move(acc));
      }
      return Distribution<Rational>::normalized(std::move(w));
    }
    std::vector<double> probs;
    probs.reserve(dist.size());
    for (const auto& p : dist.probs()) probs.push_back(to_double(p));
    std::vector<Rational> w;
    for (double x : tempered_weights(probs, temperature)) w.push_back(exact_from_double(x));
    return Distribution<Rational>::normalized(std::move(w));
  }
}

template <class Scalar>
Distribution<Scalar> apply_top_k(const Distribution<Scalar>& dist, std::size_t k) {
  if (k == 0) throw ParameterError("top_k must be positive");
  if (k >= dist.size()) return dist;
  auto order = ranked(dist);
  std::vector<bool> keep(dist.size(), false);
  for (std::size_t i = 0; i < k; ++i) keep[order[i]] = true;
  return keep_only(dist, keep);
}

template <class Scalar>
Distribution<Scalar> apply_nucleus(const Distribution<Scalar>& dist, double p) {
  if (!(p > 0 && p <= 1)) throw ParameterError("nucleus p must lie in (0, 1]");
  if (p == 1.0) return dist;
  Scalar threshold;
  if constexpr (ScalarTraits<Scalar>::repr == Repr::exact) {
    threshold = snap_to_decimal(p);
  } else {
    // Cumulative sums of decimal inputs land a few ulps either side of p.
    threshold = p - 1e-12;
  }
  auto order = ranked(dist);
  std::vector<bool> keep(dist.size(), false);
  Scalar cumulative = 0;
  for (std::size_t idx : order) {
    keep[idx] = true;
    cumulative += dist[idx];
    if (cumulative >= threshold) break;
  }
  return keep_only(dist, keep);
}

template <class Scalar>
Distribution<Scalar> apply_modifiers(const Distribution<Scalar>& dist, const ModifierChain& chain) {
  Distribution<Scalar> out = dist;
  for (const auto& m : chain) {
    out = std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Temperature>) {
            return apply_temperature(out, v.value);
          } else if constexpr (std::is_same_v<T, TopK>) {
            return apply_top_k(out, v.k);
          } else {
            return apply_nucleus(out, v.p);
          }
        },
        m);
  }
  return out;
}

template Distribution<double> apply_temperature(const Distribution<double>&, double);
template Distribution<Rational> apply_temperature(const Distribution<Rational>&, double);
template Distribution<double> apply_top_k(const Distribution<double>&, std::size_t);
template Distribution<Rational> apply_top_k(const Distribution<Rational>&, std::size_t);
template Distribution<double> apply_nucleus(const Distribution<double>&, double);
template Distribution<Rational> apply_nucleus(const Distribution<Rational>&, double);
template Distribution<double> apply_modifiers(const Distribution<double>&, const ModifierChain&);
template Distribution<Rational> apply_modifiers(const Distribution<Rational>&, const ModifierChain&);

// ---------------------------------------------------------------------------
// Sequence-level helpers

bool is_complete(const SequenceModel& model, std::span<const Token> prefix) {
  if (prefix.size() >= model.max_length()) return true;
  auto eos = model.vocabulary().eos();
  return eos && !prefix.empty() && prefix.back() == *eos;
}

void check_sequence(const SequenceModel& model, std::span<const Token> seq) {
  const auto& vocab = model.vocabulary();
  if (seq.size() > model.max_length()) throw InvalidSequence("sequence longer than the model's maximum length");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] < 0 || static_cast<std::size_t>(seq[i]) >= vocab.size()) {
      throw InvalidSequence("token index out of vocabulary");
    }
    if (vocab.eos() && seq[i] == *vocab.eos() && i + 1 != seq.size()) {
      throw InvalidSequence("token after end-of-sequence");
    }
  }
}

template <class Scalar>
Distribution<Scalar> conditional_modified(const SequenceModel& model, std::span<const Token> prefix,
                                          const ModifierChain& chain) {
  if (is_complete(model, prefix)) throw InvalidPrefix("prefix is already complete");
  auto raw = raw_conditional<Scalar>(model, prefix);
  if (raw.size() != model.vocabulary().size()) throw InvalidModel("conditional size differs from vocabulary size");
  return chain.empty() ? raw : apply_modifiers(raw, chain);
}

template Distribution<double> conditional_modified(const SequenceModel&, std::span<const Token>,
                                                   const ModifierChain&);
template Distribution<Rational> conditional_modified(const SequenceModel&, std::span<const Token>,
                                                     const ModifierChain&);

double sequence_logprob(const SequenceModel& model, std::span<const Token> seq, const ModifierChain& chain) {
  check_sequence(model, seq);
  double total = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto dist = conditional_modified<double>(model, seq.first(t), chain);
    double p = dist[static_cast<std::size_t>(seq[t])];
    if (!(p > 0)) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

Rational sequence_probability(const SequenceModel& model, std::span<const Token> seq, const ModifierChain& chain) {
  check_sequence(model, seq);
  Rational total = 1;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto dist = conditional_modified<Rational>(model, seq.first(t), chain);
    total *= dist[static_cast<std::size_t>(seq[t])];
    if (total == 0) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Tabular model

namespace {

Distribution<double> to_fast(const Distribution<Rational>& exact) {
  std::vector<double> probs;
  probs.reserve(exact.size());
  for (const auto& p : exact.probs()) probs.push_back(to_double(p));
  return Distribution<double>(std::move(probs));
}

class TabularModel final : public SequenceModel {
 public:
  TabularModel(Vocabulary vocab, std::size_t max_length, std::vector<TableEntry> table)
      : vocab_(std::move(vocab)), max_length_(max_length) {
    if (max_length_ == 0) throw InvalidModel("max_length must be positive");
    Rational total = 0;
    for (auto& entry : table) {
      if (entry.probability < 0) throw InvalidModel("negative probability in table");
      try {
        check_sequence(*this, entry.sequence);
      } catch (const InvalidSequence& e) {
        throw InvalidModel(std::string("table sequence: ") + e.what());
      }
      if (!is_complete(*this, entry.sequence)) {
        throw InvalidModel("table sequence '" + vocab_.render(entry.sequence) + "' is not complete");
      }
      if (!seen_.insert(entry.sequence).second) throw InvalidModel("duplicate table sequence");
      total += entry.probability;
      if (entry.probability == 0) continue;
      for (std::size_t len = 0; len <= entry.sequence.size(); ++len) {
        Sequence prefix(entry.sequence.begin(), entry.sequence.begin() + static_cast<std::ptrdiff_t>(len));
        mass_[std::move(prefix)] += entry.probability;
      }
    }
    if (total != 1) throw InvalidModel("table probabilities sum to " + to_string(total) + ", not 1");
  }

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t max_length() const override { return max_length_; }

  Distribution<Rational> conditional_exact(std::span<const Token> prefix) const override {
    check_sequence(*this, prefix);
    if (is_complete(*this, prefix)) throw InvalidPrefix("prefix is already complete");
    Sequence key(prefix.begin(), prefix.end());
    auto it = mass_.find(key);
    if (it == mass_.end()) throw InvalidPrefix("prefix has zero probability under the table");
    const Rational& denom = it->second;
    std::vector<Rational> probs(vocab_.size(), Rational(0));
    key.push_back(0);
    for (std::size_t v = 0; v < vocab_.size(); ++v) {
      key.back() = static_cast<Token>(v);
      auto child = mass_.find(key);
      if (child != mass_.end()) probs[v] = child->second / denom;
    }
    return Distribution<Rational>(std::move(probs));
  }

  Distribution<double> conditional(std::span<const Token> prefix) const override {
    return to_fast(conditional_exact(prefix));
  }

 private:
  Vocabulary vocab_;
  std::size_t max_length_;
  std::map<Sequence, Rational> mass_;
  std::set<Sequence> seen_;
};

// ---------------------------------------------------------------------------
// Markov model

class MarkovModel final : public SequenceModel {
 public:
  MarkovModel(std::size_t order, std::map<Sequence, Distribution<Rational>> rows, Vocabulary vocab,
              std::size_t max_length)
      : order_(order), vocab_(std::move(vocab)), max_length_(max_length) {
    if (max_length_ == 0) throw InvalidModel("max_length must be positive");
    for (auto& [context, dist] : rows) {
      if (context.size() > order_) throw InvalidModel("row context longer than the chain order");
      if (dist.size() != vocab_.size()) throw InvalidModel("row size differs from vocabulary size");
      fast_.emplace(context, to_fast(dist));
    }
    rows_ = std::move(rows);
    check_reachable_rows();
  }

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t max_length() const override { return max_length_; }

  Distribution<Rational> conditional_exact(std::span<const Token> prefix) const override {
    return lookup(rows_, prefix);
  }
  Distribution<double> conditional(std::span<const Token> prefix) const override { return lookup(fast_, prefix); }

 private:
  template <class Map>
  const typename Map::mapped_type& lookup(const Map& rows, std::span<const Token> prefix) const {
    check_sequence(*this, prefix);
    if (is_complete(*this, prefix)) throw InvalidPrefix("prefix is already complete");
    auto tail = prefix.last(std::min(order_, prefix.size()));
    auto it = rows.find(Sequence(tail.begin(), tail.end()));
    if (it == rows.end()) throw InvalidModel("no transition row for context '" + vocab_.render(tail) + "'");
    return it->second;
  }

  // Breadth-first search over contexts; a context first reached at depth d is
  // queried only when d < max_length.
  void check_reachable_rows() const {
    std::map<Sequence, std::size_t> depth{{Sequence{}, 0}};
    std::deque<Sequence> queue{Sequence{}};
    while (!queue.empty()) {
      Sequence context = queue.front();
      queue.pop_front();
      const std::size_t d = depth[context];
      if (d >= max_length_) continue;
      auto it = rows_.find(context);
      if (it == rows_.end()) {
        throw InvalidModel("no transition row for reachable context '" + vocab_.render(context) + "'");
      }
      for (std::size_t v = 0; v < vocab_.size(); ++v) {
        if (it->second[v] == 0) continue;
        if (vocab_.eos() && static_cast<Token>(v) == *vocab_.eos()) continue;
        Sequence next = context;
        next.push_back(static_cast<Token>(v));
        if (next.size() > order_) next.erase(next.begin());
        if (depth.emplace(next, d + 1).second) queue.push_back(std::move(next));
      }
    }
  }

  std::size_t order_;
  Vocabulary vocab_;
  std::size_t max_length_;
  std::map<Sequence, Distribution<Rational>> rows_;
  std::map<Sequence, Distribution<double>> fast_;
};

// ---------------------------------------------------------------------------
// Synthetic language model

class SyntheticLM final : public SequenceModel {
 public:
  explicit SyntheticLM(const SyntheticOptions& options)
      : options_(options), vocab_(options.vocabulary ? *options.vocabulary : make_vocab(options)) {
    if (vocab_.size() < 2) throw InvalidModel("synthetic model needs at least two symbols");
    if (options_.max_length == 0) throw InvalidModel("max_length must be positive");
    if (!(options_.peakedness >= 0) || !std::isfinite(options_.peakedness)) {
      throw InvalidModel("peakedness must be finite and non-negative");
    }
  }

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t max_length() const override { return options_.max_length; }

  Distribution<Rational> conditional_exact(std::span<const Token> prefix) const override {
    auto [weights, total] = weights_for(prefix);
    std::vector<Rational> probs;
    probs.reserve(weights.size());
    for (auto w : weights) probs.emplace_back(static_cast<long>(w), static_cast<long>(total));
    return Distribution<Rational>(std::move(probs));
  }

  Distribution<double> conditional(std::span<const Token> prefix) const override {
    auto [weights, total] = weights_for(prefix);
    std::vector<double> probs;
    probs.reserve(weights.size());
    for (auto w : weights) probs.push_back(static_cast<double>(w) / static_cast<double>(total));
    return Distribution<double>(std::move(probs));
  }

 private:
  static constexpr double kResolution = 16777216.0;  // 2^24

  static Vocabulary make_vocab(const SyntheticOptions& options) {
    if (options.vocab_size < 2) throw InvalidModel("synthetic model needs at least two symbols");
    std::vector<std::string> symbols;
    const std::size_t words = options.with_eos ? options.vocab_size - 1 : options.vocab_size;
    for (std::size_t i = 0; i < words; ++i) symbols.push_back("w" + std::to_string(i));
    std::optional<Token> eos;
    if (options.with_eos) {
      eos = static_cast<Token>(symbols.size());
      symbols.push_back("</s>");
    }
    return Vocabulary(std::move(symbols), eos);
  }

  std::pair<std::vector<std::int64_t>, std::int64_t> weights_for(std::span<const Token> prefix) const {
    check_sequence(*this, prefix);
    if (is_complete(*this, prefix)) throw InvalidPrefix("prefix is already complete");
    std::uint64_t key = hash_tokens(options_.seed, prefix);
    const std::size_t n = vocab_.size();
    std::vector<double> scores(n);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t argmax = 0;
    for (std::size_t v = 0; v < n; ++v) {
      double u = open_unit(mix64(key ^ mix64(v + 1)));
      scores[v] = options_.peakedness * -std::log(-std::log(u));
      if (scores[v] > best) {
        best = scores[v];
        argmax = v;
      }
    }
    double sum = 0.0;
    for (auto& s : scores) {
      s = std::exp(s - best);
      sum += s;
    }
    std::vector<std::int64_t> weights(n);
    std::int64_t total = 0;
    for (std::size_t v = 0; v < n; ++v) {
      weights[v] = std::llround(scores[v] / sum * kResolution);
      total += weights[v];
    }
    if (weights[argmax] == 0) {
      weights[argmax] = 1;
      total += 1;
    }
    return {std::move(weights), total};
  }

  SyntheticOptions options_;
  Vocabulary vocab_;
};

}  // namespace

ModelPtr make_tabular_model(Vocabulary vocab, std::size_t max_length, std::vector<TableEntry> table) {
  return std::make_shared<TabularModel>(std::move(vocab), max_length, std::move(table));
}

ModelPtr make_markov_model(std::size_t order, std::map<Sequence, Distribution<Rational>> rows, Vocabulary vocab,
                           std::size_t max_length) {
  return std::make_shared<MarkovModel>(order, std::move(rows), std::move(vocab), max_length);
}

ModelPtr make_synthetic_lm(const SyntheticOptions& options) { return std::make_shared<SyntheticLM>(options); }

}  // namespace arith
