#include "arith/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "arith/hashing.hpp"

namespace arith {

double percentile(std::vector<double> sorted_values, double q) {
  if (sorted_values.empty()) throw ParameterError("percentile of an empty list");
  std::sort(sorted_values.begin(), sorted_values.end());
  const double h = (static_cast<double>(sorted_values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  return sorted_values[lo] + (h - static_cast<double>(lo)) * (sorted_values[hi] - sorted_values[lo]);
}

Summary summarize(std::vector<double> values) {
  if (values.size() < 2) throw ParameterError("summary needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  std::sort(values.begin(), values.end());
  return {mean, sd, percentile(values, 0.025), percentile(values, 0.975)};
}

EstimatorReport estimator_sd(const SequenceModel& model, Method method, std::size_t n, const ModifierChain& chain,
                             const Reward& reward, std::size_t reps, std::uint64_t seed,
                             const EstimatorOptions& options) {
  if (reps < 2) throw ParameterError("estimator_sd needs reps >= 2");
  if (n == 0) throw ParameterError("estimator_sd needs n >= 1");
  DecodeOptions decode{options.workers, options.context};
  std::vector<double> estimates;
  estimates.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const std::uint64_t rep_seed = derive_seed(seed, r);
    if (method == Method::arithmetic) {
      LatticeSpec<double> spec(n, options.mode, FastCode(shift_from_seed(rep_seed)));
      estimates.push_back(sample_mean(arithmetic_sample<double>(model, spec, chain, decode), reward));
    } else {
      estimates.push_back(sample_mean(ancestral_sample(model, n, rep_seed, chain, decode), reward));
    }
  }
  auto s = summarize(std::move(estimates));
  return {method, n, reps, s.mean, s.sd, s.percentile_2_5, s.percentile_97_5};
}

namespace {

Sequence strip_eos(const Sequence& seq, std::optional<Token> eos) {
  if (!eos) return seq;
  Sequence out;
  for (Token t : seq) {
    if (t != *eos) out.push_back(t);
  }
  return out;
}

std::map<Sequence, std::size_t> ngram_counts(std::span<const Token> tokens, std::size_t n) {
  std::map<Sequence, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Sequence(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double ngram_diversity(std::span<const Sequence> sequences, std::size_t max_n, std::optional<Token> eos) {
  if (sequences.empty()) throw ParameterError("n-gram diversity of an empty sample set");
  std::vector<Sequence> stripped;
  stripped.reserve(sequences.size());
  for (const auto& s : sequences) stripped.push_back(strip_eos(s, eos));
  double total_diversity = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::set<Sequence> unique;
    std::size_t total = 0;
    for (const auto& s : stripped) {
      for (auto& [gram, count] : ngram_counts(s, n)) {
        unique.insert(gram);
        total += count;
      }
    }
    if (total > 0) total_diversity += static_cast<double>(unique.size()) / static_cast<double>(total);
  }
  return total_diversity;
}

double sentence_bleu(std::span<const Token> hypothesis, std::span<const Token> reference, std::size_t max_n) {
  if (reference.empty()) throw ParameterError("BLEU reference must be non-empty");
  if (max_n == 0) throw ParameterError("BLEU max_n must be positive");
  if (hypothesis.empty()) return 0.0;
  double log_precision = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    auto hyp = ngram_counts(hypothesis, n);
    auto ref = ngram_counts(reference, n);
    std::size_t matches = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : hyp) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    log_precision += std::log((static_cast<double>(matches) + 1.0) / (static_cast<double>(total) + 1.0));
  }
  const double ratio = static_cast<double>(reference.size()) / static_cast<double>(hypothesis.size());
  const double brevity = std::exp(std::min(0.0, 1.0 - ratio));
  return brevity * std::exp(log_precision / static_cast<double>(max_n));
}

std::vector<StepFunction<Rational>> parse_step_functions(std::istream& in) {
  std::vector<StepFunction<Rational>> out;
  std::vector<StepPiece<Rational>> pieces;
  auto flush = [&] {
    if (!pieces.empty()) out.emplace_back(std::move(pieces));
    pieces.clear();
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string lo, hi, coef, extra;
    if (!(fields >> lo)) {
      flush();
      continue;
    }
    if (!(fields >> hi >> coef) || (fields >> extra)) {
      throw InputError("step function line " + std::to_string(line_no) + ": expected 'lo hi coefficient'");
    }
    try {
      pieces.push_back({UnitInterval<Rational>(parse_rational(lo), parse_rational(hi)), parse_rational(coef)});
    } catch (const ContractViolation& e) {
      throw InputError("step function line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  flush();
  if (out.empty()) throw InputError("no step functions in input");
  return out;
}

namespace {

template <class Scalar>
Scalar scalar_from_unit(double u) {
  if constexpr (ScalarTraits<Scalar>::repr == Repr::exact) {
    return exact_from_double(u);
  } else {
    return u;
  }
}

template <class Scalar>
double to_plain(const Scalar& x) {
  if constexpr (ScalarTraits<Scalar>::repr == Repr::exact) {
    return to_double(x);
  } else {
    return x;
  }
}

template <class Scalar>
Scalar sample_variance(const std::vector<Scalar>& xs) {
  Scalar mean = 0;
  for (const auto& x : xs) mean += x;
  mean /= static_cast<long>(xs.size());
  Scalar ss = 0;
  for (const auto& x : xs) ss += (x - mean) * (x - mean);
  return Scalar(ss / static_cast<long>(xs.size() - 1));
}

}  // namespace

template <class Scalar>
StepVarianceResult step_variance_experiment(const StepFunction<Scalar>& f, std::size_t n_points, LatticeMode mode,
                                            std::size_t reps, std::uint64_t seed) {
  if (n_points == 0) throw ParameterError("step experiment needs at least one point");
  if (reps < 2) throw ParameterError("step experiment needs reps >= 2");
  std::mt19937_64 rng(seed);

  std::vector<Scalar> lattice;
  lattice.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    LatticeSpec<Scalar> spec(n_points, mode, CodePoint<Scalar>(scalar_from_unit<Scalar>(uniform01(rng))));
    Scalar sum = 0;
    for (const auto& c : lattice_codes(spec)) sum += f(c.value());
    lattice.push_back(Scalar(sum / static_cast<long>(n_points)));
  }

  std::vector<double> naive;
  naive.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) sum += to_plain(f(scalar_from_unit<Scalar>(uniform01(rng))));
    naive.push_back(sum / static_cast<double>(n_points));
  }

  return {to_plain(sample_variance(lattice)), sample_variance(naive), to_plain(f.integral())};
}

template StepVarianceResult step_variance_experiment(const StepFunction<double>&, std::size_t, LatticeMode,
                                                     std::size_t, std::uint64_t);
template StepVarianceResult step_variance_experiment(const StepFunction<Rational>&, std::size_t, LatticeMode,
                                                     std::size_t, std::uint64_t);

CovarianceConstants covariance_constants(std::size_t n, std::size_t reps, std::uint64_t seed) {
  if (n < 3) throw ParameterError("covariance constants need n >= 3");
  if (reps == 0) throw ParameterError("covariance constants need reps >= 1");
  std::mt19937_64 rng(seed);
  const double mu = 1.0 / static_cast<double>(n);
  double on_total = 0.0;
  double off_total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double u = uniform01(rng);
    double sum_a = 0.0, sum_b = 0.0, sum_aa = 0.0, sum_ab = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      // Index n wraps onto index 0; use it directly so both land in one bucket.
      const std::size_t k = i % n;
      double c = u + static_cast<double>(k) / static_cast<double>(n);
      if (c >= 1.0) c -= 1.0;
      const double a = (c < mu ? 1.0 : 0.0) - mu;
      const double b = (c >= mu && c < 2.0 * mu ? 1.0 : 0.0) - mu;
      sum_a += a;
      sum_b += b;
      sum_aa += a * a;
      sum_ab += a * b;
    }
    on_total += sum_a * sum_a - sum_aa;
    off_total += sum_a * sum_b - sum_ab;
  }
  return {on_total / static_cast<double>(reps), off_total / static_cast<double>(reps)};
}

CovarianceConstants analytic_covariance_constants(std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  return {inv - 1.0, inv};
}

Eigen::MatrixXd covariance_matrix(std::size_t n, const CovarianceConstants& constants) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(size, size, constants.off);
  c.diagonal().setConstant(constants.on);
  return c;
}

}  // namespace arith
