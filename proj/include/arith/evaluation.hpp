#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "arith/codebook.hpp"
#include "arith/models.hpp"
#include "arith/sampler.hpp"

namespace arith {

using Reward = std::function<double(const Sequence&)>;

/// Mean reward over a sample set. The reward's return type sets the result
/// type, so exact rewards give exact means.
template <class Scalar, class RewardFn>
auto sample_mean(const SampleSet<Scalar>& samples, RewardFn&& reward) {
  if (samples.empty()) throw ParameterError("sample mean of an empty sample set");
  using R = std::decay_t<decltype(reward(samples.entries.front().sequence))>;
  R total = 0;
  for (const auto& e : samples.entries) total += reward(e.sequence);
  return R(total / static_cast<long>(samples.size()));
}

struct EstimatorReport {
  Method method;
  std::size_t n;
  std::size_t reps;
  double mean;
  double sd;
  double percentile_2_5;
  double percentile_97_5;
};

struct EstimatorOptions {
  LatticeMode mode = LatticeMode::paper;
  Sequence context;
  std::size_t workers = 1;
};

/// Repeats the sample-mean estimator `reps` times. Repetition r draws its
/// shift (arithmetic) or code stream (ancestral) from derive_seed(seed, r).
EstimatorReport estimator_sd(const SequenceModel& model, Method method, std::size_t n, const ModifierChain& chain,
                             const Reward& reward, std::size_t reps, std::uint64_t seed,
                             const EstimatorOptions& options = {});

struct Summary {
  double mean;
  double sd;  // sample standard deviation (n - 1)
  double percentile_2_5;
  double percentile_97_5;
};

Summary summarize(std::vector<double> values);

// Linear interpolation between order statistics, q in [0,1].
double percentile(std::vector<double> sorted_values, double q);

/// Sum over n = 1..max_n of unique n-grams / total n-grams across all
/// sequences. EOS tokens are dropped before counting.
double ngram_diversity(std::span<const Sequence> sequences, std::size_t max_n = 4,
                       std::optional<Token> eos = std::nullopt);

/// Add-one smoothed sentence BLEU with brevity penalty exp(min(0, 1 - r/h)).
double sentence_bleu(std::span<const Token> hypothesis, std::span<const Token> reference, std::size_t max_n = 4);

template <class Scalar>
struct StepPiece {
  UnitInterval<Scalar> interval;
  Scalar coefficient;
};

/// Piecewise-constant function on [0,1): ordered, contiguous pieces.
template <class Scalar>
class StepFunction {
 public:
  explicit StepFunction(std::vector<StepPiece<Scalar>> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ParameterError("step function has no pieces");
    if (pieces_.front().interval.lo != 0 || pieces_.back().interval.hi != 1) {
      throw ParameterError("step function pieces must cover [0,1)");
    }
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      if (pieces_[i - 1].interval.hi != pieces_[i].interval.lo) {
        throw ParameterError("step function pieces must be ordered and contiguous");
      }
    }
  }

  const std::vector<StepPiece<Scalar>>& pieces() const { return pieces_; }

  Scalar operator()(const Scalar& c) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), c,
                               [](const Scalar& x, const StepPiece<Scalar>& p) { return x < p.interval.lo; });
    if (it == pieces_.begin()) throw ContractViolation("step function evaluated outside [0,1)");
    return std::prev(it)->coefficient;
  }

  Scalar integral() const {
    Scalar total = 0;
    for (const auto& p : pieces_) total += p.interval.width() * p.coefficient;
    return total;
  }

 private:
  std::vector<StepPiece<Scalar>> pieces_;
};

template <class Scalar>
Scalar eval_step_function(const StepFunction<Scalar>& f, const Scalar& c) {
  return f(c);
}

/// Reads functions from "lo hi coefficient" lines; blank lines separate
/// functions, '#' starts a comment.
std::vector<StepFunction<Rational>> parse_step_functions(std::istream& in);

struct StepVarianceResult {
  double lattice_var;
  double mc_var;
  double exact_integral;
};

/// Variance of the shifted-lattice estimator over `reps` random shifts next
/// to the variance of plain Monte Carlo with the same number of points.
/// Lattice estimates are formed in the function's scalar, so with rationals a
/// zero-variance configuration reports exactly 0.
template <class Scalar>
StepVarianceResult step_variance_experiment(const StepFunction<Scalar>& f, std::size_t n_points, LatticeMode mode,
                                            std::size_t reps, std::uint64_t seed);

struct CovarianceConstants {
  double on;
  double off;
};

/// Monte Carlo estimate over uniform shifts u of the pairwise covariance sums
/// for the n+1 points u + i/n (i = 0..n): indicator [0,1/n) against itself
/// (`on`) and against [1/n,2/n) (`off`).
CovarianceConstants covariance_constants(std::size_t n, std::size_t reps, std::uint64_t seed = 0);

// Closed forms 1/n - 1 and 1/n.
CovarianceConstants analytic_covariance_constants(std::size_t n);

// off * 1 1^T + (on - off) I.
Eigen::MatrixXd covariance_matrix(std::size_t n, const CovarianceConstants& constants);

}  // namespace arith
