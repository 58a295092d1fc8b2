#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "arith/codebook.hpp"
#include "arith/models.hpp"
#include "arith/sampler.hpp"

namespace arith::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kPropertyFailure = 2,
};

struct RunConfig {
  std::string command;
  std::string model_path;
  Method method = Method::arithmetic;
  std::vector<std::size_t> n{8};
  std::optional<LatticeMode> lattice_mode;  // paper for sampling, uniform for step functions
  std::vector<double> temperatures{1.0};
  std::optional<std::size_t> top_k;
  std::optional<double> nucleus_p;
  std::uint64_t seed = 0;
  std::optional<std::string> shift;  // overrides the seed-derived shift
  std::size_t reps = 100;
  std::size_t workers = 1;
  std::string out_path;
  std::string references_path;
  std::string contexts_path;
  std::string stepfn_path;
  bool covariance = false;
  std::string reward = "prefix";  // prefix | bleu
  std::string reward_prefix;      // defaults to the first vocabulary symbol
  std::size_t max_n = 4;
};

// Temperature first, then top-k, then nucleus.
ModifierChain chain_for(const RunConfig& config, double temperature);

// Each command writes its CSV to `out`. Errors surface as arith::Error.
void cmd_sample(const RunConfig& config, std::ostream& out);
void cmd_diversity(const RunConfig& config, std::ostream& out);
void cmd_variance(const RunConfig& config, std::ostream& out);
void cmd_stepfn(const RunConfig& config, std::ostream& out);
// Returns kSuccess when every property passes, kPropertyFailure otherwise.
int cmd_oracle_check(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line entry point (args excludes the program name). Handles
/// flag parsing, ARITH_DECODE_SEED, --out redirection and exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arith::cli
