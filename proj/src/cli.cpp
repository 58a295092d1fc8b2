#include "arith/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "arith/csv.hpp"
#include "arith/evaluation.hpp"
#include "arith/hashing.hpp"
#include "arith/model_io.hpp"
#include "arith/oracle.hpp"

namespace arith::cli {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(item, &used));
      } else {
        if (item.find('-') != std::string::npos) throw std::invalid_argument("negative");
        out.push_back(static_cast<T>(std::stoull(item, &used)));
      }
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ParameterError(std::string("bad value '") + item + "' in --" + what);
    }
  }
  if (out.empty()) throw ParameterError(std::string("--") + what + " needs at least one value");
  return out;
}

struct Example {
  Sequence context;
  Sequence reference;
};

// Pairs every reference with its context (the empty context without --contexts).
std::vector<Example> load_examples(const RunConfig& config, const Vocabulary& vocab) {
  if (config.references_path.empty()) throw InputError("--references is required");
  auto refs = read_lines(config.references_path);
  if (refs.empty()) throw InputError("reference file is empty");
  std::vector<std::string> contexts(refs.size());
  if (!config.contexts_path.empty()) {
    contexts = read_lines(config.contexts_path);
    if (contexts.size() != refs.size()) {
      throw InputError("reference count (" + std::to_string(refs.size()) + ") does not match context count (" +
                       std::to_string(contexts.size()) + ")");
    }
  }
  std::vector<Example> out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    Example ex{vocab.parse(contexts[i]), vocab.parse(refs[i])};
    if (ex.reference.empty()) throw InputError("empty reference on line " + std::to_string(i + 1));
    out.push_back(std::move(ex));
  }
  return out;
}

// Continuation after the context with EOS removed.
Sequence continuation(const Sequence& seq, std::size_t context_size, std::optional<Token> eos) {
  Sequence out;
  for (std::size_t i = context_size; i < seq.size(); ++i) {
    if (!eos || seq[i] != *eos) out.push_back(seq[i]);
  }
  return out;
}

double single_temperature(const RunConfig& config) {
  if (config.temperatures.size() != 1) throw ParameterError("this command takes a single --temperature");
  return config.temperatures.front();
}

std::size_t single_n(const RunConfig& config) {
  if (config.n.size() != 1) throw ParameterError("this command takes a single --n");
  return config.n.front();
}

double resolve_shift(const RunConfig& config, std::uint64_t seed) {
  if (!config.shift) return shift_from_seed(seed);
  const double b = to_double(parse_rational(*config.shift));
  if (!(b >= 0 && b < 1)) throw ParameterError("--shift must lie in [0,1)");
  return b;
}

std::string lattice_comment(const RunConfig& config, LatticeMode mode, double shift, const ModifierChain& chain) {
  return "method=" + to_string(config.method) + " lattice_mode=" + to_string(mode) +
         " shift_b=" + format_double(shift) + " seed=" + std::to_string(config.seed) +
         " modifiers=" + describe(chain);
}

}  // namespace

ModifierChain chain_for(const RunConfig& config, double temperature) {
  ModifierChain chain;
  if (temperature != 1.0) chain.push_back(Temperature{temperature});
  if (config.top_k) chain.push_back(TopK{*config.top_k});
  if (config.nucleus_p) chain.push_back(Nucleus{*config.nucleus_p});
  validate(chain);
  return chain;
}

void cmd_sample(const RunConfig& config, std::ostream& out) {
  auto model = load_model(config.model_path);
  const auto chain = chain_for(config, single_temperature(config));
  const std::size_t n = single_n(config);
  if (n == 0) throw ParameterError("--n must be at least 1");
  DecodeOptions options{config.workers, {}};
  const auto& vocab = model->vocabulary();

  SampleSet<double> samples;
  std::vector<std::size_t> order;
  if (config.method == Method::arithmetic) {
    const LatticeMode mode = config.lattice_mode.value_or(LatticeMode::paper);
    const double shift = resolve_shift(config, config.seed);
    samples = arithmetic_sample<double>(*model, LatticeSpec<double>(n, mode, FastCode(shift)), chain, options);
    order = samples.code_order();
    write_csv_comment(out, lattice_comment(config, mode, shift, chain));
  } else {
    samples = ancestral_sample(*model, n, config.seed, chain, options);
    order.resize(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    write_csv_comment(out, "method=ancestral seed=" + std::to_string(config.seed) + " modifiers=" + describe(chain));
  }
  write_csv_row(out, {"index", "code", "sequence", "logprob"});
  for (std::size_t i : order) {
    const auto& e = samples.entries[i];
    write_csv_row(out, {std::to_string(i), e.code ? format_double(e.code->value()) : std::string(),
                        vocab.render(e.sequence), format_double(e.logprob)});
  }
}

void cmd_diversity(const RunConfig& config, std::ostream& out) {
  auto model = load_model(config.model_path);
  const auto& vocab = model->vocabulary();
  const auto examples = load_examples(config, vocab);
  const LatticeMode mode = config.lattice_mode.value_or(LatticeMode::paper);

  write_csv_comment(out, "method=" + to_string(config.method) + " lattice_mode=" + to_string(mode) +
                             " seed=" + std::to_string(config.seed) + " contexts=" + std::to_string(examples.size()));
  write_csv_row(out, {"method", "temperature", "n", "mean_reward", "min_reward", "max_reward", "ngram_diversity"});
  for (double temperature : config.temperatures) {
    const auto chain = chain_for(config, temperature);
    for (std::size_t n : config.n) {
      if (n == 0) throw ParameterError("--n must be at least 1");
      double mean_sum = 0.0, min_sum = 0.0, max_sum = 0.0, div_sum = 0.0;
      for (std::size_t k = 0; k < examples.size(); ++k) {
        const auto& ex = examples[k];
        const std::uint64_t seed = derive_seed(config.seed, k);
        DecodeOptions options{config.workers, ex.context};
        SampleSet<double> samples =
            config.method == Method::arithmetic
                ? arithmetic_sample<double>(*model, LatticeSpec<double>(n, mode, FastCode(resolve_shift(config, seed))),
                                            chain, options)
                : ancestral_sample(*model, n, seed, chain, options);
        std::vector<Sequence> continuations;
        std::vector<double> rewards;
        for (const auto& e : samples.entries) {
          continuations.push_back(continuation(e.sequence, ex.context.size(), vocab.eos()));
          rewards.push_back(sentence_bleu(continuations.back(), ex.reference, config.max_n));
        }
        double total = 0.0;
        for (double r : rewards) total += r;
        mean_sum += total / static_cast<double>(rewards.size());
        min_sum += *std::min_element(rewards.begin(), rewards.end());
        max_sum += *std::max_element(rewards.begin(), rewards.end());
        div_sum += ngram_diversity(continuations, config.max_n);
      }
      const double count = static_cast<double>(examples.size());
      write_csv_row(out, {to_string(config.method), format_double(temperature), std::to_string(n),
                          format_double(mean_sum / count), format_double(min_sum / count),
                          format_double(max_sum / count), format_double(div_sum / count)});
    }
  }
}

void cmd_variance(const RunConfig& config, std::ostream& out) {
  auto model = load_model(config.model_path);
  const auto& vocab = model->vocabulary();
  const auto chain = chain_for(config, single_temperature(config));
  if (config.reps < 2) throw ParameterError("--reps must be at least 2 for variance");

  Sequence context;
  Reward reward;
  std::string reward_desc;
  if (config.reward == "bleu") {
    auto examples = load_examples(config, vocab);
    context = examples.front().context;
    Sequence reference = examples.front().reference;
    const std::size_t skip = context.size();
    const auto eos = vocab.eos();
    const std::size_t max_n = config.max_n;
    reward = [=](const Sequence& s) { return sentence_bleu(continuation(s, skip, eos), reference, max_n); };
    reward_desc = "bleu";
  } else if (config.reward == "prefix") {
    Sequence prefix = config.reward_prefix.empty() ? Sequence{0} : vocab.parse(config.reward_prefix);
    reward = [=](const Sequence& s) {
      return s.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), s.begin()) ? 1.0 : 0.0;
    };
    reward_desc = "prefix:" + vocab.render(prefix);
  } else {
    throw ParameterError("unknown --reward '" + config.reward + "'");
  }

  EstimatorOptions options{config.lattice_mode.value_or(LatticeMode::paper), context, config.workers};
  write_csv_comment(out, "reward=" + reward_desc + " lattice_mode=" + to_string(options.mode) +
                             " reps=" + std::to_string(config.reps) + " seed=" + std::to_string(config.seed) +
                             " modifiers=" + describe(chain));
  write_csv_row(out, {"method", "n", "mean", "sd", "p2_5", "p97_5"});
  for (std::size_t n : config.n) {
    if (n == 0) throw ParameterError("--n must be at least 1");
    auto report = estimator_sd(*model, config.method, n, chain, reward, config.reps, config.seed, options);
    write_csv_row(out, {to_string(report.method), std::to_string(n), format_double(report.mean),
                        format_double(report.sd), format_double(report.percentile_2_5),
                        format_double(report.percentile_97_5)});
  }
}

void cmd_stepfn(const RunConfig& config, std::ostream& out) {
  if (config.covariance) {
    write_csv_comment(out, "reps=" + std::to_string(config.reps) + " seed=" + std::to_string(config.seed));
    write_csv_row(out, {"n", "c_on_hat", "c_off_hat", "c_on", "c_off"});
    for (std::size_t n : config.n) {
      auto estimate = covariance_constants(n, config.reps, config.seed);
      auto exact = analytic_covariance_constants(n);
      write_csv_row(out, {std::to_string(n), format_double(estimate.on), format_double(estimate.off),
                          format_double(exact.on), format_double(exact.off)});
    }
    return;
  }
  if (config.stepfn_path.empty()) throw InputError("--stepfn is required unless --covariance is given");
  std::ifstream in(config.stepfn_path);
  if (!in) throw InputError("cannot open '" + config.stepfn_path + "'");
  const auto functions = parse_step_functions(in);
  const LatticeMode mode = config.lattice_mode.value_or(LatticeMode::uniform);
  if (config.reps < 2) throw ParameterError("--reps must be at least 2");

  write_csv_comment(out, "lattice_mode=" + to_string(mode) + " reps=" + std::to_string(config.reps) +
                             " seed=" + std::to_string(config.seed));
  write_csv_row(out, {"function", "n_points", "lattice_var", "mc_var", "exact_integral"});
  for (std::size_t f = 0; f < functions.size(); ++f) {
    for (std::size_t n : config.n) {
      auto result = step_variance_experiment(functions[f], n, mode, config.reps, derive_seed(config.seed, f));
      write_csv_row(out, {std::to_string(f), std::to_string(n), format_double(result.lattice_var),
                          format_double(result.mc_var), format_double(result.exact_integral)});
    }
  }
}

namespace {

struct PropertyRow {
  std::string name;
  std::string status;  // pass | fail | skip
  double deviation;
};

std::vector<Rational> oracle_codes(const ExactCodebook& codebook, std::uint64_t seed) {
  constexpr std::size_t kTotal = 1000;
  const Rational epsilon(Integer(1), Integer(1) << 80);
  std::vector<Rational> codes;
  for (const auto& e : codebook.entries()) {
    if (codes.size() + 3 > kTotal / 2) break;
    if (e.interval.lo == 0) continue;
    codes.push_back(e.interval.lo);
    codes.push_back(e.interval.lo - epsilon);
    codes.push_back(e.interval.lo + epsilon);
  }
  const std::size_t lattice_n = kTotal - codes.size();
  LatticeSpec<Rational> spec(lattice_n, LatticeMode::uniform, ExactCode(exact_from_double(shift_from_seed(seed))));
  for (const auto& c : lattice_codes(spec)) codes.push_back(c.value());
  return codes;
}

std::vector<PropertyRow> check_properties(const SequenceModel& model, const ModifierChain& chain, std::uint64_t seed) {
  std::vector<PropertyRow> rows;
  auto verdict = [&](std::string name, double deviation, bool ok) {
    rows.push_back({std::move(name), ok ? "pass" : "fail", deviation});
  };

  const auto joint = enumerate_joint(model, chain);
  Rational total = 0;
  for (const auto& e : joint.entries) total += e.probability;
  verdict("joint_normalized", to_double(abs_value(Rational(total - 1))), total == 1);

  const auto codebook = exact_codebook(joint);

  double worst_interval = 0.0;
  double worst_logprob = 0.0;
  for (const auto& e : codebook.entries()) {
    auto interval = code_interval_of_sequence(model, e.sequence, chain);
    worst_interval = std::max(worst_interval, to_double(abs_value(Rational(interval.lo - e.interval.lo))) +
                                                  to_double(abs_value(Rational(interval.hi - e.interval.hi))));
    const double logprob = sequence_logprob(model, e.sequence, chain);
    worst_logprob = std::max(worst_logprob, std::abs(logprob - std::log(to_double(e.interval.width()))));
  }
  verdict("codebook_matches_sequence_intervals", worst_interval, worst_interval == 0.0);
  verdict("logprob_matches_interval_width", worst_logprob, worst_logprob <= 1e-9);

  std::size_t mismatches = 0;
  for (const auto& c : oracle_codes(codebook, seed)) {
    if (decode_code(model, ExactCode(c), chain) != brute_force_decode(c, codebook)) ++mismatches;
  }
  verdict("exact_decode_matches_brute_force", static_cast<double>(mismatches), mismatches == 0);

  std::size_t roundtrip_failures = 0;
  for (const auto& e : codebook.entries()) {
    const Rational mid = (e.interval.lo + e.interval.hi) / 2;
    if (decode_code(model, ExactCode(mid), chain) != e.sequence) ++roundtrip_failures;
  }
  verdict("midpoint_roundtrip", static_cast<double>(roundtrip_failures), roundtrip_failures == 0);

  // Fast decoding may disagree within 2^-40 of an interval boundary.
  const Rational guard(Integer(1), Integer(1) << 40);
  std::size_t fast_mismatches = 0;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < 1000; ++i) {
    const double c = uniform01(rng);
    const Rational exact = exact_from_double(c);
    const auto it = std::partition_point(codebook.entries().begin(), codebook.entries().end(),
                                         [&](const CodebookEntry& e) { return e.interval.hi <= exact; });
    if (exact - it->interval.lo < guard || it->interval.hi - exact < guard) continue;
    if (decode_code(model, FastCode(c), chain) != it->sequence) ++fast_mismatches;
  }
  verdict("fast_decode_matches_brute_force", static_cast<double>(fast_mismatches), fast_mismatches == 0);

  // Full-period shift average, when the refining grid is small enough.
  constexpr std::size_t kLatticeSize = 3;
  const Integer k = refining_period(codebook);
  if (k * (kLatticeSize + 1) * kLatticeSize * codebook.size() > 2'000'000) {
    rows.push_back({"full_period_unbiasedness", "skip", 0.0});
  } else {
    const Token first = codebook.entries().front().sequence.front();
    ExactReward reward = [first](const Sequence& s) {
      return Rational(s.front() == first ? 1 : 0) + Rational(static_cast<long>(s.size()), 7);
    };
    const Rational average = full_period_average(model, kLatticeSize, LatticeMode::paper, reward, k, chain);
    const Rational expected = exact_expectation(joint, reward);
    verdict("full_period_unbiasedness", to_double(abs_value(Rational(average - expected))), average == expected);
  }
  return rows;
}

}  // namespace

int cmd_oracle_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto chain = chain_for(config, single_temperature(config));
  ModelPtr model;
  std::vector<PropertyRow> rows;
  try {
    model = load_model(config.model_path);
  } catch (const InvalidModel& e) {
    err << "invalid model: " << e.what() << '\n';
    rows.push_back({"model_valid", "fail", 1.0});
  }
  if (model) {
    rows.push_back({"model_valid", "pass", 0.0});
    auto checked = check_properties(*model, chain, config.seed);
    rows.insert(rows.end(), checked.begin(), checked.end());
  }
  write_csv_row(out, {"property", "pass", "worst_deviation"});
  bool ok = true;
  for (const auto& row : rows) {
    write_csv_row(out, {row.name, row.status, format_double(row.deviation)});
    ok = ok && row.status != "fail";
  }
  return ok ? kSuccess : kPropertyFailure;
}

namespace {

void add_common(CLI::App* sub, RunConfig& config, std::string& n_text, std::string& temperature_text,
                std::string& mode_text, std::string& method_text) {
  sub->add_option("--model", config.model_path, "Model definition (JSON)");
  sub->add_option("--method", method_text, "arithmetic | ancestral");
  sub->add_option("--n", n_text, "Sample count, or comma list for sweeps");
  sub->add_option("--lattice-mode", mode_text, "paper | uniform");
  sub->add_option("--temperature", temperature_text, "Temperature, or comma list for sweeps");
  sub->add_option("--top-k", config.top_k, "Keep the k most probable tokens");
  sub->add_option("--nucleus-p", config.nucleus_p, "Nucleus mass in (0,1]");
  sub->add_option("--seed", config.seed, "Seed (falls back to ARITH_DECODE_SEED)");
  sub->add_option("--shift", config.shift, "Explicit lattice shift b in [0,1)");
  sub->add_option("--reps", config.reps, "Repetitions");
  sub->add_option("--workers", config.workers, "Decode threads");
  sub->add_option("--out", config.out_path, "Output CSV path (default stdout)");
  sub->add_option("--references", config.references_path, "One tokenized reference per line");
  sub->add_option("--contexts", config.contexts_path, "One tokenized context prefix per line");
  sub->add_option("--reward", config.reward, "prefix | bleu");
  sub->add_option("--reward-prefix", config.reward_prefix, "Tokens the prefix reward looks for");
  sub->add_option("--max-n", config.max_n, "Largest n-gram order");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arithmetic sampling experiments"};
  app.require_subcommand(1);
  RunConfig config;
  std::string n_text = "8", temperature_text = "1", mode_text, method_text = "arithmetic";
  if (const char* env = std::getenv("ARITH_DECODE_SEED")) {
    try {
      config.seed = std::stoull(env);
    } catch (const std::logic_error&) {
      err << "ARITH_DECODE_SEED is not an unsigned integer\n";
      return kInputError;
    }
  }

  struct Command {
    const char* name;
    const char* help;
    bool needs_model;
  };
  const Command commands[] = {
      {"sample", "Decode a sample set", true},
      {"diversity", "Reward and n-gram diversity sweep over temperatures and sizes", true},
      {"variance", "Estimator spread across repeated runs", true},
      {"stepfn", "Step-function variance and lattice covariance constants", false},
      {"oracle-check", "Compare the sampler with brute-force enumeration", true},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, config, n_text, temperature_text, mode_text, method_text);
    if (std::string(c.name) == "stepfn") {
      sub->add_option("--stepfn", config.stepfn_path, "Step functions, 'lo hi coefficient' per line");
      sub->add_flag("--covariance", config.covariance, "Emit covariance constants instead");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kInputError;
  }

  const auto* chosen = app.get_subcommands().front();
  config.command = chosen->get_name();
  try {
    config.n = parse_list<std::size_t>(n_text, "n");
    config.temperatures = parse_list<double>(temperature_text, "temperature");
    config.method = parse_method(method_text);
    if (!mode_text.empty()) config.lattice_mode = parse_lattice_mode(mode_text);
    if (config.workers == 0) throw ParameterError("--workers must be at least 1");
    for (const auto& c : commands) {
      if (config.command == c.name && c.needs_model && config.model_path.empty()) {
        throw ParameterError("--model is required");
      }
    }
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    std::ostringstream buffer;
    int status = kSuccess;
    if (config.command == "sample") {
      cmd_sample(config, buffer);
    } else if (config.command == "diversity") {
      cmd_diversity(config, buffer);
    } else if (config.command == "variance") {
      cmd_variance(config, buffer);
    } else if (config.command == "stepfn") {
      cmd_stepfn(config, buffer);
    } else {
      status = cmd_oracle_check(config, buffer, err);
    }
    if (config.out_path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(config.out_path);
      if (!(file << buffer.str())) throw InputError("cannot write '" + config.out_path + "'");
    }
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace arith::cli
