#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "arith/cli.hpp"
#include "arith/rational.hpp"

namespace fs = std::filesystem;
using arith::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("arith_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    write("bernoulli.json", R"({"type": "markov", "vocabulary": ["A", "B"], "eos": null, "max_length": 2,
                               "order": 0, "rows": [{"context": [], "probs": ["0.6", "0.4"]}]})");
    write("coin.json", R"({"type": "markov", "vocabulary": ["A", "B"], "eos": null, "max_length": 1,
                           "order": 0, "rows": [{"context": [], "probs": ["0.6", "0.4"]}]})");
    write("det.json", R"({"type": "tabular", "vocabulary": ["x", "y", "z", "</s>"], "eos": 3, "max_length": 4,
                          "table": [{"sequence": ["x", "y", "z", "</s>"], "probability": "1"}]})");
    write("peaked.json", R"({"type": "synthetic", "seed": 3, "vocab_size": 6, "max_length": 6,
                             "peakedness": 2.5})");
    write("big.json", R"({"type": "synthetic", "seed": 1, "vocab_size": 10, "max_length": 8,
                          "peakedness": 0.1, "with_eos": false})");
    write("tampered.json", R"({"type": "tabular", "vocabulary": ["A", "B"], "eos": null, "max_length": 2,
                               "table": [{"sequence": ["A", "A"], "probability": "0.36"},
                                         {"sequence": ["A", "B"], "probability": "0.24"},
                                         {"sequence": ["B", "A"], "probability": "0.24"},
                                         {"sequence": ["B", "B"], "probability": "0.06"}]})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return path(name);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SampleDeterministicModel) {
  auto r = cli({"sample", "--model", path("det.json"), "--n", "3", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"index", "code", "sequence", "logprob"}));
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(rows[i][2], "x y z </s>");
    EXPECT_EQ(rows[i][3], "0");
  }
}

TEST_F(CliTest, SampleBernoulliWithShift) {
  auto r = cli({"sample", "--model", path("bernoulli.json"), "--n", "2", "--shift", "0.1", "--lattice-mode", "paper"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# method=arithmetic lattice_mode=paper shift_b=0.1", 0), 0u) << r.out;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][2], "A B");
  EXPECT_EQ(rows[2][2], "B A");
  EXPECT_NEAR(std::stod(rows[1][1]), 13.0 / 30.0, 1e-15);
  EXPECT_NEAR(std::stod(rows[2][1]), 23.0 / 30.0, 1e-15);
  EXPECT_NEAR(std::stod(rows[1][3]), std::log(0.24), 1e-12);
}

TEST_F(CliTest, SampleRowsAreSortedByCode) {
  auto r = cli({"sample", "--model", path("peaked.json"), "--n", "9", "--shift", "0.75"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i - 1][1]), std::stod(rows[i][1]));
}

TEST_F(CliTest, SampleIsDeterministic) {
  for (const char* method : {"arithmetic", "ancestral"}) {
    std::vector<std::string> base{"sample", "--model", path("peaked.json"), "--n", "50", "--seed", "42",
                                  "--method", method, "--temperature", "0.8", "--top-k", "4"};
    auto a = cli(base);
    auto b = cli(base);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    for (const char* workers : {"2", "8"}) {
      auto w = base;
      w.insert(w.end(), {"--workers", workers});
      EXPECT_EQ(cli(w).out, a.out) << method << " workers=" << workers;
    }
    auto other = base;
    other[6] = "43";
    EXPECT_NE(cli(other).out, a.out);
  }
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  auto explicit_seed = cli({"sample", "--model", path("peaked.json"), "--n", "5", "--seed", "77"});
  ::setenv("ARITH_DECODE_SEED", "77", 1);
  auto from_env = cli({"sample", "--model", path("peaked.json"), "--n", "5"});
  ::setenv("ARITH_DECODE_SEED", "not-a-number", 1);
  auto bad_env = cli({"sample", "--model", path("peaked.json"), "--n", "5"});
  ::unsetenv("ARITH_DECODE_SEED");
  EXPECT_EQ(from_env.out, explicit_seed.out);
  EXPECT_EQ(bad_env.code, 1);
}

TEST_F(CliTest, OutWritesFile) {
  auto r = cli({"sample", "--model", path("bernoulli.json"), "--n", "2", "--out", path("out.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path("out.csv"));
  std::stringstream contents;
  contents << f.rdbuf();
  EXPECT_EQ(csv_rows(contents.str()).size(), 3u);

  auto failed = cli({"sample", "--model", path("missing.json"), "--out", path("never.csv")});
  EXPECT_EQ(failed.code, 1);
  EXPECT_FALSE(fs::exists(path("never.csv")));
}

TEST_F(CliTest, UsageAndInputErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"sample"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--method", "beam"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--n", "0"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--n", "-3"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--lattice-mode", "sobol"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--temperature", "0"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--nucleus-p", "1.5"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--workers", "0"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--shift", "1.2"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("det.json"), "--bogus"}).code, 1);
  EXPECT_EQ(cli({"sample", "--model", path("missing.json")}).code, 1);
  write("broken.json", "{\"type\": ");
  auto broken = cli({"sample", "--model", path("broken.json")});
  EXPECT_EQ(broken.code, 1);
  EXPECT_FALSE(broken.err.empty());
  EXPECT_EQ(cli({"sample", "--model", path("tampered.json")}).code, 1);
  EXPECT_EQ(cli({"sample", "--help"}).code, 0);
}

TEST_F(CliTest, DiversityDeterministicModel) {
  const auto refs = write("refs.txt", "x y z\n");
  auto r = cli({"diversity", "--model", path("det.json"), "--references", refs, "--n", "4", "--max-n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"method", "temperature", "n", "mean_reward", "min_reward",
                                               "max_reward", "ngram_diversity"}));
  EXPECT_EQ(rows[1][3], rows[1][5]);
  EXPECT_EQ(rows[1][3], "1");
  EXPECT_DOUBLE_EQ(std::stod(rows[1][6]), 1.0 / 4.0);
}

TEST_F(CliTest, DiversitySweepMaxIsAtLeastMean) {
  const auto refs = write("refs.txt", "w0 w1 w2\nw3 w3\nw1\n");
  const auto ctx = write("ctx.txt", "\nw2\nw0 w0\n");
  for (const char* method : {"arithmetic", "ancestral"}) {
    auto r = cli({"diversity", "--model", path("peaked.json"), "--references", refs, "--contexts", ctx, "--method",
                  method, "--temperature", "0.5,1,2", "--n", "2,8", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 7u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_EQ(rows[i][0], method);
      EXPECT_GE(std::stod(rows[i][5]), std::stod(rows[i][3]));
      EXPECT_LE(std::stod(rows[i][4]), std::stod(rows[i][3]));
    }
  }
}

TEST_F(CliTest, DiversityInputErrors) {
  const auto refs = write("refs.txt", "w0\nw1\n");
  const auto ctx = write("ctx.txt", "w0\n");
  EXPECT_EQ(cli({"diversity", "--model", path("peaked.json"), "--references", refs, "--contexts", ctx}).code, 1);
  EXPECT_EQ(cli({"diversity", "--model", path("peaked.json")}).code, 1);
  const auto unknown = write("unknown.txt", "w0 banana\n");
  EXPECT_EQ(cli({"diversity", "--model", path("peaked.json"), "--references", unknown}).code, 1);
}

TEST_F(CliTest, VarianceDeterministicModel) {
  for (const char* method : {"arithmetic", "ancestral"}) {
    auto r = cli({"variance", "--model", path("det.json"), "--method", method, "--n", "1,4,16", "--reps", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"method", "n", "mean", "sd", "p2_5", "p97_5"}));
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][3], "0");
  }
}

TEST_F(CliTest, VarianceAncestralMatchesBinomial) {
  auto r = cli({"variance", "--model", path("coin.json"), "--method", "ancestral", "--n", "100", "--reps", "200",
                "--seed", "8", "--reward-prefix", "A"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  const double binomial = std::sqrt(0.6 * 0.4 / 100.0);
  EXPECT_NEAR(std::stod(rows[1][3]), binomial, 0.15 * binomial);
}

TEST_F(CliTest, VarianceArithmeticNoWorseOnPeakedModel) {
  const auto refs = write("refs.txt", "w1 w0 w2\n");
  for (const char* reward : {"prefix", "bleu"}) {
    std::vector<std::string> base{"variance", "--model", path("peaked.json"), "--n", "4,16,32", "--reps", "100",
                                  "--reward", reward, "--references", refs, "--seed", "5", "--reward-prefix", "</s>"};
    auto arith = base;
    arith.insert(arith.end(), {"--method", "arithmetic"});
    auto anc = base;
    anc.insert(anc.end(), {"--method", "ancestral"});
    auto a = cli(arith), b = cli(anc);
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    auto ra = csv_rows(a.out), rb = csv_rows(b.out);
    for (std::size_t i = 1; i < ra.size(); ++i) {
      EXPECT_LE(std::stod(ra[i][3]), std::stod(rb[i][3])) << reward << " n=" << ra[i][1];
    }
  }
  EXPECT_EQ(cli({"variance", "--model", path("peaked.json"), "--reward", "rouge"}).code, 1);
  EXPECT_EQ(cli({"variance", "--model", path("peaked.json"), "--reps", "1"}).code, 1);
}

TEST_F(CliTest, StepFunctions) {
  const auto functions = write("fns.txt", "0 0.5 1\n0.5 1 0\n\n0 1 3\n");
  auto r = cli({"stepfn", "--stepfn", functions, "--n", "2,3", "--reps", "500", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"function", "n_points", "lattice_var", "mc_var", "exact_integral"}));
  EXPECT_EQ(rows[1][2], "0");
  EXPECT_EQ(rows[1][4], "0.5");
  EXPECT_LT(std::stod(rows[2][2]), std::stod(rows[2][3]));
  for (std::size_t i : {3u, 4u}) {
    EXPECT_EQ(rows[i][2], "0");
    EXPECT_EQ(rows[i][3], "0");
    EXPECT_EQ(rows[i][4], "3");
  }
  EXPECT_EQ(cli({"stepfn"}).code, 1);
  const auto bad = write("bad.txt", "0 0.5 1\n");
  EXPECT_EQ(cli({"stepfn", "--stepfn", bad}).code, 1);
}

TEST_F(CliTest, CovarianceConstants) {
  auto r = cli({"stepfn", "--covariance", "--n", "4,10", "--reps", "100000"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "c_on_hat", "c_off_hat", "c_on", "c_off"}));
  EXPECT_NEAR(std::stod(rows[1][1]), -0.75, 0.02);
  EXPECT_NEAR(std::stod(rows[1][2]), 0.25, 0.02);
  EXPECT_NEAR(std::stod(rows[2][1]), -0.9, 0.02);
  EXPECT_NEAR(std::stod(rows[2][2]), 0.1, 0.02);
}

TEST_F(CliTest, OracleCheck) {
  auto r = cli({"oracle-check", "--model", path("bernoulli.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"property", "pass", "worst_deviation"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][1], "pass") << rows[i][0];

  auto modified = cli({"oracle-check", "--model", path("peaked.json"), "--temperature", "0.7", "--top-k", "3"});
  EXPECT_EQ(modified.code, 0) << modified.out;

  auto big = cli({"oracle-check", "--model", path("big.json")});
  EXPECT_EQ(big.code, 1);
  EXPECT_NE(big.err.find("more than"), std::string::npos) << big.err;

  auto tampered = cli({"oracle-check", "--model", path("tampered.json")});
  EXPECT_EQ(tampered.code, 2);
  auto trows = csv_rows(tampered.out);
  ASSERT_EQ(trows.size(), 2u);
  EXPECT_EQ(trows[1][0], "model_valid");
  EXPECT_EQ(trows[1][1], "fail");
}
