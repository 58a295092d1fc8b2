#include "arith/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace arith {

namespace {

using nlohmann::json;

Rational read_probability(const json& value) {
  if (value.is_string()) return parse_rational(value.get<std::string>());
  if (value.is_number()) return snap_to_decimal(value.get<double>());
  throw InvalidModel("probability must be a decimal string or number");
}

Sequence read_tokens(const json& value, const Vocabulary& vocab) {
  if (!value.is_array()) throw InvalidModel("token list must be an array of symbols");
  Sequence out;
  for (const auto& item : value) {
    auto t = vocab.index_of(item.get<std::string>());
    if (!t) throw InvalidModel("unknown symbol '" + item.get<std::string>() + "'");
    out.push_back(*t);
  }
  return out;
}

Vocabulary read_vocabulary(const json& doc) {
  std::optional<Token> eos;
  if (doc.contains("eos") && !doc.at("eos").is_null()) eos = doc.at("eos").get<Token>();
  return Vocabulary(doc.at("vocabulary").get<std::vector<std::string>>(), eos);
}

ModelPtr build(const json& doc) {
  const auto type = doc.at("type").get<std::string>();
  if (type == "synthetic") {
    SyntheticOptions options;
    options.seed = doc.value("seed", std::uint64_t{0});
    options.max_length = doc.at("max_length").get<std::size_t>();
    const auto& peak = doc.at("peakedness");
    options.peakedness = peak.is_string() ? std::stod(peak.get<std::string>()) : peak.get<double>();
    if (doc.contains("vocabulary")) {
      options.vocabulary = read_vocabulary(doc);
    } else {
      options.vocab_size = doc.at("vocab_size").get<std::size_t>();
      options.with_eos = doc.value("with_eos", true);
    }
    return make_synthetic_lm(options);
  }

  Vocabulary vocab = read_vocabulary(doc);
  const auto max_length = doc.at("max_length").get<std::size_t>();
  if (type == "tabular") {
    std::vector<TableEntry> table;
    for (const auto& row : doc.at("table")) {
      table.push_back({read_tokens(row.at("sequence"), vocab), read_probability(row.at("probability"))});
    }
    return make_tabular_model(std::move(vocab), max_length, std::move(table));
  }
  if (type == "markov") {
    std::map<Sequence, Distribution<Rational>> rows;
    for (const auto& row : doc.at("rows")) {
      std::vector<Rational> probs;
      for (const auto& p : row.at("probs")) probs.push_back(read_probability(p));
      try {
        rows.emplace(read_tokens(row.value("context", json::array()), vocab), Distribution<Rational>(std::move(probs)));
      } catch (const InvalidDistribution& e) {
        throw InvalidModel(std::string("markov row: ") + e.what());
      }
    }
    return make_markov_model(doc.at("order").get<std::size_t>(), std::move(rows), std::move(vocab), max_length);
  }
  throw InvalidModel("unknown model type '" + type + "'");
}

}  // namespace

ModelPtr parse_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    return build(doc);
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("model definition: ") + e.what());
  } catch (const InputError& e) {
    throw InvalidModel(std::string("model definition: ") + e.what());
  }
}

ModelPtr load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

}  // namespace arith
