#pragma once

#include <filesystem>
#include <string>

#include "arith/models.hpp"

namespace arith {

/// Builds a model from its JSON definition:
///
///   {"type": "tabular" | "markov" | "synthetic",
///    "vocabulary": ["A", "B", ...], "eos": index or null, "max_length": L,
///    ...type-specific payload...}
///
/// tabular:   "table": [{"sequence": ["A", "B"], "probability": "0.24"}, ...]
/// markov:    "order": k, "rows": [{"context": ["A"], "probs": ["0.6", "0.4"]}, ...]
/// synthetic: "seed": s, "peakedness": x; without "vocabulary" it takes
///            "vocab_size" and "with_eos" instead.
///
/// Probabilities are decimal (or "p/q") strings; JSON numbers are accepted
/// and read as the shortest decimal that round-trips. Malformed JSON raises
/// InputError, semantic problems raise InvalidModel.
ModelPtr parse_model(const std::string& json_text);
ModelPtr load_model(const std::filesystem::path& path);

}  // namespace arith
