#pragma once

#include <json.hpp>
#include <string>

#include "qident/estimate.hpp"
#include "qident/qmatrix.hpp"
#include "qident/rlcm.hpp"
#include "qident/witness.hpp"

namespace qident {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "qident/1";
inline constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// One row per line (';' also ends a row), entries 0/1 split by commas or
// whitespace, '#' starts a comment.
QMatrix parse_qmatrix(const std::string& text);
QMatrix read_qmatrix(const std::string& path);

// Per-subject CSV (J columns, optional header) or a "pattern,count" table
// whose pattern strings list item 1 first.
Dataset parse_dataset(const std::string& text);
Dataset read_dataset(const std::string& path);
std::string dataset_to_csv(const Dataset& d);

// {"model": ..., "s": [...], "g": [...]} or {"model": "gdina", "theta": [[...]]},
// plus "p" either inline or from p_json.
Model model_from_json(const Json& j, const QMatrix& q);
Json model_to_json(const Model& m);

Json to_json(const IdentifiabilityVerdict& v);
Json to_json(const FitResult& f);
Json to_json(const WitnessPair& w);
Json to_json(const SearchReport& r);
Json to_json(const MseReport& r);
Json q_to_json(const QMatrix& q);

// sorted keys, two-space indent, trailing newline
std::string dump(const Json& j);

}  // namespace qident
