#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "varfn/basis.hpp"
#include "varfn/model.hpp"

namespace varfn::io {

/// Shortest round-trip decimal representation ('.' separator, locale free).
std::string format_double(double x);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Writes to a temporary file next to path and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// {"dims": [...], "representation": "dense" | "rank1", "data": [...]}; for
/// rank1, data is the list of factor vectors.
nlohmann::json to_json(const CoeffTensor& t);
CoeffTensor coeff_tensor_from_json(const nlohmann::json& j);

/// {"type": "<variant>", ...payload}; see README for the per-variant keys.
/// Unknown keys are rejected with std::invalid_argument.
nlohmann::json to_json(const model::ModelClass& cls);
model::ModelClass model_class_from_json(const nlohmann::json& j);

/// Throws std::invalid_argument naming the first key of j not in allowed.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace varfn::io
