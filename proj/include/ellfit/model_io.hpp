#pragma once

// JSON form of an ellipsoid model:
//   {"q": [10], "center": [3], "semiaxes": [3, descending], "rotation": [9, row-major]}
// `rotation` maps scene coordinates into the ellipsoid-aligned frame.

#include "ellfit/quadric.hpp"

#include <json.hpp>

#include <filesystem>

namespace ellfit {

nlohmann::json model_to_json(const EllipsoidModel& m);

/// Rebuilds the model from `q`; the other fields are informational.
/// Throws Error(ParseError) on a malformed document.
EllipsoidModel model_from_json(const nlohmann::json& doc);

void save_model(const EllipsoidModel& m, const std::filesystem::path& path);
EllipsoidModel load_model(const std::filesystem::path& path);

/// Reads a whole JSON file; Error(IoError) / Error(ParseError).
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace ellfit
