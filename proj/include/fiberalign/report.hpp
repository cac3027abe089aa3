#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace fiberalign {

// Outcome of one verification check, serialized as
// {check, passed, trials, theorem_backed, details[]}.
struct CheckReport {
  std::string check;
  bool passed = true;
  std::size_t trials = 0;
  // Diagnostics (claims we only probe) set this to false; their outcome
  // never fails a verification run.
  bool theorem_backed = true;
  nlohmann::json details = nlohmann::json::array();

  nlohmann::json to_json() const;
  static CheckReport from_json(const nlohmann::json& j);
};

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace fiberalign
