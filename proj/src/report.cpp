#include "fiberalign/report.hpp"

#include <fstream>

#include "fiberalign/errors.hpp"

namespace fiberalign {

nlohmann::json CheckReport::to_json() const {
  return {{"check", check},
          {"passed", passed},
          {"trials", trials},
          {"theorem_backed", theorem_backed},
          {"details", details}};
}

CheckReport CheckReport::from_json(const nlohmann::json& j) {
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  r.passed = j.at("passed").get<bool>();
  r.trials = j.at("trials").get<std::size_t>();
  r.theorem_backed = j.value("theorem_backed", true);
  r.details = j.at("details");
  if (!r.details.is_array()) throw DomainError("report details must be an array");
  return r;
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace fiberalign
