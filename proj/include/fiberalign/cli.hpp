#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fiberalign::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailed = 1,
  kUsageError = 2,
  kIoError = 3,
};

struct Paths {
  std::string out = "out";
  std::string corpus;         // embedded corpus CSV (join, verify, decompose)
  std::string patches;        // patch CSV (embed)
  std::string tokens;         // token JSONL (embed)
  std::string decomposition;  // decomposition CSV (verify)
};

// Every run-level parameter. Field names double as config-file keys.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t dim = 4;
  double epsilon = 0.5;
  double eta = 0.1;
  double lambda = 1.0;
  double gamma = 0.1;
  std::string specificity_mode = "literal";
  double hinge_margin = 1.0;
  std::int64_t vocab_size = 50000;
  std::size_t degree_bound = 16;
  std::string engine = "grid";
  std::size_t workers = 0;

  // gen / size
  std::string mode = "gaussian";
  std::size_t n = 500;
  double var_f = 1.0;
  double var_g = 1.0;
  double separation = 0.0;  // ||mu_f - mu_g||, along the first axis
  double noise_sd = 1e-3;
  std::size_t ds = 0;  // 0 = not given
  std::size_t di = 0;
  std::size_t dt = 0;

  // size
  std::vector<double> eps_grid = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> sep2_grid = {0.0, 1.0, 2.0, 4.0};
  double sep_epsilon = 0.1;
  std::size_t n_samples = 200000;

  // verify
  std::size_t trials = 100;

  // decompose
  std::size_t steps = 2000;
  double learning_rate = 1e-3;

  bool pair_by_line = false;
  Paths paths;

  // Throws DomainError on non-finite or out-of-range fields.
  void validate() const;
};

// Overlays the keys present in `j` onto `cfg`; unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

// Subcommands. Each writes its files into cfg.paths.out, a short summary to
// `out` and notices to `err`, and returns an exit code. Errors propagate as
// exceptions; run() maps them to exit codes.
int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_embed(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_join(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_size(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_decompose(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line: parsing, config precedence (flags > --config file >
// defaults), dispatch, and the mapping of errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fiberalign::cli
