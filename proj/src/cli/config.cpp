#include <cmath>

#include "fiberalign/cli.hpp"
#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"

namespace fiberalign::cli {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError("config: " + what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void RunConfig::validate() const {
  require(dim >= 1, "dim must be >= 1");
  require(finite_nonneg(epsilon), "epsilon must be finite and >= 0");
  require(finite_nonneg(eta), "eta must be finite and >= 0");
  require(finite_nonneg(lambda), "lambda must be finite and >= 0");
  require(std::isfinite(gamma), "gamma must be finite");
  require(parse_specificity_mode(specificity_mode).has_value(),
          "specificity_mode must be 'literal' or 'hinge'");
  require(finite_nonneg(hinge_margin), "hinge_margin must be finite and >= 0");
  require(vocab_size >= 2, "vocab_size must be >= 2");
  require(degree_bound >= 1, "degree_bound must be >= 1");
  require(engine == "grid" || engine == "brute", "engine must be 'grid' or 'brute'");
  require(mode == "gaussian" || mode == "planted", "mode must be 'gaussian' or 'planted'");
  require(n >= 1, "n must be >= 1");
  require(std::isfinite(var_f) && var_f > 0.0, "var_f must be positive");
  require(std::isfinite(var_g) && var_g > 0.0, "var_g must be positive");
  require(finite_nonneg(separation), "separation must be finite and >= 0");
  require(finite_nonneg(noise_sd), "noise_sd must be finite and >= 0");
  for (double e : eps_grid) require(std::isfinite(e) && e > 0.0, "eps_grid entries must be > 0");
  for (double s : sep2_grid) require(finite_nonneg(s), "sep2_grid entries must be >= 0");
  require(std::isfinite(sep_epsilon) && sep_epsilon > 0.0, "sep_epsilon must be > 0");
  require(n_samples >= 1, "n_samples must be >= 1");
  require(steps >= 1, "steps must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be > 0");
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
#define FIBERALIGN_FIELD(name) \
  if (key == #name) {          \
    value.get_to(cfg.name);    \
    continue;                  \
  }
      FIBERALIGN_FIELD(seed)
      FIBERALIGN_FIELD(dim)
      FIBERALIGN_FIELD(epsilon)
      FIBERALIGN_FIELD(eta)
      FIBERALIGN_FIELD(lambda)
      FIBERALIGN_FIELD(gamma)
      FIBERALIGN_FIELD(specificity_mode)
      FIBERALIGN_FIELD(hinge_margin)
      FIBERALIGN_FIELD(vocab_size)
      FIBERALIGN_FIELD(degree_bound)
      FIBERALIGN_FIELD(engine)
      FIBERALIGN_FIELD(workers)
      FIBERALIGN_FIELD(mode)
      FIBERALIGN_FIELD(n)
      FIBERALIGN_FIELD(var_f)
      FIBERALIGN_FIELD(var_g)
      FIBERALIGN_FIELD(separation)
      FIBERALIGN_FIELD(noise_sd)
      FIBERALIGN_FIELD(ds)
      FIBERALIGN_FIELD(di)
      FIBERALIGN_FIELD(dt)
      FIBERALIGN_FIELD(eps_grid)
      FIBERALIGN_FIELD(sep2_grid)
      FIBERALIGN_FIELD(sep_epsilon)
      FIBERALIGN_FIELD(n_samples)
      FIBERALIGN_FIELD(trials)
      FIBERALIGN_FIELD(steps)
      FIBERALIGN_FIELD(learning_rate)
      FIBERALIGN_FIELD(pair_by_line)
#undef FIBERALIGN_FIELD
      if (key == "paths") {
        if (!value.is_object()) throw DomainError("config: paths must be an object");
        for (const auto& [pk, pv] : value.items()) {
          if (pk == "out") pv.get_to(cfg.paths.out);
          else if (pk == "corpus") pv.get_to(cfg.paths.corpus);
          else if (pk == "patches") pv.get_to(cfg.paths.patches);
          else if (pk == "tokens") pv.get_to(cfg.paths.tokens);
          else if (pk == "decomposition") pv.get_to(cfg.paths.decomposition);
          else throw DomainError("config: unknown path key '" + pk + "'");
        }
        continue;
      }
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("config: field '" + key + "': " + e.what());
    }
    throw DomainError("config: unknown field '" + key + "'");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"dim", c.dim},
          {"epsilon", c.epsilon},
          {"eta", c.eta},
          {"lambda", c.lambda},
          {"gamma", c.gamma},
          {"specificity_mode", c.specificity_mode},
          {"hinge_margin", c.hinge_margin},
          {"vocab_size", c.vocab_size},
          {"degree_bound", c.degree_bound},
          {"engine", c.engine},
          {"mode", c.mode},
          {"n", c.n},
          {"var_f", c.var_f},
          {"var_g", c.var_g},
          {"separation", c.separation},
          {"noise_sd", c.noise_sd},
          {"ds", c.ds},
          {"di", c.di},
          {"dt", c.dt},
          {"eps_grid", c.eps_grid},
          {"sep2_grid", c.sep2_grid},
          {"sep_epsilon", c.sep_epsilon},
          {"n_samples", c.n_samples},
          {"trials", c.trials},
          {"steps", c.steps},
          {"learning_rate", c.learning_rate},
          {"pair_by_line", c.pair_by_line},
          {"paths",
           {{"out", c.paths.out},
            {"corpus", c.paths.corpus},
            {"patches", c.paths.patches},
            {"tokens", c.paths.tokens},
            {"decomposition", c.paths.decomposition}}}};
}

}  // namespace fiberalign::cli
