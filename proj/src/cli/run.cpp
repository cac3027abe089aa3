#include <fstream>
#include <functional>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "fiberalign/cli.hpp"
#include "fiberalign/errors.hpp"

namespace fiberalign::cli {

namespace {

// Flag values are parsed into holders and applied on top of the config file
// afterwards, but only for flags that actually appeared.
class FlagBinder {
 public:
  template <class T, class Set>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& desc, Set set) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *holder, desc);
    apply_.push_back([opt, holder, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *holder);
    });
    return opt;
  }

  template <class T>
  CLI::Option* field(CLI::App* app, const std::string& name, T RunConfig::*member,
                     const std::string& desc) {
    return add<T>(app, name, desc, [member](RunConfig& c, const T& v) { c.*member = v; });
  }

  CLI::Option* path(CLI::App* app, const std::string& name, std::string Paths::*member,
                    const std::string& desc) {
    return add<std::string>(app, name, desc,
                            [member](RunConfig& c, const std::string& v) { c.paths.*member = v; });
  }

  void flag(CLI::App* app, const std::string& name, bool RunConfig::*member,
            const std::string& desc) {
    CLI::Option* opt = app->add_flag(name, desc);
    apply_.push_back([opt, member](RunConfig& c) {
      if (opt->count() > 0) c.*member = true;
    });
  }

  void apply(RunConfig& cfg) const {
    for (const auto& fn : apply_) fn(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path, 0, "config file is not valid JSON");
  RunConfig cfg;
  apply_config_json(cfg, j);
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fiberalign: approximate fiber products and subspace decompositions"};
  app.require_subcommand(1);
  FlagBinder b;

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");
  b.field(&app, "--seed", &RunConfig::seed, "root random seed");
  b.path(&app, "--out", &Paths::out, "output directory");
  b.field(&app, "--engine", &RunConfig::engine, "join engine")
      ->check(CLI::IsMember({"brute", "grid"}));
  b.field(&app, "--eps", &RunConfig::epsilon, "join tolerance epsilon");
  b.field(&app, "--eta", &RunConfig::eta, "noise radius eta");

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic embedded corpus");
  b.field(gen, "--mode", &RunConfig::mode, "gaussian or planted")
      ->check(CLI::IsMember({"gaussian", "planted"}));
  b.field(gen, "--dim", &RunConfig::dim, "embedding dimension");
  b.field(gen, "--n", &RunConfig::n, "points per modality (pairs in planted mode)");
  b.field(gen, "--var-f", &RunConfig::var_f, "image variance");
  b.field(gen, "--var-g", &RunConfig::var_g, "text variance");
  b.field(gen, "--sep", &RunConfig::separation, "distance between the two means");
  b.field(gen, "--ds", &RunConfig::ds, "planted shared dimension");
  b.field(gen, "--di", &RunConfig::di, "planted image dimension");
  b.field(gen, "--dt", &RunConfig::dt, "planted text dimension");
  b.field(gen, "--noise", &RunConfig::noise_sd, "planted noise standard deviation");

  CLI::App* emb = app.add_subcommand("embed", "encode and embed patch and token files");
  b.path(emb, "--patches", &Paths::patches, "patch CSV, one patch per line");
  b.path(emb, "--tokens", &Paths::tokens, "token JSONL, {\"id\", \"tokens\"} per line");
  b.field(emb, "--vocab-size", &RunConfig::vocab_size, "token vocabulary size");
  b.field(emb, "--degree-bound", &RunConfig::degree_bound, "coefficients per polynomial");
  b.field(emb, "--dim", &RunConfig::dim, "embedding dimension");
  b.flag(emb, "--pair-by-line", &RunConfig::pair_by_line, "pair the k-th patch with the k-th token line");

  CLI::App* jn = app.add_subcommand("join", "epsilon-join of an embedded corpus");
  b.path(jn, "--corpus", &Paths::corpus, "embedded corpus CSV");

  CLI::App* sz = app.add_subcommand("size", "fiber product size under Gaussian models");
  b.field(sz, "--dim", &RunConfig::dim, "dimension");
  b.field(sz, "--var-f", &RunConfig::var_f, "image variance");
  b.field(sz, "--var-g", &RunConfig::var_g, "text variance");
  b.field(sz, "--sep", &RunConfig::separation, "distance between the means for the epsilon sweep");
  b.field(sz, "--eps-grid", &RunConfig::eps_grid, "epsilon values")->delimiter(',');
  b.field(sz, "--sep2-grid", &RunConfig::sep2_grid, "squared separations")->delimiter(',');
  b.field(sz, "--sep-eps", &RunConfig::sep_epsilon, "epsilon for the separation sweep");
  b.field(sz, "--n-samples", &RunConfig::n_samples, "Monte Carlo samples per estimate");
  b.field(sz, "--n", &RunConfig::n, "points per modality for the empirical counts");
  b.field(sz, "--workers", &RunConfig::workers, "worker threads (0 = hardware)");

  CLI::App* ver = app.add_subcommand("verify", "run the verification checks");
  b.path(ver, "--corpus", &Paths::corpus, "embedded corpus CSV (default: synthetic)");
  b.path(ver, "--decomposition", &Paths::decomposition, "decomposition CSV (default: random)");
  b.field(ver, "--trials", &RunConfig::trials, "randomized trials per check");
  b.field(ver, "--dim", &RunConfig::dim, "synthetic corpus dimension");
  b.field(ver, "--n", &RunConfig::n, "synthetic points per modality");

  CLI::App* dec = app.add_subcommand("decompose", "learn a shared/specific decomposition");
  b.path(dec, "--corpus", &Paths::corpus, "embedded corpus CSV with pairs");
  b.field(dec, "--ds", &RunConfig::ds, "shared dimension");
  b.field(dec, "--di", &RunConfig::di, "image-specific dimension");
  b.field(dec, "--dt", &RunConfig::dt, "text-specific dimension");
  b.field(dec, "--steps", &RunConfig::steps, "gradient steps");
  b.field(dec, "--lr", &RunConfig::learning_rate, "learning rate");
  b.field(dec, "--lambda", &RunConfig::lambda, "orthogonality weight");
  b.field(dec, "--gamma", &RunConfig::gamma, "specificity weight");
  b.field(dec, "--specificity-mode", &RunConfig::specificity_mode, "literal or hinge")
      ->check(CLI::IsMember({"literal", "hinge"}));
  b.field(dec, "--hinge-margin", &RunConfig::hinge_margin, "hinge margin");

  for (CLI::App* sub : {gen, emb, jn, sz, ver, dec}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    b.apply(cfg);
    cfg.validate();

    if (gen->parsed()) return cmd_gen(cfg, out, err);
    if (emb->parsed()) return cmd_embed(cfg, out, err);
    if (jn->parsed()) return cmd_join(cfg, out, err);
    if (sz->parsed()) return cmd_size(cfg, out, err);
    if (ver->parsed()) return cmd_verify(cfg, out, err);
    return cmd_decompose(cfg, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const OptimizationError& e) {
    err << "error: optimization diverged at " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace fiberalign::cli
