#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fiberalign/cli.hpp"
#include "fiberalign/csv.hpp"
#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/fiber.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.paths.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

const std::string& require_path(const std::string& p, const char* what) {
  if (p.empty()) throw DomainError(std::string("missing input: ") + what);
  if (!fs::exists(p)) throw IoError(std::string(what) + " '" + p + "' does not exist");
  return p;
}

// A corpus that parses but is inconsistent (ragged rows, duplicate ids) is
// still bad input, so it exits like a parse error.
EmbeddedCorpus load_input_corpus(const std::string& path) {
  require_path(path, "corpus");
  try {
    return load_corpus(path);
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid corpus: ") + e.what());
  }
}

JoinEngine engine_of(const RunConfig& cfg) {
  return cfg.engine == "brute" ? JoinEngine::brute : JoinEngine::grid;
}

LossWeights weights_of(const RunConfig& cfg) {
  LossWeights w{cfg.lambda, cfg.gamma, *parse_specificity_mode(cfg.specificity_mode),
                cfg.hinge_margin};
  w.validate();
  return w;
}

// All-or-nothing: a partial plan is a usage error.
std::optional<DimensionPlan> plan_of(const RunConfig& cfg) {
  const int given = (cfg.ds > 0) + (cfg.di > 0) + (cfg.dt > 0);
  if (given == 0) return std::nullopt;
  if (given != 3) throw DomainError("--ds, --di and --dt must be given together");
  return DimensionPlan{cfg.ds, cfg.di, cfg.dt};
}

// The run's configuration as echoed into reports. The output directory is
// left out so identical runs into different directories match byte for byte.
json report_config(const RunConfig& cfg) {
  json j = to_json(cfg);
  j["paths"].erase("out");
  return j;
}

json plan_json(const DimensionPlan& p) { return {{"ds", p.ds}, {"di", p.di}, {"dt", p.dt}}; }

json loss_json(const LossBreakdown& l) {
  return {{"L_align", l.align}, {"L_orth", l.orth}, {"L_specificity", l.specificity},
          {"total", l.total}};
}

GaussianSpec spec_at(std::size_t dim, double variance, double sep) {
  GaussianSpec s = GaussianSpec::centered(dim, variance);
  s.mean(0) = sep;
  return s;
}

EmbeddedCorpus synthetic_corpus(const RunConfig& cfg, const RandomStream& root) {
  return sample_gaussian_corpus(GaussianSpec::centered(cfg.dim, cfg.var_f),
                                spec_at(cfg.dim, cfg.var_g, cfg.separation), cfg.n, cfg.n,
                                root.substream("gen").key());
}

// ---------------------------------------------------------------------------
// embed input files

struct RawPatch {
  std::size_t line;
  std::vector<std::int64_t> pixels;
};

std::vector<RawPatch> read_patches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patch file '" + path + "'");
  std::vector<RawPatch> out;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (line.empty() || line == "\r") continue;
    RawPatch p{ln, {}};
    for (std::string_view field : split_csv(line)) {
      auto v = parse_int(field);
      if (!v) throw ParseError(path, ln, "not an integer: '" + std::string(field) + "'");
      p.pixels.push_back(*v);
    }
    out.push_back(std::move(p));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return out;
}

struct RawTokens {
  std::size_t line;
  std::string id;
  std::vector<std::int64_t> tokens;
};

std::vector<RawTokens> read_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open token file '" + path + "'");
  std::vector<RawTokens> out;
  std::string line;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path, ln, "invalid JSON");
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("tokens") ||
        !j["tokens"].is_array()) {
      throw ParseError(path, ln, "expected {\"id\": string, \"tokens\": [int, ...]}");
    }
    RawTokens t{ln, j["id"].get<std::string>(), {}};
    if (t.id.empty()) throw ParseError(path, ln, "empty id");
    for (const auto& tok : j["tokens"]) {
      if (!tok.is_number_integer()) throw ParseError(path, ln, "token is not an integer");
      t.tokens.push_back(tok.get<std::int64_t>());
    }
    out.push_back(std::move(t));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------
// verify helpers

CheckReport convergence_check(const PointSet& x, const PointSet& y, JoinEngine engine) {
  CheckReport r;
  r.check = "convergence";
  r.trials = 2;

  std::size_t coincident = 0;
  for (Eigen::Index i = 0; i < x.coords.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.coords.cols(); ++j) {
      if (x.coords.col(i) == y.coords.col(j)) ++coincident;
    }
  }
  const std::size_t at_zero = empirical_size(x, y, JoinConfig{0.0}, engine);
  r.details.push_back({{"epsilon", 0.0}, {"count", at_zero}, {"expected", coincident}});

  const double diam = cross_diameter(x, y);
  const std::size_t at_diam = empirical_size(x, y, JoinConfig{diam}, engine);
  const std::size_t all = x.size() * y.size();
  r.details.push_back({{"epsilon", diam}, {"count", at_diam}, {"expected", all}});

  r.passed = at_zero == coincident && at_diam == all;
  return r;
}

CheckReport failed_report(std::string name, const std::string& reason) {
  CheckReport r;
  r.check = std::move(name);
  r.passed = false;
  r.details.push_back({{"error", reason}});
  return r;
}

template <class Fn>
CheckReport guarded(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    return failed_report(name, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const RandomStream root(cfg.seed);
  const fs::path dir = output_dir(cfg);

  if (cfg.mode == "gaussian") {
    EmbeddedCorpus corpus = synthetic_corpus(cfg, root);
    save_corpus(corpus, dir / "corpus.csv");
    out << "gen: " << corpus.points().size() << " points (dim " << corpus.dim() << ") -> "
        << (dir / "corpus.csv").string() << "\n";
    return kSuccess;
  }

  const auto plan = plan_of(cfg);
  if (!plan) throw DomainError("planted mode needs --ds, --di and --dt");
  plan->validate(plan->sum());
  PlantedOptions opts;
  opts.n_pairs = cfg.n;
  opts.noise_sd = cfg.noise_sd;
  const PlantedModel model = make_planted_model(*plan, opts, root.substream("gen").key());
  save_corpus(model.corpus, dir / "corpus.csv");
  save_decomposition(model.truth, dir / "planted_decomposition.csv");
  out << "gen: planted plan (" << plan->ds << "," << plan->di << "," << plan->dt << "), "
      << model.corpus.pairs().size() << " pairs -> " << dir.string() << "\n";
  return kSuccess;
}

int cmd_embed(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.paths.patches.empty() && cfg.paths.tokens.empty()) {
    throw DomainError("embed needs --patches and/or --tokens");
  }
  const RandomStream root(cfg.seed);
  EmbeddedCorpus corpus(cfg.dim);

  std::vector<std::string> image_ids;
  if (!cfg.paths.patches.empty()) {
    const std::string& path = require_path(cfg.paths.patches, "patch file");
    const auto patches = read_patches(path);
    const EmbeddingMap map = EmbeddingMap::build(root.substream("embed-image").key(),
                                                 cfg.degree_bound, cfg.dim, kPixelModulus);
    for (std::size_t k = 0; k < patches.size(); ++k) {
      try {
        const RingPoly p = encode_patch(patches[k].pixels, cfg.degree_bound);
        image_ids.push_back(make_id("i", k, patches.size()));
        corpus.add_point(image_ids.back(), Modality::image, map(p));
      } catch (const DomainError& e) {
        throw ParseError(path, patches[k].line, e.what());
      }
    }
  }

  std::vector<std::string> text_ids;
  if (!cfg.paths.tokens.empty()) {
    const std::string& path = require_path(cfg.paths.tokens, "token file");
    const auto lines = read_tokens(path);
    const EmbeddingMap map =
        EmbeddingMap::build(root.substream("embed-text").key(), cfg.degree_bound, cfg.dim,
                            static_cast<RingPoly::Coeff>(cfg.vocab_size));
    for (const RawTokens& t : lines) {
      try {
        if (t.tokens.size() > cfg.degree_bound) {
          throw DomainError(std::to_string(t.tokens.size()) + " tokens exceed degree bound " +
                            std::to_string(cfg.degree_bound));
        }
        corpus.add_point(t.id, Modality::text, map(encode_tokens(t.tokens, cfg.vocab_size)));
        text_ids.push_back(t.id);
      } catch (const DomainError& e) {
        throw ParseError(path, t.line, e.what());
      }
    }
  }

  if (cfg.pair_by_line) {
    if (image_ids.size() != text_ids.size()) {
      throw DomainError("--pair-by-line needs equal patch and token counts (" +
                        std::to_string(image_ids.size()) + " vs " +
                        std::to_string(text_ids.size()) + ")");
    }
    for (std::size_t k = 0; k < image_ids.size(); ++k) corpus.add_pair(image_ids[k], text_ids[k]);
  }

  const fs::path dir = output_dir(cfg);
  save_corpus(corpus, dir / "corpus.csv");
  out << "embed: " << image_ids.size() << " images, " << text_ids.size() << " texts -> "
      << (dir / "corpus.csv").string() << "\n";
  return kSuccess;
}

int cmd_join(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const EmbeddedCorpus corpus = load_input_corpus(cfg.paths.corpus);
  const JoinConfig jc{cfg.epsilon};
  jc.validate();
  const JoinResult r =
      join(corpus.points_of(Modality::image), corpus.points_of(Modality::text), jc,
           engine_of(cfg));

  const fs::path dir = output_dir(cfg);
  std::ostringstream csv;
  write_join_csv(r, csv);
  write_text_file(dir / "join.csv", csv.str());
  write_json_file({{"count", r.size()},
                   {"epsilon", r.epsilon},
                   {"engine", cfg.engine},
                   {"engine_used", to_string(r.engine)},
                   {"distance_evals", r.distance_evals}},
                  dir / "join_summary.json");
  out << "join: " << r.size() << " pairs at epsilon " << format_double(r.epsilon) << "\n";
  return kSuccess;
}

int cmd_size(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RandomStream root(cfg.seed);
  std::vector<double> grid = cfg.eps_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw DomainError("epsilon grid is empty");

  const GaussianSpec f = GaussianSpec::centered(cfg.dim, cfg.var_f);
  const GaussianSpec g = spec_at(cfg.dim, cfg.var_g, cfg.separation);

  const EmbeddedCorpus sample = sample_gaussian_corpus(f, g, cfg.n, cfg.n,
                                                       root.substream("size-corpus").key());
  const PointSet xs = sample.points_of(Modality::image);
  const PointSet ys = sample.points_of(Modality::text);
  const auto mc = estimate_size_mc(f, g, grid, cfg.n_samples, root.substream("mc").key(),
                                   cfg.workers);

  json rows = json::array();
  std::ostringstream curve;
  curve << "epsilon,empirical_count,empirical_fraction,mc_estimate,mc_std_error,closed_form\n";
  std::vector<double> log_eps, log_p;
  const double n_pairs = static_cast<double>(xs.size() * ys.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::size_t count = empirical_size(xs, ys, JoinConfig{grid[k]}, engine_of(cfg));
    const double closed = closed_form_gaussian_size(f, g, grid[k]);
    rows.push_back({{"epsilon", grid[k]},
                    {"empirical_count", count},
                    {"empirical_fraction", static_cast<double>(count) / n_pairs},
                    {"mc_estimate", mc[k].value},
                    {"mc_std_error", mc[k].std_error},
                    {"closed_form", closed}});
    curve << format_double(grid[k]) << ',' << count << ','
          << format_double(static_cast<double>(count) / n_pairs) << ','
          << format_double(mc[k].value) << ',' << format_double(mc[k].std_error) << ','
          << format_double(closed) << '\n';
    if (mc[k].value > 0.0) {
      log_eps.push_back(std::log(grid[k]));
      log_p.push_back(std::log(mc[k].value));
    }
  }

  json report = {{"command", "size"},
                 {"config", report_config(cfg)},
                 {"dim", cfg.dim},
                 {"n_samples", cfg.n_samples},
                 {"epsilon_sweep", rows},
                 {"expected_slope", cfg.dim}};
  json notices = json::array();
  if (log_eps.size() >= 2) {
    report["loglog_slope"] = fit_line(log_eps, log_p).slope;
  } else {
    report["loglog_slope"] = nullptr;
    notices.push_back("log-log slope omitted: fewer than two epsilon values with a positive estimate");
  }

  std::vector<double> sep2 = cfg.sep2_grid;
  std::sort(sep2.begin(), sep2.end());
  sep2.erase(std::unique(sep2.begin(), sep2.end()), sep2.end());
  json sep_rows = json::array();
  std::vector<double> sx, sy;
  // One seed for the whole sweep: the shifted samples share their normals.
  const std::uint64_t sep_seed = root.substream("mc-separation").key();
  for (double s2 : sep2) {
    const GaussianSpec gs = spec_at(cfg.dim, cfg.var_g, std::sqrt(s2));
    const SizeEstimate e = estimate_size_mc(f, gs, cfg.sep_epsilon, cfg.n_samples, sep_seed,
                                            cfg.workers);
    sep_rows.push_back({{"separation_sq", s2},
                        {"mc_estimate", e.value},
                        {"mc_std_error", e.std_error},
                        {"closed_form", closed_form_gaussian_size(f, gs, cfg.sep_epsilon)}});
    if (e.value > 0.0) {
      sx.push_back(s2);
      sy.push_back(std::log(e.value));
    }
  }
  const double expected_coef = -1.0 / (2.0 * (cfg.var_f + cfg.var_g));
  json sep = {{"epsilon", cfg.sep_epsilon},
              {"rows", sep_rows},
              {"expected_coefficient", expected_coef}};
  if (sx.size() >= 2) {
    sep["fitted_coefficient"] = fit_line(sx, sy).slope;
  } else {
    sep["fitted_coefficient"] = nullptr;
    notices.push_back("separation coefficient omitted: fewer than two usable separations");
  }
  report["separation_sweep"] = sep;
  report["notices"] = notices;
  for (const auto& n : notices) err << "notice: " << n.get<std::string>() << "\n";

  const fs::path dir = output_dir(cfg);
  write_json_file(report, dir / "size_report.json");
  write_text_file(dir / "size_curve.csv", curve.str());
  out << "size: " << grid.size() << " epsilon values, " << sep2.size() << " separations -> "
      << (dir / "size_report.json").string() << "\n";
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const RandomStream root(cfg.seed);
  const JoinConfig jc{cfg.epsilon};
  jc.validate();
  const JoinEngine engine = engine_of(cfg);

  const bool synthetic = cfg.paths.corpus.empty();
  const EmbeddedCorpus corpus =
      synthetic ? synthetic_corpus(cfg, root) : load_input_corpus(cfg.paths.corpus);
  const PointSet xs = corpus.points_of(Modality::image);
  const PointSet ys = corpus.points_of(Modality::text);
  const std::size_t d = corpus.dim();

  std::vector<CheckReport> checks;

  const double diam = cross_diameter(xs, ys);
  std::vector<double> grid;
  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) grid.push_back(s * cfg.epsilon);
  grid.push_back(diam);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  checks.push_back(verify_monotonicity(xs, ys, grid, engine));
  checks.push_back(convergence_check(xs, ys, engine));
  checks.push_back(verify_noise_tolerance(
      xs, ys, jc, NoiseSpec{cfg.eta, root.substream("noise").key()}, cfg.trials, engine));
  checks.push_back(check_inclusion_claim(
      xs, ys, jc, NoiseSpec{cfg.eta, root.substream("inclusion").key()}, cfg.trials, engine));

  std::optional<Decomposition> dec;
  std::string dec_source;
  if (!cfg.paths.decomposition.empty()) {
    dec = load_decomposition(require_path(cfg.paths.decomposition, "decomposition"));
    dec_source = cfg.paths.decomposition;
    if (dec->dim() != d) throw DomainError("decomposition and corpus dimensions differ");
  } else {
    RandomStream rng = root.substream("verify-decomposition");
    const DimensionPlan p = d >= 3 ? allocate_dimensions(d, cfg.var_f, cfg.var_g)
                                   : DimensionPlan{d, 0, 0};
    dec = Decomposition::random_orthogonal(p.ds, p.di, p.dt, rng);
    dec_source = "random_orthogonal";
  }
  const std::size_t n_vec = std::max<std::size_t>(cfg.trials, 1000);
  checks.push_back(guarded("projector_laws", [&] {
    return projector_laws_check(*dec, n_vec, root.substream("projector").key());
  }));
  checks.push_back(guarded("norm_decomposition", [&] {
    return norm_decomposition_check(*dec, n_vec, root.substream("norm").key());
  }));
  checks.push_back(guarded("perturbation_stability", [&] {
    return perturb_stability_check(*dec, n_vec, cfg.eta, root.substream("perturb").key());
  }));
  checks.push_back(guarded("dimensionality_constraint", [&] {
    return check_dim_constraint(xs.coords, ys.coords, kDefaultRankTol, &*dec).report();
  }));

  bool ok = true;
  json arr = json::array();
  for (const CheckReport& c : checks) {
    if (c.theorem_backed && !c.passed) ok = false;
    arr.push_back(c.to_json());
    out << (c.passed ? "PASS " : "FAIL ") << c.check
        << (c.theorem_backed ? "" : " (diagnostic)") << "\n";
  }
  json report = {{"command", "verify"},
                 {"config", report_config(cfg)},
                 {"corpus",
                  {{"source", synthetic ? "synthetic_gaussian" : cfg.paths.corpus},
                   {"dim", d},
                   {"images", xs.size()},
                   {"texts", ys.size()}}},
                 {"decomposition",
                  {{"source", dec_source},
                   {"ds", dec->ds()},
                   {"di", dec->di()},
                   {"dt", dec->dt()}}},
                 {"checks", arr},
                 {"passed", ok}};
  const fs::path dir = output_dir(cfg);
  write_json_file(report, dir / "verify_report.json");
  return ok ? kSuccess : kCheckFailed;
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RandomStream root(cfg.seed);
  const EmbeddedCorpus corpus = load_input_corpus(cfg.paths.corpus);
  if (corpus.pairs().empty()) throw DomainError("decompose needs a corpus with pairs");
  const LossWeights w = weights_of(cfg);
  if (w.specificity_mode == SpecificityMode::literal) {
    err << "notice: literal specificity mode adds +gamma*||component||^2, which shrinks the "
           "modality-specific components; use --specificity-mode hinge to keep them non-trivial\n";
  }

  const std::size_t d = corpus.dim();
  json allocation;
  DimensionPlan plan;
  if (auto given = plan_of(cfg)) {
    plan = *given;
    allocation = {{"source", "config"}};
  } else {
    // Mean per-axis variance of each modality.
    auto axis_var = [](const Eigen::MatrixXd& m) {
      if (m.cols() < 2) throw DomainError("variance estimate needs at least 2 points per modality");
      const Eigen::MatrixXd c = m.colwise() - m.rowwise().mean();
      return c.squaredNorm() / static_cast<double>((m.cols() - 1) * m.rows());
    };
    const double vf = axis_var(corpus.points_of(Modality::image).coords);
    const double vg = axis_var(corpus.points_of(Modality::text).coords);
    plan = allocate_dimensions(d, vf, vg);
    allocation = {{"source", "allocated"}, {"var_f", vf}, {"var_g", vg}};
  }
  plan.validate(d);

  const OptimizeResult res = optimize(
      corpus, plan, w,
      OptimizeOptions{cfg.steps, cfg.learning_rate, root.substream("decompose").key()});
  const LossBreakdown& last = res.trace.back();

  const fs::path dir = output_dir(cfg);
  save_decomposition(res.decomposition, dir / "decomposition.csv");
  std::ostringstream trace;
  write_loss_trace(res.trace, trace);
  write_text_file(dir / "loss_trace.csv", trace.str());

  json metrics = loss_json(last);
  metrics["certified_orthogonal"] = res.certified_orthogonal;
  metrics["max_cross_inner_product"] = res.decomposition.max_cross_inner_product();
  json report = {{"command", "decompose"},
                 {"config", report_config(cfg)},
                 {"plan", plan_json(plan)},
                 {"allocation", allocation},
                 {"specificity_mode", to_string(w.specificity_mode)},
                 {"steps", res.trace.size()},
                 {"metrics", metrics}};
  write_json_file(report, dir / "decompose_metrics.json");
  out << "decompose: plan (" << plan.ds << "," << plan.di << "," << plan.dt << "), L_align "
      << format_double(last.align) << ", L_orth " << format_double(last.orth)
      << (res.certified_orthogonal ? ", orthogonal" : ", soft") << "\n";
  return kSuccess;
}

}  // namespace fiberalign::cli
