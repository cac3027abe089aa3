#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fiberalign/cli.hpp"
#include "fiberalign/decomp.hpp"
#include "fiberalign/embed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("fiberalign_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "fiberalign");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return fiberalign::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static json read_json(const std::string& p) { return json::parse(slurp(p)); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, GenGaussianCountsAndDeterminism) {
  ASSERT_EQ(run({"gen", "--mode", "gaussian", "--dim", "4", "--n", "500", "--seed", "7", "--out",
                 path("a")}),
            0);
  const auto c = fiberalign::load_corpus(path("a/corpus.csv"));
  EXPECT_EQ(c.points().size(), 1000u);
  EXPECT_EQ(c.count(fiberalign::Modality::image), 500u);
  ASSERT_EQ(run({"gen", "--mode", "gaussian", "--dim", "4", "--n", "500", "--seed", "7", "--out",
                 path("b")}),
            0);
  EXPECT_EQ(slurp(path("a/corpus.csv")), slurp(path("b/corpus.csv")));
}

TEST_F(CliTest, GenPlantedWritesTruth) {
  ASSERT_EQ(run({"gen", "--mode", "planted", "--ds", "2", "--di", "1", "--dt", "1", "--out",
                 path("p")}),
            0);
  const auto dec = fiberalign::load_decomposition(path("p/planted_decomposition.csv"));
  EXPECT_EQ(dec.ds(), 2u);
  EXPECT_EQ(dec.dim(), 4u);
  EXPECT_TRUE(dec.orthogonal());
  const auto c = fiberalign::load_corpus(path("p/corpus.csv"));
  EXPECT_EQ(c.pairs().size(), 500u);
  EXPECT_EQ(run({"gen", "--mode", "planted", "--ds", "2", "--out", path("q")}), 2);
}

TEST_F(CliTest, EmbedPatchesAndTokens) {
  std::string patches, tokens;
  for (int k = 0; k < 10; ++k) {
    patches += std::to_string(k) + ",10,20," + std::to_string(255 - k) + "\n";
    tokens += "{\"id\": \"cap" + std::to_string(k) + "\", \"tokens\": [101, " +
              std::to_string(2000 + k) + "]}\n";
  }
  write("patches.csv", patches);
  write("tokens.jsonl", tokens);
  ASSERT_EQ(run({"embed", "--patches", path("patches.csv"), "--tokens", path("tokens.jsonl"),
                 "--pair-by-line", "--seed", "3", "--out", path("e1")}),
            0)
      << err_.str();
  const auto c = fiberalign::load_corpus(path("e1/corpus.csv"));
  EXPECT_EQ(c.points().size(), 20u);
  EXPECT_EQ(c.pairs().size(), 10u);
  ASSERT_EQ(run({"embed", "--patches", path("patches.csv"), "--tokens", path("tokens.jsonl"),
                 "--pair-by-line", "--seed", "3", "--out", path("e2")}),
            0);
  EXPECT_EQ(slurp(path("e1/corpus.csv")), slurp(path("e2/corpus.csv")));
}

TEST_F(CliTest, EmbedErrorsNameFileAndLine) {
  write("patches.csv", "1,2,3\n4,300,6\n");
  EXPECT_EQ(run({"embed", "--patches", path("patches.csv"), "--out", path("e")}), 3);
  EXPECT_NE(err_.str().find("patches.csv:2"), std::string::npos) << err_.str();
  write("tokens.jsonl", "{\"id\": \"a\", \"tokens\": [1]}\n{\"id\": \"b\" \"tokens\": [1]}\n");
  EXPECT_EQ(run({"embed", "--tokens", path("tokens.jsonl"), "--out", path("e")}), 3);
  EXPECT_NE(err_.str().find("tokens.jsonl:2"), std::string::npos) << err_.str();
  write("long.csv", "1,1,1,1,1,1\n");
  EXPECT_EQ(run({"embed", "--patches", path("long.csv"), "--degree-bound", "4", "--out",
                 path("e")}),
            3);
  EXPECT_EQ(run({"embed", "--out", path("e")}), 2);
}

TEST_F(CliTest, JoinEnginesAgreeAndLimits) {
  ASSERT_EQ(run({"gen", "--dim", "3", "--n", "300", "--seed", "2", "--out", path("g")}), 0);
  ASSERT_EQ(run({"join", "--corpus", path("g/corpus.csv"), "--eps", "0.4", "--engine", "grid",
                 "--out", path("jg")}),
            0);
  ASSERT_EQ(run({"join", "--corpus", path("g/corpus.csv"), "--eps", "0.4", "--engine", "brute",
                 "--out", path("jb")}),
            0);
  EXPECT_EQ(slurp(path("jg/join.csv")), slurp(path("jb/join.csv")));
  const json s = read_json(path("jg/join_summary.json"));
  for (const char* key : {"count", "epsilon", "engine", "distance_evals"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_LT(s["distance_evals"].get<std::size_t>(),
            read_json(path("jb/join_summary.json"))["distance_evals"].get<std::size_t>());

  ASSERT_EQ(run({"join", "--corpus", path("g/corpus.csv"), "--eps", "0", "--out", path("j0")}), 0);
  EXPECT_EQ(read_json(path("j0/join_summary.json"))["count"], 0);
  ASSERT_EQ(run({"join", "--corpus", path("g/corpus.csv"), "--eps", "1e9", "--out", path("jx")}), 0);
  EXPECT_EQ(read_json(path("jx/join_summary.json"))["count"], 300 * 300);
}

TEST_F(CliTest, JoinRejectsInconsistentCorpus) {
  write("bad.csv", "dim=2\na,image,1,2\nb,text,1\n");
  EXPECT_EQ(run({"join", "--corpus", path("bad.csv"), "--out", path("j")}), 3);
  EXPECT_EQ(run({"join", "--corpus", path("missing.csv"), "--out", path("j")}), 3);
}

TEST_F(CliTest, VerifyDefaultSuitePasses) {
  ASSERT_EQ(run({"verify", "--seed", "4", "--out", path("v")}), 0) << out_.str();
  const json r = read_json(path("v/verify_report.json"));
  EXPECT_TRUE(r["passed"].get<bool>());
  std::vector<std::string> names;
  for (const auto& c : r["checks"]) {
    names.push_back(c["check"]);
    if (c["theorem_backed"].get<bool>()) {
      EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
    }
  }
  EXPECT_EQ(names, (std::vector<std::string>{"monotonicity", "convergence", "noise_tolerance",
                                             "inclusion_claim", "projector_laws",
                                             "norm_decomposition", "perturbation_stability",
                                             "dimensionality_constraint"}));
  const json& inclusion = r["checks"][3];
  EXPECT_FALSE(inclusion["theorem_backed"].get<bool>());
  EXPECT_FALSE(inclusion["details"].back()["claim_reproducible_as_printed"].get<bool>());
}

TEST_F(CliTest, VerifyFailsOnNonOrthogonalDecomposition) {
  ASSERT_EQ(run({"gen", "--dim", "3", "--n", "50", "--out", path("g")}), 0);
  write("dec.csv", "dim=3,ds=1,di=1,dt=1\n1,0,0\n1,0,0\n0,0,1\n");
  EXPECT_EQ(run({"verify", "--corpus", path("g/corpus.csv"), "--decomposition", path("dec.csv"),
                 "--trials", "5", "--out", path("v")}),
            1);
  const json r = read_json(path("v/verify_report.json"));
  EXPECT_FALSE(r["passed"].get<bool>());
}

TEST_F(CliTest, SizeSlopeAndDegenerateGrid) {
  ASSERT_EQ(run({"size", "--dim", "2", "--n", "200", "--n-samples", "400000", "--out", path("s")}),
            0);
  const json r = read_json(path("s/size_report.json"));
  EXPECT_NEAR(r["loglog_slope"].get<double>(), 2.0, 0.4);
  EXPECT_EQ(r["epsilon_sweep"].size(), 4u);
  const double coef = r["separation_sweep"]["fitted_coefficient"];
  EXPECT_NEAR(coef, -0.25, 0.15 * 0.25);
  EXPECT_TRUE(fs::exists(path("s/size_curve.csv")));

  ASSERT_EQ(run({"size", "--dim", "2", "--eps-grid", "0.1", "--n-samples", "1000", "--out",
                 path("s1")}),
            0);
  const json one = read_json(path("s1/size_report.json"));
  EXPECT_TRUE(one["loglog_slope"].is_null());
  EXPECT_EQ(one["notices"].size(), 1u);
  EXPECT_NE(err_.str().find("slope omitted"), std::string::npos);
}

TEST_F(CliTest, DecomposeRecoversPlantedPlan) {
  ASSERT_EQ(run({"gen", "--mode", "planted", "--ds", "4", "--di", "2", "--dt", "2", "--n", "64",
                 "--out", path("p")}),
            0);
  ASSERT_EQ(run({"decompose", "--corpus", path("p/corpus.csv"), "--gamma", "0", "--steps", "2000",
                 "--out", path("d")}),
            0)
      << err_.str();
  EXPECT_NE(err_.str().find("literal"), std::string::npos);
  const json m = read_json(path("d/decompose_metrics.json"));
  EXPECT_EQ(m["plan"], json({{"ds", 4}, {"di", 2}, {"dt", 2}}));
  EXPECT_EQ(m["allocation"]["source"], "allocated");
  EXPECT_LE(m["metrics"]["L_orth"].get<double>(), 1e-6);
  const std::string trace = slurp(path("d/loss_trace.csv"));
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 2001);
  EXPECT_TRUE(fs::exists(path("d/decomposition.csv")));
}

TEST_F(CliTest, DecomposePlanOverride) {
  ASSERT_EQ(run({"gen", "--mode", "planted", "--ds", "8", "--di", "4", "--dt", "4", "--n", "32",
                 "--out", path("p")}),
            0);
  ASSERT_EQ(run({"decompose", "--corpus", path("p/corpus.csv"), "--ds", "8", "--di", "4", "--dt",
                 "4", "--steps", "5", "--out", path("d")}),
            0);
  const json m = read_json(path("d/decompose_metrics.json"));
  EXPECT_EQ(m["plan"], json({{"ds", 8}, {"di", 4}, {"dt", 4}}));
  EXPECT_EQ(m["allocation"]["source"], "config");
  EXPECT_EQ(m["steps"], 5);
  EXPECT_EQ(run({"decompose", "--corpus", path("p/corpus.csv"), "--ds", "8", "--di", "4", "--dt",
                 "5", "--out", path("d2")}),
            2);
}

TEST_F(CliTest, DecomposeNeedsPairs) {
  ASSERT_EQ(run({"gen", "--dim", "3", "--n", "10", "--out", path("g")}), 0);
  EXPECT_EQ(run({"decompose", "--corpus", path("g/corpus.csv"), "--out", path("d")}), 2);
}

TEST_F(CliTest, ConfigPrecedence) {
  ASSERT_EQ(run({"gen", "--dim", "2", "--n", "100", "--out", path("g")}), 0);
  write("cfg.json", "{\"epsilon\": 0.3, \"engine\": \"brute\", \"paths\": {\"corpus\": \"" +
                        path("g/corpus.csv") + "\", \"out\": \"" + path("c") + "\"}}");
  ASSERT_EQ(run({"join", "--config", path("cfg.json")}), 0) << err_.str();
  json s = read_json(path("c/join_summary.json"));
  EXPECT_EQ(s["epsilon"], 0.3);
  EXPECT_EQ(s["engine"], "brute");
  ASSERT_EQ(run({"join", "--config", path("cfg.json"), "--eps", "0.2"}), 0);
  s = read_json(path("c/join_summary.json"));
  EXPECT_EQ(s["epsilon"], 0.2);
  EXPECT_EQ(s["engine"], "brute");
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"join", "--engine", "kdtree"}), 2);
  EXPECT_EQ(run({"verify", "--eps", "-1", "--out", path("v")}), 2);
  write("bad.json", "{\"epsilon\": \"wide\"}");
  EXPECT_EQ(run({"verify", "--config", path("bad.json")}), 2);
  write("unknown.json", "{\"epsilonn\": 1}");
  EXPECT_EQ(run({"verify", "--config", path("unknown.json")}), 2);
  write("broken.json", "{");
  EXPECT_EQ(run({"verify", "--config", path("broken.json")}), 3);
  EXPECT_EQ(run({"verify", "--config", path("nope.json")}), 3);
  EXPECT_EQ(run({"--help"}), 0);
}
