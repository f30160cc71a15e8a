#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace sftest;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with stdout captured; stderr is discarded.
Run cli(const std::string& args, const fs::path& cwd, const std::string& env = "") {
  const auto capture = cwd / "stdout.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && " + env + " '" SCENEFORGE_CLI "' " + args + " > '" +
                          capture.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small corpus shared by the tests that need one.
fs::path small_corpus(const std::string& name) {
  const auto dir = scratch(name);
  const auto r = cli("gen-synthetic --scenes 40 --categories 8 --model-count 20 --seed 1 --out corpus", dir);
  EXPECT_EQ(r.code, 0);
  return dir;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli_codes");
  EXPECT_EQ(cli("--help", dir).code, 0);
  EXPECT_EQ(cli("", dir).code, 1);
  EXPECT_EQ(cli("frobnicate", dir).code, 1);
  EXPECT_EQ(cli("asts --template missing.json --scene missing.json", dir).code, 1);
  EXPECT_EQ(cli("train --corpus nowhere --out w.json", dir).code, 1);
  EXPECT_EQ(cli("eval --corpus . --methods random,bogus --out e.json", dir).code, 1);
  // Output path beneath a regular file cannot be created.
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(cli("gen-synthetic --scenes 10 --categories 5 --model-count 10 --out blocker/corpus", dir).code, 2);
}

TEST(Cli, BadJsonIsValidationError) {
  const auto dir = scratch("cli_badjson");
  std::ofstream(dir / "t.json") << "{ not json";
  std::ofstream(dir / "s.json") << "[]";
  EXPECT_EQ(cli("asts --template t.json --scene s.json", dir).code, 1);
}

TEST(Cli, SplitTrainDiscriminateEval) {
  const auto dir = small_corpus("cli_chain");
  ASSERT_EQ(cli("split --corpus corpus --out split --seed 1", dir).code, 0);
  for (const char* part : {"train", "dev", "test"}) EXPECT_TRUE(fs::exists(dir / "split" / part / "scenes.json"));
  EXPECT_TRUE(fs::exists(dir / "split" / "models.json"));

  ASSERT_EQ(cli("train --corpus split --out w1.json --seed 1", dir).code, 0);
  ASSERT_EQ(cli("train --corpus split --out run2/w1.json --seed 1", dir).code, 0);
  EXPECT_EQ(slurp(dir / "w1.json"), slurp(dir / "run2" / "w1.json"));
  const auto report = json::parse(slurp(dir / "train_report.json"));
  EXPECT_TRUE(report.contains("bias"));
  EXPECT_TRUE(report.contains("devAccuracy"));
  EXPECT_EQ(report["config"]["seed"], 1);

  const auto d = cli("discriminate --corpus split --weights w1.json --seed 1", dir);
  ASSERT_EQ(d.code, 0);
  EXPECT_NE(d.out.find("modelid_only"), std::string::npos);

  ASSERT_EQ(cli("eval --corpus split --weights w1.json --seed 1 --out eval", dir).code, 0);
  const auto ev = json::parse(slurp(dir / "eval" / "eval_report.json"));
  ASSERT_EQ(ev["means"].size(), 4u);
  EXPECT_EQ(ev["means"][0]["method"], "random");
  EXPECT_EQ(ev["means"][3]["method"], "combo");
  for (const auto& m : ev["means"]) {
    EXPECT_GE(m["meanAsts"].get<double>(), 0.0);
    EXPECT_LE(m["meanAsts"].get<double>(), 1.0);
  }
}

TEST(Cli, EvalWithRatings) {
  const auto dir = small_corpus("cli_ratings");
  ASSERT_EQ(cli("train --corpus corpus --out w.json", dir).code, 0);
  const auto descriptions = json::parse(slurp(dir / "corpus" / "descriptions.json"));
  json ratings = json::array();
  for (int i = 0; i < 5; ++i) ratings.push_back({{"descriptionId", descriptions[i]["sceneId"].get<std::string>() + ":0"}, {"rating", i}});
  std::ofstream(dir / "ratings.json") << ratings.dump();
  ASSERT_EQ(cli("eval --corpus corpus --weights w.json --methods rule,combo --ratings ratings.json --out e.json", dir).code, 0);
  const auto ev = json::parse(slurp(dir / "e.json"));
  EXPECT_EQ(ev["means"].size(), 2u);
  ASSERT_TRUE(ev.contains("correlation"));
  EXPECT_TRUE(ev["correlation"].contains("perDescription"));
}

TEST(Cli, AstsOfSceneAgainstItself) {
  const auto dir = scratch("cli_asts");
  Scene s = scene("s", {obj("desk_a", "desk", {1, 1, 0}), obj("chair_a", "chair", {2, 1, 0})});
  SceneTemplate t;
  t.nodes = {{0, "desk", "desk_a", {}, 1}, {1, "chair", "chair_a", {}, 1}};
  std::ofstream(dir / "scene.json") << scenes_to_json({s}).dump();
  std::ofstream(dir / "template.json") << template_to_json(t).dump();
  const auto r = cli("asts --template template.json --scene scene.json", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1\n");
}

TEST(Cli, GenerateWritesSceneAndRespectsEnvSeed) {
  const auto dir = scratch("cli_generate");
  std::ofstream(dir / "models.json") << model_db_to_json(office_db()).dump();
  const std::string text = "\"A desk with a chair. There is a lamp on the desk.\"";
  ASSERT_EQ(cli("generate --models models.json --condition rule --text " + text + " --seed 5 --out a", dir).code, 0);
  ASSERT_EQ(cli("generate --models models.json --condition rule --text " + text + " --out b", dir,
                "SCENEFORGE_SEED=5").code,
            0);
  for (const char* f : {"scene.json", "template.json", "scene.svg", "generate_report.json"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  EXPECT_EQ(slurp(dir / "a" / "scene.json"), slurp(dir / "b" / "scene.json"));
  EXPECT_EQ(cli("generate --models models.json --text x --out c", dir, "SCENEFORGE_SEED=abc").code, 1);
  // Grounded template round-trips through asts against the generated scene: every node lands.
  const auto r = cli("asts --template a/template.json --scene a/scene.json", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1\n");
}

TEST(Cli, InputsAreNotModified) {
  const auto dir = small_corpus("cli_readonly");
  const auto before = slurp(dir / "corpus" / "scenes.json") + slurp(dir / "corpus" / "descriptions.json");
  ASSERT_EQ(cli("split --corpus corpus --out split", dir).code, 0);
  ASSERT_EQ(cli("train --corpus corpus --out w.json", dir).code, 0);
  ASSERT_EQ(cli("eval --corpus corpus --weights w.json --out e.json", dir).code, 0);
  EXPECT_EQ(slurp(dir / "corpus" / "scenes.json") + slurp(dir / "corpus" / "descriptions.json"), before);
}

TEST(Cli, RenderSvg) {
  const auto dir = scratch("cli_render");
  std::ofstream(dir / "models.json") << model_db_to_json(office_db()).dump();
  std::ofstream(dir / "scene.json") << scenes_to_json({scene("s", {obj("desk_a", "desk", {1, 1, 0})})}).dump();
  ASSERT_EQ(cli("render --scene scene.json --models models.json --out pic.svg", dir).code, 0);
  EXPECT_NE(slurp(dir / "pic.svg").find("<svg"), std::string::npos);
}
