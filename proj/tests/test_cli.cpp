#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "covhess/dataset.hpp"
#include "covhess/io.hpp"
#include "covhess/random.hpp"
#include "covhess/serialize.hpp"

using namespace covhess;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("covhess_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + COVHESS_CLI + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 40 rows, 4 features, labels "no"/"yes".
fs::path toy_csv(const fs::path& dir) {
  Rng rng(7);
  std::ostringstream s;
  s << "a,b,c,d,label\n";
  for (int r = 0; r < 40; ++r) {
    const bool pos = r % 2;
    for (int c = 0; c < 4; ++c) s << format_double(rng.normal(pos && c < 2 ? 1.5 : 0.0, 1.0 + 0.2 * c)) << ",";
    s << (pos ? "yes" : "no") << "\n";
  }
  const fs::path p = dir / "toy.csv";
  write_text_file(p, s.str());
  return p;
}

std::string common(const fs::path& data, const fs::path& out) {
  return "--data '" + data.string() + "' --label-column label --out '" + out.string() + "' --hidden 6,4,3";
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path dir = scratch("usage");
  const fs::path data = toy_csv(dir);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("bogus-command"), 2);
  EXPECT_EQ(run("compare " + common(data, dir / "o") + " --methods pca,svd"), 2);
  EXPECT_EQ(run("preprocess --data '" + data.string() + "' --label-column nope --out '" + dir.string() + "'"), 2);
  EXPECT_EQ(run("train " + common(data, dir / "o") + " --optimizer rmsprop"), 2);
  EXPECT_EQ(run("heatmap " + common(data, dir / "nomodel")), 2);
}

TEST(Cli, ZeroEpochsKeepsInitializationAndTrainingIsReproducible) {
  const fs::path dir = scratch("train");
  const fs::path data = toy_csv(dir);
  ASSERT_EQ(run("train " + common(data, dir / "a") + " --epochs 0 --seed 4"), 0);
  const ModelBundle b = load_model(dir / "a" / "model.json");
  std::vector<std::size_t> hidden{6, 4, 3};
  EXPECT_EQ(b.model, init_mlp(4, hidden, 4));
  const Json report = Json::parse(read_text_file(dir / "a" / "train_report.json"));
  EXPECT_TRUE(report["epoch_losses"].empty());

  ASSERT_EQ(run("train " + common(data, dir / "b") + " --epochs 5"), 0);
  ASSERT_EQ(run("train " + common(data, dir / "c") + " --epochs 5"), 0);
  EXPECT_EQ(read_text_file(dir / "b" / "model.json"), read_text_file(dir / "c" / "model.json"));
  EXPECT_TRUE(fs::exists(dir / "b" / "spectra" / "curvature.csv"));
  EXPECT_TRUE(fs::exists(dir / "b" / "figures" / "eigenspectra.svg"));
}

TEST(Cli, HeatmapGridBoundsAndOutputs) {
  const fs::path dir = scratch("heatmap");
  const fs::path data = toy_csv(dir);
  ASSERT_EQ(run("train " + common(data, dir) + " --epochs 3"), 0);
  EXPECT_EQ(run("heatmap " + common(data, dir) + " --grid 5"), 2);
  ASSERT_EQ(run("heatmap " + common(data, dir) + " --grid 1"), 0);
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(dir / "figures"))
    svgs += e.path().filename().string().starts_with("projection_");
  EXPECT_EQ(svgs, 1u);
  ASSERT_EQ(run("heatmap " + common(data, dir) + " --grid 2"), 0);
  const std::string lda = read_text_file(dir / "heatmap" / "lda_ratio.csv");
  EXPECT_EQ(lda.substr(0, lda.find('\n')), "i\\j,1,2");
  ASSERT_EQ(run("contributions " + common(data, dir)), 0);
  EXPECT_TRUE(fs::exists(dir / "contributions" / "curvature_v1.csv"));
}

TEST(Cli, PreprocessIsIdempotent) {
  const fs::path dir = scratch("preprocess");
  const fs::path data = toy_csv(dir);
  ASSERT_EQ(run("preprocess " + common(data, dir / "once")), 0);
  const fs::path once = dir / "once" / "normalized.csv";
  ASSERT_EQ(run("preprocess " + common(once, dir / "twice")), 0);
  CsvOptions o;
  o.label_column = "label";
  const Dataset a = load_csv(once, o);
  const Dataset b = load_csv(dir / "twice" / "normalized.csv", o);
  ASSERT_EQ(a.features.data().size(), b.features.data().size());
  for (std::size_t i = 0; i < a.features.data().size(); ++i)
    EXPECT_NEAR(a.features.data()[i], b.features.data()[i], 1e-9);
  EXPECT_TRUE(fs::exists(dir / "once" / "isotropy.json"));
}

TEST(Cli, CompareWritesReports) {
  const fs::path dir = scratch("compare");
  const fs::path data = toy_csv(dir);
  ASSERT_EQ(run("compare " + common(data, dir) + " --k 2 --epochs 3 --svm-epochs 20 --methods pca,proposed"), 0);
  const Json report = Json::parse(read_text_file(dir / "report.json"));
  EXPECT_EQ(report["k"], 2);
  EXPECT_EQ(report["methods"].size(), 2u);
  EXPECT_EQ(report["meta"]["dataset"], "toy.csv");
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "figures" / "proposed_test.svg"));
}

TEST(Cli, SeedPrecedence) {
  const fs::path dir = scratch("seed");
  const fs::path config = dir / "run.toml";
  write_text_file(config, "seed = 5\nout = \"" + dir.string() + "\"\n");
  auto seed_written = [&] { return Json::parse(read_text_file(dir / "theorems.json"))["seed"].get<int>(); };

  ASSERT_EQ(run("verify-theorems --json --config '" + config.string() + "'"), 0);
  EXPECT_EQ(seed_written(), 5);
  ASSERT_EQ(run("verify-theorems --json --config '" + config.string() + "'", "COVHESS_SEED=7"), 0);
  EXPECT_EQ(seed_written(), 7);
  ASSERT_EQ(run("verify-theorems --json --seed 9 --config '" + config.string() + "'", "COVHESS_SEED=7"), 0);
  EXPECT_EQ(seed_written(), 9);
  EXPECT_EQ(run("verify-theorems --config '" + config.string() + "'", "COVHESS_SEED=abc"), 2);
}
