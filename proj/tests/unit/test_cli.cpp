// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "spectrarec/check.hpp"
#include "spectrarec/cli.hpp"
#include "spectrarec/dataset.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/nn.hpp"

using namespace spectrarec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "spectrarec");
  std::vector<const char*> argv;
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

constexpr const char* kSceneConfig =
    "height = 12\nwidth = 12\nlambda_min = 460\nlambda_max = 720\nlambda_step = 10\n"
    "endmembers = 3\nseed = 4\nscene_count = 10\nnoise_sigma = 0.002\n";

constexpr const char* kTrainConfig = "epochs = 3\nlr0 = 0.001\naugment = false\nseed = 2\n";

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "spectrarec_cli";
    fs::remove_all(root_);
    fs::create_directories(root_);
    write_file_atomic(root_ / "scene.cfg", std::string_view(kSceneConfig));
    write_file_atomic(root_ / "train.cfg", std::string_view(kTrainConfig));
    const Outcome gen = run({"gen", "--config", (root_ / "scene.cfg").string(), "--out",
                             (root_ / "data").string()});
    ASSERT_EQ(gen.code, 0) << gen.err;
    const Outcome tr = run({"train", "--model", "pixel_feature_net", "--data", (root_ / "data").string(),
                            "--config", (root_ / "train.cfg").string(), "--out",
                            (root_ / "model.hsw").string()});
    ASSERT_EQ(tr.code, 0) << tr.err;
    train_stdout_ = tr.out;
    const nn::ModelSpec wide = nn::make_model_spec(nn::ModelName::pixel_feature_net, 100);
    nn::save_checkpoint(wide, nn::init_weights(wide, 1), root_ / "wide.hsw");
  }

  static fs::path root_;
  static std::string train_stdout_;
};

fs::path CliTest::root_;
std::string CliTest::train_stdout_;

}  // namespace

TEST_F(CliTest, GenWritesManifestAndIsReproducible) {
  const CsvTable manifest = parse_csv(read_file_text(root_ / "data" / "manifest.csv"));
  EXPECT_EQ(manifest.rows.size(), 10U);
  const Outcome again = run({"gen", "--config", (root_ / "scene.cfg").string(), "--out",
                             (root_ / "data2").string()});
  ASSERT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("train 6"), std::string::npos) << again.out;
  for (const auto& entry : fs::directory_iterator(root_ / "data")) {
    const fs::path twin = root_ / "data2" / entry.path().filename();
    EXPECT_EQ(read_file_bytes(entry.path()), read_file_bytes(twin)) << entry.path();
  }
}

TEST_F(CliTest, GenRejectsBadFractions) {
  write_file_atomic(root_ / "bad.cfg",
                    std::string_view("train_fraction = 0.5\nval_fraction = 0.1\ntest_fraction = 0.1\n"));
  const Outcome r = run({"gen", "--config", (root_ / "bad.cfg").string(), "--out", (root_ / "bad").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, TrainPrintsEpochLinesAndHistory) {
  // three epoch lines and a closing best-epoch line
  EXPECT_EQ(line_count(train_stdout_), 4U);
  EXPECT_NE(train_stdout_.find("\nbest epoch "), std::string::npos);
  std::istringstream first(train_stdout_);
  std::size_t epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
  first >> epoch >> train_loss >> val_loss >> lr;
  EXPECT_EQ(epoch, 1U);
  EXPECT_GT(lr, 0.0);
  const CsvTable h = parse_csv(read_file_text(root_ / "model.hsw.history.csv"));
  EXPECT_EQ(h.header, (CsvRow{"epoch", "train_loss", "val_loss", "lr"}));
  EXPECT_EQ(h.rows.size(), 3U);
  EXPECT_EQ(nn::load_checkpoint(root_ / "model.hsw").spec.output_channels, 27U);
  for (const auto& entry : fs::directory_iterator(root_)) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
}

TEST_F(CliTest, TrainIsDeterministic) {
  const Outcome r = run({"train", "--model", "pixel_feature_net", "--data", (root_ / "data").string(),
                         "--config", (root_ / "train.cfg").string(), "--out", (root_ / "again.hsw").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, train_stdout_);
  EXPECT_EQ(read_file_bytes(root_ / "again.hsw"), read_file_bytes(root_ / "model.hsw"));
}

TEST_F(CliTest, UnknownModelListsNames) {
  const Outcome r = run({"train", "--model", "unet", "--data", (root_ / "data").string(), "--out",
                         (root_ / "x.hsw").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("local_feature_net"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(root_ / "x.hsw"));
}

TEST_F(CliTest, MissingDatasetIsUsageError) {
  const Outcome r = run({"train", "--model", "pixel_feature_net", "--data", (root_ / "nowhere").string(),
                         "--out", (root_ / "x.hsw").string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, EvalWritesReport) {
  const fs::path out = root_ / "report";
  const Outcome r = run({"eval", "--checkpoint", (root_ / "model.hsw").string(), "--data",
                         (root_ / "data").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable metrics = parse_csv(read_file_text(out / "metrics.csv"));
  EXPECT_EQ(metrics.header, (CsvRow{"metric", "mean", "std"}));
  const CsvTable ranges = parse_csv(read_file_text(out / "ranges.csv"));
  ASSERT_EQ(ranges.rows.size(), 3U);
  const double full = parse_double(ranges.rows[0][3]);
  const double vis = parse_double(ranges.rows[1][3]);
  const double ext = parse_double(ranges.rows[2][3]);
  const double nv = parse_double(ranges.rows[1][2]);
  const double ne = parse_double(ranges.rows[2][2]);
  EXPECT_NEAR(full, (nv * vis + ne * ext) / (nv + ne), 1e-12);
  EXPECT_EQ(parse_csv(read_file_text(out / "channels.csv")).rows.size(), 27U);
  EXPECT_TRUE(fs::exists(out / "channels.svg"));
  const Outcome rep = run({"report", "--in", out.string()});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("mae"), std::string::npos);
}

TEST_F(CliTest, EvalOnOwnPredictionsIsExact) {
  Dataset ds = load_dataset(root_ / "data");
  const nn::Checkpoint ck = nn::load_checkpoint(root_ / "model.hsw");
  for (Sample& s : ds.samples) {
    s.cube = nn::predict(ck.spec, ck.weights, s.rgb, ds.wavelengths);
  }
  save_dataset(ds, root_ / "own");
  const Outcome r = run({"eval", "--checkpoint", (root_ / "model.hsw").string(), "--data",
                         (root_ / "own").string(), "--out", (root_ / "own_report").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable metrics = parse_csv(read_file_text(root_ / "own_report" / "metrics.csv"));
  EXPECT_EQ(metrics.rows[0][0], "mae");
  EXPECT_EQ(parse_double(metrics.rows[0][1]), 0.0);
}

TEST_F(CliTest, EvalChannelMismatchSuggestsFinetune) {
  const Outcome r = run({"eval", "--checkpoint", (root_ / "wide.hsw").string(), "--data",
                         (root_ / "data").string(), "--out", (root_ / "wide_report").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("finetune"), std::string::npos) << r.err;
}

TEST_F(CliTest, FinetuneFromWiderCheckpoint) {
  const Outcome r = run({"finetune", "--checkpoint", (root_ / "wide.hsw").string(), "--data",
                         (root_ / "data").string(), "--config", (root_ / "train.cfg").string(),
                         "--epochs", "2", "--out", (root_ / "tuned.hsw").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(r.out), 3U);
  const nn::Checkpoint tuned = nn::load_checkpoint(root_ / "tuned.hsw");
  EXPECT_EQ(tuned.spec.output_channels, 27U);
  EXPECT_EQ(parse_csv(read_file_text(root_ / "tuned.hsw.history.csv")).rows.size(), 2U);
  const Outcome too_many = run({"finetune", "--checkpoint", (root_ / "wide.hsw").string(), "--data",
                                (root_ / "data").string(), "--epochs", "51", "--out",
                                (root_ / "t51.hsw").string()});
  EXPECT_EQ(too_many.code, 2);
}

TEST_F(CliTest, SpectraMatchesLabelAndPrediction) {
  const fs::path cube_path = root_ / "data" / "scene_0000.hsc";
  const Outcome r = run({"spectra", "--checkpoint", (root_ / "model.hsw").string(), "--cube",
                         cube_path.string(), "--point", "0,0", "--point", "5,7", "--point", "11,11",
                         "--out", (root_ / "spectra").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Hypercube label = load_cube(cube_path);
  const RgbImage rgb = load_rgb(root_ / "data" / "scene_0000_rgb.hsc");
  const nn::Checkpoint ck = nn::load_checkpoint(root_ / "model.hsw");
  const Hypercube pred = nn::predict(ck.spec, ck.weights, rgb, label.wavelengths());
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{0, 0}, {5, 7}, {11, 11}}) {
    const fs::path csv = root_ / "spectra" / ("point_" + std::to_string(h) + "_" + std::to_string(w) + ".csv");
    const CsvTable t = parse_csv(read_file_text(csv));
    EXPECT_EQ(t.header, (CsvRow{"wavelength_nm", "label", "prediction"}));
    ASSERT_EQ(t.rows.size(), 27U);
    for (std::size_t c = 0; c < 27; ++c) {
      EXPECT_EQ(static_cast<float>(parse_double(t.rows[c][1])), label.at(h, w, c));
      EXPECT_EQ(static_cast<float>(parse_double(t.rows[c][2])), pred.at(h, w, c));
    }
  }
  const Outcome out_of_bounds = run({"spectra", "--checkpoint", (root_ / "model.hsw").string(), "--cube",
                                     cube_path.string(), "--point", "12,0", "--out",
                                     (root_ / "spectra_bad").string()});
  EXPECT_EQ(out_of_bounds.code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"gen"}).code, 2);
  const Outcome help = run({"train", "--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* flag : {"--model", "--data", "--config", "--out", "--history", "--epochs", "--seed"}) {
    EXPECT_NE(help.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, CheckPasses) {
  const Outcome r = run({"check"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("param_count pixel_feature_net C=27: 1611"), std::string::npos) << r.out;
}

TEST(Cli, CheckReportsInjectedFault) {
  ::setenv(kInjectFaultEnv, "gradient_conv1", 1);
  const Outcome r = run({"check"});
  ::unsetenv(kInjectFaultEnv);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL gradient_conv1"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("FAIL gradient_dense"), std::string::npos);
}
