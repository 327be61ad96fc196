#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "bpsnn/data.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("bpsnn_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const std::string cmd = std::string(BPSNN_CLI_PATH) + " " + args + " >" + (dir_ / "stdout").string() + " 2>" +
                            (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir_ / "stdout");
    r.err = slurp(dir_ / "stderr");
    return r;
  }

  fs::path images(std::size_t n = 6, int value = -1) const {
    auto ds = bpsnn::data::synthetic(n, 2, 3, 8, 8);
    if (value >= 0) ds.images = bpsnn::IntTensor(ds.images.shape(), std::vector<int>(ds.images.numel(), value));
    bpsnn::data::write_idx(ds, dir_ / "images.idx", dir_ / "labels.idx");
    return dir_ / "images.idx";
  }

  fs::path config(const std::string& extra = "") const {
    std::ofstream(dir_ / "cfg.json") << R"({"dataset": {"synthetic": {"n": 40, "classes": 2, "height": 8, "width": 8}},
      "network": {"channels": 2, "hidden": 8}, "encoder": {"timesteps": 3},
      "epochs": 2, "timing": false)"
                                     << extra << "}";
    return dir_ / "cfg.json";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, EncodeCombinedWritesExpectedSteps) {
  const auto in = images();
  const auto r = run("encode --input " + in.string() + " --mode combined --color rgb --timesteps 10 --out " +
                     (dir_ / "a.spkt").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  EXPECT_EQ(summary["t_prime"], 18);
  EXPECT_EQ(summary["n_bit"], 8);
  EXPECT_EQ(summary["shape"], json({18, 6, 1, 8, 8}));

  const auto again = run("encode --input " + dir_.string() + " --mode combined --timesteps 10 --workers 3 --out " +
                         (dir_ / "b.spkt").string());
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(dir_ / "a.spkt"), slurp(dir_ / "b.spkt"));

  const auto hsl = run("encode --input " + in.string() + " --color hsl --timesteps 10 --out " +
                       (dir_ / "c.spkt").string());
  ASSERT_EQ(hsl.code, 0) << hsl.err;
  EXPECT_EQ(json::parse(hsl.out)["t_prime"], 19);
}

TEST_F(Cli, EncodeZeroImageBitplaneHasNoSpikes) {
  const auto in = images(2, 0);
  const auto r = run("encode --input " + in.string() + " --mode bitplane --out " + (dir_ / "z.spkt").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["spike_count"], 0);
}

TEST_F(Cli, UnknownColorModelFails) {
  const auto in = images();
  const auto r = run("encode --input " + in.string() + " --color cmyk --out " + (dir_ / "x.spkt").string());
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  const auto err = json::parse(r.err);
  EXPECT_EQ(err["command"], "encode");
  EXPECT_FALSE(fs::exists(dir_ / "x.spkt"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("encode --mode rate").code, 2);
}

TEST_F(Cli, ConvertColor) {
  const auto in = images(2);
  const auto r = run("convert-color --input " + in.string() + " --color lab --out " + (dir_ / "lab.idx").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bytes = slurp(dir_ / "lab.idx");
  ASSERT_GE(bytes.size(), 20u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0x0B);
  EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 0x04);
  EXPECT_EQ(bytes.size(), 20u + 2u * 3u * 8u * 8u * 2u);
}

TEST_F(Cli, TrainIsReproducibleAndEvalReadsWeights) {
  const auto cfg = config();
  const auto a = run("train --config " + cfg.string() + " --quiet --snr --output-dir " + (dir_ / "run").string());
  ASSERT_EQ(a.code, 0) << a.err;
  const auto first = slurp(dir_ / "run" / "history.csv");
  EXPECT_EQ(first.substr(0, first.find('\n')), "epoch,train_loss,val_acc,epoch_ms,snr");
  EXPECT_TRUE(fs::exists(dir_ / "run" / "snr.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "weights.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "run.json"));

  const auto b = run("train --config " + cfg.string() + " --quiet --snr --workers 2 --output-dir " +
                     (dir_ / "run2").string());
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(first, slurp(dir_ / "run2" / "history.csv"));

  const auto ev = run("eval --config " + cfg.string() + " --weights " + (dir_ / "run" / "weights.json").string());
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto e = json::parse(ev.out);
  EXPECT_EQ(e["samples"], 8);
  const std::string pct = e["accuracy_pct"];
  EXPECT_EQ(pct.back(), '%');
  EXPECT_EQ(pct.size() - pct.find('.'), 4u);

  const auto missing = run("eval --config " + cfg.string() + " --weights " + (dir_ / "nope.json").string());
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(json::parse(missing.err)["command"], "eval");
}

TEST_F(Cli, TrainRejectsZeroEpochs) {
  const auto r = run("train --config " + config().string() + " --epochs 0");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(json::parse(r.err)["message"].get<std::string>().find("epochs"), std::string::npos);
}

TEST_F(Cli, SnrReportPrintsOneLinePerMode) {
  const auto r = run("snr-report --config " + config().string() + " --output-dir " + (dir_ / "snr").string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> modes;
  while (std::getline(lines, line)) {
    if (line.rfind("mode=", 0) == 0) modes.push_back(line.substr(5, line.find(' ') - 5));
    EXPECT_NE(line.find("mean_snr="), std::string::npos) << line;
  }
  EXPECT_EQ(modes, (std::vector<std::string>{"rate", "bitplane", "combined"}));
  EXPECT_TRUE(fs::exists(dir_ / "snr" / "snr.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "snr" / "snr_means.csv"));
}

TEST_F(Cli, BenchReportsOverhead) {
  const auto in = images(8);
  const auto r = run("bench --dataset " + in.string() +
                     " --modes rate,combined --colors rgb,hsl --repeats 3 --batches 2 --batch-size 4 --channels 4"
                     " --hidden 16 --out " + (dir_ / "bench.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(dir_ / "bench.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "mode,color,t_prime,repeats,mean_ms,overhead_pct");
  std::map<std::string, std::vector<std::string>> rows;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 6u) << line;
    EXPECT_EQ(f[3], "3");
    rows[f[0] + "/" + f[1]] = f;
  }
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows["combined/rgb"][2], "18");
  EXPECT_EQ(rows["combined/hsl"][2], "19");
  EXPECT_EQ(std::stod(rows["rate/rgb"][5]), 0.0);
  EXPECT_GT(std::stod(rows["combined/rgb"][5]), 0.0);
}
