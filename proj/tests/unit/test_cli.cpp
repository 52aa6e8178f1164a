#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "parallax/dataio.hpp"

using namespace parallax;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "parallax");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "parallax_cli_tests";
    fs::remove_all(root_);
    fs::create_directories(root_);
    ASSERT_EQ(run({"gen", "--preset", "standard", "--out", (root_ / "std").string()}).code, 0);
    ASSERT_EQ(run({"gen", "--preset", "plane_only", "--out", (root_ / "plane").string()}).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string path(const std::string& rel) { return (root_ / rel).string(); }

  static fs::path root_;
};

fs::path Cli::root_;

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"gen"}).code, 2);  // --out is required
  EXPECT_EQ(run({"solve", "--sample", path("std"), "--out", path("x"), "--flow", "magic"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, DomainErrorsExitOneWithJson) {
  fs::create_directories(path("empty"));
  const Invocation r = run({"solve", "--sample", path("empty"), "--flow", "gt", "--out", path("x")});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["error"]["code"], "MissingFile");
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, GroundTruthFlowPipelineIsExact) {
  const Invocation s = run({"solve", "--sample", path("std"), "--flow", "gt", "--out", path("solve_gt")});
  ASSERT_EQ(s.code, 0) << s.out << s.err;
  EXPECT_EQ(nlohmann::json::parse(s.out)["command"], "solve");
  const Invocation e = run({"eval", "--pred", path("solve_gt"), "--gt", path("std"), "--out",
                     path("eval_gt")});
  ASSERT_EQ(e.code, 0) << e.out << e.err;
  const auto metrics = nlohmann::json::parse(io::read_text(path("eval_gt/metrics.json")));
  ASSERT_EQ(metrics["depth_mae"].size(), 3u);
  for (const auto& b : metrics["depth_mae"]) {
    ASSERT_FALSE(b["mae"].is_null());
    EXPECT_LT(b["mae"].get<double>(), 0.01);
  }
  EXPECT_TRUE(fs::exists(path("eval_gt/metrics.csv")));
}

TEST_F(Cli, ReconOnPlaneOnlyGivesZeroHeight) {
  const Invocation r = run({"recon", "--sample", path("plane"), "--out", path("recon_plane")});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const HeightMap h = io::read_map<HeightMap>(path("recon_plane/height.pfm"));
  ASSERT_GT(h.valid_count(), 1000u);
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      if (h.valid(x, y)) EXPECT_EQ(h(x, y), 0.0);
    }
  }
  EXPECT_TRUE(fs::exists(path("recon_plane/points.ply")));
  EXPECT_TRUE(fs::exists(path("recon_plane/height.ppm")));
}

TEST_F(Cli, FitPlaneMatchesPair) {
  const Invocation r = run({"fit-plane", path("std/points.ply"), "--reference", path("std/pair.json"),
                     "--out", path("plane.json")});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto j = nlohmann::json::parse(r.out)["result"];
  EXPECT_LT(j["reference"]["angle_deg"].get<double>(), 0.5);
  EXPECT_LT(j["reference"]["h_c_error"].get<double>(), 0.01);
}

TEST_F(Cli, WarpAndEnergyReports) {
  const Invocation w = run({"warp", "--sample", path("std"), "--out", path("warp")});
  ASSERT_EQ(w.code, 0) << w.out << w.err;
  EXPECT_LT(nlohmann::json::parse(w.out)["result"]["road_mean_abs_diff"].get<double>(), 2.0 / 255);
  const Invocation e = run({"energy", "--sample", path("std"), "--alpha", "0.85"});
  ASSERT_EQ(e.code, 0) << e.out << e.err;
  const auto j = nlohmann::json::parse(e.out)["result"];
  EXPECT_LT(j["E_p"].get<double>(), j["E_p_homography_only"].get<double>());
  EXPECT_EQ(j["E_s"].get<double>(), 0.0);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* d : {"rep_a", "rep_b"}) {
    ASSERT_EQ(run({"--seed", "3", "solve", "--sample", path("std"), "--flow", "gt", "--flow-noise",
                   "0.5", "--out", path(d)}).code, 0);
  }
  for (const auto& e : fs::directory_iterator(path("rep_a"))) {
    EXPECT_EQ(io::read_text(e.path()), io::read_text(path("rep_b") / e.path().filename()))
        << e.path().filename();
  }
}
