#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "mfg/errors.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MFGLAB_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mfglab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Config, DefaultsAndOverrides) {
  std::istringstream in("[model]\nname = ou\n[solver]\nparticles = 64\n[study]\nN_list = 4, 16\n[run]\nseed = 9\n");
  const auto cfg = mfglab::parse_config(in);
  EXPECT_EQ(cfg.model, "ou");
  EXPECT_EQ(cfg.particles, 64u);
  EXPECT_EQ(cfg.N_list, (std::vector<std::size_t>{4, 16}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.k, 5);
}

TEST(Config, UnknownKeyIsNamed) {
  std::istringstream in("[solver]\nparticlez = 64\n");
  try {
    mfglab::parse_config(in);
    FAIL();
  } catch (const mfg::InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("solver.particlez"), std::string::npos);
  }
}

TEST(Config, InvalidValuesRejected) {
  for (const char* text : {"[solver]\nparticles = 3\n", "[discretization]\nk = abc\n", "[model]\nname = ou\na = 1\n",
                           "[study]\nM_list = 2,1\n", "[bogus]\nx = 1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(mfglab::parse_config(in), mfg::InvalidArgument) << text;
  }
}

TEST(Config, HashIgnoresOutputOnly) {
  mfglab::ExperimentConfig a, b;
  b.output = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Cli, SolveWritesArtifacts) {
  const auto dir = scratch("solve");
  ASSERT_EQ(run("solve-mfg --config " MFGLAB_CONFIG_DIR "/small.ini --out " + (dir / "out").string(), dir / "log"), 0)
      << slurp(dir / "log");
  for (const char* f : {"flow.csv", "value.csv", "policy.csv", "summary.csv", "oracle.csv", "iterations.jsonl",
                        "events.jsonl", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  const auto manifest = slurp(dir / "out" / "manifest.json");
  EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
  EXPECT_NE(manifest.find("\"version\""), std::string::npos);
  const auto events = slurp(dir / "out" / "events.jsonl");
  EXPECT_NE(events.find("\"event\":\"study_finished\""), std::string::npos);
}

TEST(Cli, UnknownKeyExitsWithTwo) {
  const auto dir = scratch("badkey");
  std::ofstream(dir / "bad.ini") << "[solver]\nparticles = 64\nwarp = 9\n";
  EXPECT_EQ(run("solve-mfg --config " + (dir / "bad.ini").string() + " --out " + (dir / "out").string(), dir / "log"),
            2);
  EXPECT_NE(slurp(dir / "log").find("solver.warp"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto dir = scratch("seed");
  const std::string base = "simulate-nplayer --config " MFGLAB_CONFIG_DIR "/small.ini";
  ASSERT_EQ(run(base + " --seed 1 --out " + (dir / "a").string(), dir / "log"), 0);
  ASSERT_EQ(run(base + " --seed 2 --out " + (dir / "b").string(), dir / "log"), 0);
  ASSERT_EQ(run(base + " --out " + (dir / "c").string(), dir / "log"), 0);
  EXPECT_NE(slurp(dir / "a" / "players.csv"), slurp(dir / "b" / "players.csv"));
  EXPECT_EQ(slurp(dir / "a" / "players.csv"), slurp(dir / "c" / "players.csv"));
}

TEST(Cli, RerunIsByteIdentical) {
  const auto dir = scratch("rerun");
  const std::string base = "nash-gap --config " MFGLAB_CONFIG_DIR "/small.ini";
  ASSERT_EQ(run(base + " --out " + (dir / "a").string(), dir / "log"), 0);
  ASSERT_EQ(run(base + " --threads 3 --out " + (dir / "b").string(), dir / "log"), 0);
  for (const char* f : {"gaps.csv", "conditions.csv", "iterations.jsonl"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Cli, MissingConfigIsUsageError) {
  const auto dir = scratch("usage");
  EXPECT_EQ(run("diagnostics --config /nonexistent.ini", dir / "log"), 2);
  EXPECT_EQ(run("no-such-study", dir / "log"), 2);
}

}  // namespace
