#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "fmt/format.h"
#include "gtest/gtest.h"

#include "cfta/io.hpp"

using namespace cfta;
namespace fs = std::filesystem;

namespace {

fs::path const source_dir{CFTA_SOURCE_DIR};
fs::path const toy = source_dir / "data" / "toy_city";

int run(std::string const& args) {
  auto const cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", CFTA_CLI, args);
  auto const status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           fmt::format("cfta_cli_{}_{}", ::getpid(),
                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(std::string const& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(cli, usage_errors_exit_1) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("ingest --feed x"), 1);
  EXPECT_EQ(run("scenario --base x --out y"), 1);
  EXPECT_EQ(run("monetise --mean-dt -16.5"), 1);
  EXPECT_EQ(run("matrix --feed nameonly --boundary b --out o"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(cli, data_errors_exit_2) {
  EXPECT_EQ(run(fmt::format("ingest --feed {} --prefix t --out {}", (toy / "missing").string(),
                            path("out"))),
            2);
  EXPECT_EQ(run(fmt::format("grid --boundary {} --out {}", (toy / "missing.geojson").string(),
                            path("g.geojson"))),
            2);
  write_file_atomic(dir_ / "bad.yaml", "name: x\nedits: [{type: Teleport}]\n");
  EXPECT_EQ(run(fmt::format("scenario --base {} --spec {} --out {}", (toy / "tram").string(),
                            path("bad.yaml"), path("sc"))),
            2);
}

TEST_F(cli, end_to_end) {
  ASSERT_EQ(run(fmt::format("ingest --feed {} --feed {} --prefix t --prefix b --out {}",
                            (toy / "tram").string(), (toy / "bus").string(), path("ingest"))),
            0);
  ASSERT_EQ(run(fmt::format("scenario --base {} --builtin full --out {}", path("ingest/feed"),
                            path("full"))),
            0);
  ASSERT_EQ(run(fmt::format("matrix --feed baseline={} --feed full={} --boundary {} --cell 1000 "
                            "--slice AM=2025-06-10T08:00 --offsets 0 --out {}",
                            path("ingest/feed"), path("full/feed"),
                            (toy / "boundary.geojson").string(), path("panel"))),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "panel" / "full_AM_0610_0800.csv"));
  ASSERT_EQ(run(fmt::format("analyze --panel {} --out {}", path("panel"), path("analysis"))), 0);
  EXPECT_TRUE(fs::exists(dir_ / "analysis" / "summary.csv"));
  ASSERT_EQ(run(fmt::format("grid --boundary {} --cell 1000 --out {}",
                            (toy / "boundary.geojson").string(), path("tiles.geojson"))),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "tiles.geojson"));
}

TEST_F(cli, monetise) {
  ASSERT_EQ(run(fmt::format("monetise --sensitivity --out {}", path("m"))), 0);
  for (auto const* f : {"benefits.csv", "crf.csv", "capex.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "m" / f)) << f;
  }
  ASSERT_EQ(run(fmt::format("monetise --mean-dt -36.1 --trips 250e6 --vot 10 --out {}",
                            path("one"))),
            0);
  EXPECT_NE(read_file(dir_ / "one" / "monetise.csv").find("\r\n"), std::string::npos);
}
