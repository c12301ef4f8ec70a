#include <doctest.h>

#include <fstream>

#include "test_util.hpp"
#include "vstain/config_file.hpp"

using namespace vstain;

using Entries = std::vector<std::pair<std::string, std::string>>;

TEST_CASE("config text parsing") {
  const Entries e = parse_config_text("# run\nsteps = 40\n\n  lr=0.01   # fast\nsplit-mode = study\r\n");
  CHECK(e == Entries{{"steps", "40"}, {"lr", "0.01"}, {"split-mode", "study"}});
  CHECK(parse_config_text("").empty());
  CHECK(parse_config_text("flag =").front().second.empty());
}

TEST_CASE("malformed config lines") {
  CHECK_THROWS_AS(parse_config_text("steps 40\n"), ConfigFileError);
  CHECK_THROWS_AS(parse_config_text("= 3\n"), ConfigFileError);
  CHECK_THROWS_AS(parse_config_text("two words = 3\n"), ConfigFileError);
  CHECK_THROWS_WITH_AS(parse_config_text("a = 1\nb = 2\na = 3\n"), "config line 3: duplicate key a",
                       ConfigFileError);
  CHECK_THROWS_AS(read_config_file(test::scratch_dir("cfg_missing") / "none.cfg"), ConfigFileError);
}

TEST_CASE("command-line flags win over config entries") {
  const Entries e = {{"steps", "40"}, {"lr", "0.01"}, {"seed", "3"}};
  const std::vector<std::string> args = {"--steps", "7", "--seed=9", "--out", "x"};
  CHECK(merge_config_args(e, args) ==
        std::vector<std::string>{"--lr=0.01", "--steps", "7", "--seed=9", "--out", "x"});
  CHECK(merge_config_args(e, {}) == std::vector<std::string>{"--steps=40", "--lr=0.01", "--seed=3"});
}

TEST_CASE("config files are read from disk") {
  const auto path = test::scratch_dir("cfg_read") / "run.cfg";
  std::ofstream(path) << "batch = 2\n";
  CHECK(read_config_file(path) == Entries{{"batch", "2"}});
}
