#include <doctest.h>

#include <filesystem>

#include "mmrelax/cli.hpp"

using namespace mmrelax;

TEST_CASE("list-scenarios succeeds") {
  CHECK(parse_and_dispatch({"list-scenarios"}) == 0);
}

TEST_CASE("unknown flags exit with status 2") {
  CHECK(parse_and_dispatch({"run", "blowup_p2", "--frobnicate"}) == 2);
}

TEST_CASE("unknown scenario exits with status 2") {
  CHECK(parse_and_dispatch({"run", "blowup_p9"}) == 2);
}

TEST_CASE("invariant violations exit with status 2 before any run") {
  // ip < N/2 violated (and N below the minimum)
  CHECK(parse_and_dispatch({"run", "blowup_p2", "--N", "5", "--smoothing-ip",
                            "3"}) == 2);
  CHECK(parse_and_dispatch({"run", "blowup_p2", "--N", "200", "--smoothing-ip",
                            "150"}) == 2);
  CHECK(parse_and_dispatch({"run", "blowup_p2", "--tau", "fixed:-1"}) == 2);
}

TEST_CASE("missing subcommand exits with status 2") {
  CHECK(parse_and_dispatch({}) == 2);
}

TEST_CASE("a short mesh-only run completes and exports") {
  const int rc = parse_and_dispatch({"run", "example1", "--N", "40", "--tend",
                                     "0.1", "--out", "test_cli_out"});
  CHECK(rc == 0);
  CHECK(std::filesystem::exists("test_cli_out/summary.json"));
  CHECK(std::filesystem::exists("test_cli_out/trajectories.csv"));
  CHECK(std::filesystem::exists("test_cli_out/tau.csv"));
  CHECK(std::filesystem::exists("test_cli_out/steps.csv"));
  std::filesystem::remove_all("test_cli_out");
}
