#include <string>
#include <vector>

#include "mmrelax/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mmrelax::parse_and_dispatch(args);
}
