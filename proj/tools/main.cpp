#include <string>
#include <vector>

#include "subspace_uq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return subspace_uq::run_cli(args);
}
