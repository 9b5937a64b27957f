#include <string>
#include <vector>

#include "revcon/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return revcon::run_cli(std::move(args));
}
