#include <string>
#include <vector>

#include "powerpost/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return powerpost::run_cli(args);
}
