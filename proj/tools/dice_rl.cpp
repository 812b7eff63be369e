#include <iostream>
#include <string>
#include <vector>

#include "dice/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dice::cli::run_cli(args, std::cout, std::cerr);
}
