#include <iostream>
#include <string>
#include <vector>

#include "fsde/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return fsde::cli::run(args, std::cout, std::cerr);
}
