#include <iostream>
#include <string>
#include <vector>

#include "latfuse_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return latfuse::cli::run_cli(args, std::cout, std::cerr);
}
