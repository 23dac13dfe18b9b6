#include <iostream>
#include <string>
#include <vector>

#include "smartq_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return smartq::cli::run(args, std::cout, std::cerr);
}
