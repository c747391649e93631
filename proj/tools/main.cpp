#include <iostream>

#include "eoscope/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return eoscope::cli::run(args, std::cout, std::cerr);
}
