#include <iostream>

#include "cavbec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cavbec::run_cli(args, std::cout, std::cerr);
}
