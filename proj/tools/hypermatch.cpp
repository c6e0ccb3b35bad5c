#include <iostream>
#include <string>
#include <vector>

#include "hypermatch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hypermatch::run_cli(args, std::cout, std::cerr);
}
