#include <iostream>
#include <string>
#include <vector>

#include "qrecycle/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qrecycle::run_cli(args, std::cout, std::cerr);
}
