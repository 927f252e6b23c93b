#include <iostream>
#include <string>
#include <vector>

#include "xsplice/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return xsplice::cli::run(args, std::cout, std::cerr);
}
