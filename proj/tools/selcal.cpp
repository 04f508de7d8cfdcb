#include <iostream>
#include <string>
#include <vector>

#include "selcal/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return selcal::cli::run(args, std::cout, std::cerr);
}
