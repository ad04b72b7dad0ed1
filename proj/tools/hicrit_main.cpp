#include <iostream>
#include <string>
#include <vector>

#include "hicrit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hicrit::cli::dispatch(args, std::cout, std::cerr);
}
