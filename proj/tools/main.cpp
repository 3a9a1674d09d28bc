#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto r = haantjes::cli::run(args, std::getenv("HAANTJES_SEED"));
  std::cout << r.out;
  std::cerr << r.err;
  return r.exit_code;
}
