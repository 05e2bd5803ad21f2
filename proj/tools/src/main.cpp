#include <iostream>

#include "rlzg_tools/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return rlzg::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
