#include <iostream>
#include <string>
#include <vector>

#include "mpx/cli.hpp"

int main(int argc, char** argv) {
  return mpx::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
