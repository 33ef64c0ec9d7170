#include <iostream>
#include <string>
#include <vector>

#include "eraser/cli.hpp"

int main(int argc, char** argv) {
  return eraser::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
