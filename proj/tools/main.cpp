#include <iostream>

#include "firelog/cli.hpp"

int main(int argc, char** argv) {
  firelog::cli::configure_logging();
  return firelog::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
