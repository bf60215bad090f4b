#include <iostream>

#include "trendvol/cli.hpp"

int main(int argc, char** argv) {
  return trendvol::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
