#include <iostream>
#include <string>
#include <vector>

#include "sumrate/cli.hpp"

int main(int argc, char** argv) {
  return sumrate::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
