#include <iostream>

#include "emrelax/cli.hpp"

int main(int argc, char** argv) {
  return emrelax::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
