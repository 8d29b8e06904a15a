#include <iostream>

#include "latbal/cli.hpp"

int main(int argc, char** argv) {
  return latbal::run_cli(argc, argv, std::cout, std::cerr);
}
