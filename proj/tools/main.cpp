// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "spectrarec/cli.hpp"

int main(int argc, char** argv) {
  return spectrarec::cli::run(argc, argv, std::cout, std::cerr);
}
