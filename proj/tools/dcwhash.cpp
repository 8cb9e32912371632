// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include "dcwhash/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dcwhash::cli::run(args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "dcwhash: " << e.what() << '\n';
    return 1;
  }
}
