#include <iostream>
#include <string>
#include <vector>

#include "watsonmle_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return watsonmle::cli::run(std::move(args), std::cout, std::cerr);
}
