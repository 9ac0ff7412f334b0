#include <string>
#include <vector>

#include "ptrm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ptrm::cli::run(std::move(args));
}
