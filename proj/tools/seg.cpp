#include <string>
#include <vector>

#include "topseg/cli.hpp"

int main(int argc, char** argv) {
  return topseg::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
