#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  return etbox::cli::run(std::vector<std::string>(argv, argv + argc));
}
