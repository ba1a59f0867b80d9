#include <iostream>

#include "commands.hpp"
#include "ebipla/parallel.hpp"

int main(int argc, char** argv) {
  ebipla::tune_allocator();
  return ebipla::cli::run_cli(argc, argv, std::cout, std::cerr);
}
