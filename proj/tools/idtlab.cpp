#include <iostream>

#include "idt/cli.hpp"

int main(int argc, char** argv) {
  return idt::cli::main_entry(argc, argv, std::cout, std::cerr);
}
