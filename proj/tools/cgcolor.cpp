#include <exception>
#include <iostream>

#include "cgcolor/cli.hpp"

int main(int argc, char** argv) {
  try {
    return cgcolor::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 70;
  }
}
