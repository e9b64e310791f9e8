// Built with a deliberately wrong distance formula. Succeeds only if the
// parabolic exponent criterion notices.

#include <cstdlib>
#include <iostream>

#include "kleinian/acceptance.hpp"

int main() {
  const auto results = kleinian::acceptance::run("parabolic-exponent");
  if (results.size() != 1) {
    std::cout << "criterion not found" << std::endl;
    return EXIT_FAILURE;
  }
  std::cout << "mutated build: " << kleinian::acceptance::format_line(results[0]) << std::endl;
  if (results[0].passed) {
    std::cout << "mutation survived" << std::endl;
    return EXIT_FAILURE;
  }
  std::cout << "mutation detected" << std::endl;
  return EXIT_SUCCESS;
}
