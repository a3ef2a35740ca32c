// Acceptance suite: one pass/fail line per criterion.
// Usage: acceptance --cli <path-to-seco> --work <scratch-dir>

#include <iostream>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::cerr << "acceptance suite not yet implemented\n";
  return 1;
}
