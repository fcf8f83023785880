#include <iostream>

int main() {
  std::cout << "microforge (under construction)\n";
  return 0;
}
