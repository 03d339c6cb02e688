#include <cstdio>

int main() {
  std::puts("adrec: not wired yet");
  return 0;
}
