#include <cstdio>

int main() {
  std::puts("fptb: not wired up yet");
  return 1;
}
