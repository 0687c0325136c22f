#include "wickmart/parallel.hpp"

namespace wickmart {

namespace {
int g_threads = 0;  // 0 = hardware count
}

int default_threads() {
  if (g_threads > 0) return g_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_threads(int n) { g_threads = n; }

}  // namespace wickmart
