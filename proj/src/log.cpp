#include "htep/log.hpp"

#include <cstdlib>
#include <iostream>

namespace htep {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("HTEP_LOG");
    if (!env || !*env) return 0;
    return std::atoi(env);
  }();
  return level;
}

void log_line(int level, const std::string& text) {
  std::cerr << "[htep:" << level << "] " << text << "\n";
}

}  // namespace htep
