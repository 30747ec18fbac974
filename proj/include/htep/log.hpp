#pragma once

#include <sstream>

namespace htep {

// Levels: 0 silent, 1 search progress, 2 per-node trace. Read once from the
// HTEP_LOG environment variable.
int log_level();

void log_line(int level, const std::string& text);

}  // namespace htep

#define HTEP_LOG_AT(lvl, expr)                        \
  do {                                                \
    if (::htep::log_level() >= (lvl)) {               \
      std::ostringstream htep_log_stream;             \
      htep_log_stream << expr;                        \
      ::htep::log_line((lvl), htep_log_stream.str()); \
    }                                                 \
  } while (0)
