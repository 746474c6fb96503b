#pragma once

#include <cstdio>
#include <string>

namespace adasmooth {

//! 17 significant digits: enough for an exact round trip of any double.
inline std::string
format_double(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace adasmooth
