#pragma once

// OPENBLAS_CORETYPE is read once when libopenblas loads, so a process that
// needs a different core has to restart itself with the variable set.

#include <cstdio>
#include <cstdlib>
#include <unistd.h>

namespace pdwg_tools {

inline void pin_blas_core(char** argv) {
#ifdef PDWG_BLAS_CORETYPE
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  ::setenv("OPENBLAS_CORETYPE", PDWG_BLAS_CORETYPE, 1);
  ::execv("/proc/self/exe", argv);
  std::fprintf(stderr, "warning: could not restart with OPENBLAS_CORETYPE=%s\n", PDWG_BLAS_CORETYPE);
#else
  (void)argv;
#endif
}

}  // namespace pdwg_tools
