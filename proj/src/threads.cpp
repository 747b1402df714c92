#include "sgiif/common.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgiif
{
int configured_threads()
{
  char const *value = std::getenv("SGIIF_THREADS");
  if (value == nullptr || *value == '\0')
  {
    return 0;
  }
  char *end    = nullptr;
  long const n = std::strtol(value, &end, 10);
  expect(end != value && *end == '\0' && n >= 0, "SGIIF_THREADS must be a non-negative integer");
  return static_cast<int>(n);
}

void apply_thread_limit()
{
#ifdef _OPENMP
  int const n = configured_threads();
  if (n > 0)
  {
    omp_set_num_threads(n);
  }
#endif
}

} // namespace sgiif
