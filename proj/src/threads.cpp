#include "svfem/types.hpp"

#ifdef SVFEM_HAVE_OPENMP
#include <omp.h>
#endif

namespace svfem {

int max_threads() {
#ifdef SVFEM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace svfem
