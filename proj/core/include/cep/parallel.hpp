#ifndef CEP_PARALLEL_HPP
#define CEP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace cep {

/// Runs fn(i) for i in [0, count). With threads <= 1 this is a plain loop;
/// otherwise a worker pool pulls indices from an atomic counter. Callers must
/// write results into per-index slots, which keeps output independent of
/// scheduling. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace cep

#endif
