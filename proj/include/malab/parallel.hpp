#ifndef MALAB_PARALLEL_HPP
#define MALAB_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <functional>

namespace malab {

/// Worker cap for parallel loops; 0 restores the hardware default.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() workers with a static
/// partition. Results must be written by index so the outcome does not
/// depend on the schedule. The exception of the lowest failing index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace malab

#endif
