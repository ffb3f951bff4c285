#ifndef DIMPULSE_PARALLEL_HPP
#define DIMPULSE_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <span>

namespace dimpulse {

/// Resolves a thread-count request: requested > 0 wins, otherwise the
/// DELAY_IMPULSE_THREADS environment variable, otherwise hardware cores.
int effective_threads(int requested);

/// Static-chunked parallel loop over [0, n). Work items must be
/// independent; results must not depend on the chunking.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Order-insensitive pairwise summation (same result for any chunking of
/// the producers, since it only depends on the final array).
double pairwise_sum(std::span<const double> xs);

} // namespace dimpulse

#endif // DIMPULSE_PARALLEL_HPP
