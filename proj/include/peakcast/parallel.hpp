#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace peakcast {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// must produce bit-identical results.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n). Work items must be independent. The first
/// exception raised by any item is rethrown on the calling thread.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body)
{
    if (exec == Execution::serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace peakcast
