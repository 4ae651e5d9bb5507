#include "qpspec/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <mutex>

namespace qpspec {

int thread_count() {
    if (const char* s = std::getenv("QPSPEC_THREADS")) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::exception_ptr first;
    std::mutex m;
    const long long total = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (long long i = 0; i < total; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lk(m);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace qpspec
