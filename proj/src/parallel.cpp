#include "tractdim/parallel.hpp"

namespace tractdim {

namespace {
std::atomic<unsigned> g_jobs{0};
}

void set_jobs(unsigned n) { g_jobs.store(n); }

unsigned jobs() {
    const unsigned j = g_jobs.load();
    if (j != 0) return j;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace tractdim
