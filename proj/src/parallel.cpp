#include "stein/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace stein {

std::size_t thread_count() {
    if (const char* env = std::getenv("STEIN_PRELIMIT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace stein
