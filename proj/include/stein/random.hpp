#pragma once

#include <cstdint>
#include <random>

namespace stein {

using Engine = std::mt19937_64;

/// Private stream for (seed, stream index): replications and retries each get
/// their own engine so results do not depend on scheduling.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Engine(seq);
}

}  // namespace stein
