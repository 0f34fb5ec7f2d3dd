#pragma once

#include "cggm/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cggm {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream identifiers (splitmix64 finaliser) so that
/// replications, restarts and methods each own an independent generator.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> streams);

Matrix standard_normal(Index rows, Index cols, Rng& rng);

/// Entries uniformly +1 or -1.
Matrix rademacher(Index rows, Index cols, Rng& rng);

}  // namespace cggm
