#pragma once

#include <cstddef>
#include <cstdint>

namespace cvdsim {

// Canonical run configuration. The seed is the repository's reference
// realisation: regenerating with these values reproduces the checked
// summary tables bit for bit.
inline constexpr std::uint64_t kDefaultMasterSeed = 11;
inline constexpr std::size_t kDefaultCohortSize = 50000;
inline constexpr double kDefaultTargetIncidence = 0.0402;

}  // namespace cvdsim
