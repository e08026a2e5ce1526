#ifndef TVLAB_FINGERPRINT_HPP
#define TVLAB_FINGERPRINT_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "tvlab/discretization.hpp"

namespace tvlab {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// 16 hex digits.
std::string hex_digest(std::uint64_t value);

/// Digest of everything that determines the generator: coefficients,
/// kernel, boundary family, variant and both grids.
std::string fingerprint(const DiscreteGenerator& genr);

}  // namespace tvlab

#endif  // TVLAB_FINGERPRINT_HPP
