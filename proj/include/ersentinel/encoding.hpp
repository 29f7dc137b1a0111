#pragma once

#include <cstdint>
#include <vector>

#include "ersentinel/encounter.hpp"

namespace ersentinel {

/// Deterministic byte layout of an encounter record, excluding the two
/// signatures and the ground-truth annotation. Little-endian fixed-width
/// fields, so the output is byte-identical across platforms. This is the
/// message that gets signed.
std::vector<std::uint8_t> canonical_encode(const EncounterRecord& er);

}  // namespace ersentinel
