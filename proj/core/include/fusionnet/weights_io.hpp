#pragma once

#include <span>
#include <vector>

#include "fusionnet/io_util.hpp"
#include "fusionnet/network.hpp"

namespace fusionnet {

// "FNW1" followed by records until end of input. Each record: u32 name length,
// name bytes, u32 rank, rank x u32 dims, then float32 values; all little-endian.
[[nodiscard]] Bytes write_weights(const std::vector<NamedTensor>& tensors);
[[nodiscard]] std::vector<NamedTensor> read_weights(std::span<const std::uint8_t> bytes);

}  // namespace fusionnet
