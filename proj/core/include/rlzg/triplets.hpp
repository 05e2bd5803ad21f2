#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlzg/error.hpp"
#include "rlzg/genome.hpp"

namespace rlzg {

// Three base-5 symbols per byte, first symbol most significant:
// byte = 25*s0 + 5*s1 + s2 (always < 125). A partial final triplet is padded
// with A; the reader truncates using the known symbol count.
inline constexpr std::uint8_t pack_triplet(Symbol s0, Symbol s1, Symbol s2) noexcept {
  return static_cast<std::uint8_t>(25 * s0 + 5 * s1 + s2);
}

inline constexpr std::size_t packed_size(std::size_t symbols) noexcept { return (symbols + 2) / 3; }

void pack_triplets(std::span<const Symbol> symbols, std::vector<std::uint8_t>& out);

// Appends `count` symbols decoded from `bytes` (which must hold packed_size(count) bytes).
void unpack_triplets(std::span<const std::uint8_t> bytes, std::size_t count, std::vector<Symbol>& out);

// Splits one packed byte; throws a corrupt-archive error for values >= 125.
inline void split_triplet(std::uint8_t byte, Symbol out[3]) {
  if (byte >= 125) corrupt("packed triplet byte out of range");
  out[0] = static_cast<Symbol>(byte / 25);
  out[1] = static_cast<Symbol>((byte / 5) % 5);
  out[2] = static_cast<Symbol>(byte % 5);
}

}  // namespace rlzg
