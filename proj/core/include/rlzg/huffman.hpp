#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlzg/bit_io.hpp"

namespace rlzg {

inline constexpr int kMaxCodeLength = 15;
inline constexpr std::size_t kSerializedTableSize = 128;

using ByteCounts = std::array<std::uint64_t, 256>;

// Canonical order-0 prefix code over byte values, fully determined by its
// code lengths. Codes are assigned in (length, byte value) order.
class HuffmanTable {
 public:
  HuffmanTable() = default;

  // Builds an optimal code for `counts`, limited to 15-bit codewords. A lone
  // symbol gets a 1-bit code. Throws kInvalidArgument when every count is 0.
  static HuffmanTable build(const ByteCounts& counts);

  // Validates lengths (0..15, at least one symbol, Kraft sum <= 1) and derives
  // codes. Throws a corrupt-archive error on violation.
  static HuffmanTable from_lengths(const std::array<std::uint8_t, 256>& lengths);

  static HuffmanTable deserialize(std::span<const std::uint8_t> bytes);
  // Two 4-bit lengths per byte, even symbol in the low nibble.
  std::array<std::uint8_t, kSerializedTableSize> serialize() const;

  int length(std::uint8_t symbol) const noexcept { return lengths_[symbol]; }
  std::uint32_t code(std::uint8_t symbol) const noexcept { return codes_[symbol]; }
  const std::array<std::uint8_t, 256>& lengths() const noexcept { return lengths_; }
  int max_length() const noexcept { return max_length_; }
  std::size_t symbol_count() const noexcept { return symbol_count_; }

  // Total coded size of a tally under this table; throws if a counted symbol
  // has no code.
  std::uint64_t cost_bits(const ByteCounts& counts) const;

  // Decodes one symbol. Throws on truncation or an unassigned codeword.
  std::uint8_t decode_symbol(BitReader& reader) const {
    if (max_length_ == 0) corrupt("decoding with an empty Huffman table");
    const std::uint32_t window = reader.peek(max_length_);
    const std::uint16_t entry = lookup_[window];
    const int len = entry & 0xf;
    if (len == 0) corrupt("invalid Huffman codeword");
    reader.consume(len);
    return static_cast<std::uint8_t>(entry >> 4);
  }

  void encode_symbol(BitWriter& writer, std::uint8_t symbol) const {
    if (lengths_[symbol] == 0) throw_missing(symbol);
    writer.write(codes_[symbol], lengths_[symbol]);
  }

  friend bool operator==(const HuffmanTable& a, const HuffmanTable& b) { return a.lengths_ == b.lengths_; }

 private:
  void assign_codes();
  [[noreturn]] static void throw_missing(std::uint8_t symbol);

  std::array<std::uint8_t, 256> lengths_{};
  std::array<std::uint32_t, 256> codes_{};
  // Indexed by the next max_length_ bits: (symbol << 4) | code length, 0 = invalid.
  std::vector<std::uint16_t> lookup_;
  int max_length_ = 0;
  std::size_t symbol_count_ = 0;
};

ByteCounts tally(std::span<const std::uint8_t> bytes);

// Appends the codewords of `bytes`; returns the number of bits written.
std::uint64_t encode_stream(std::span<const std::uint8_t> bytes, const HuffmanTable& table, BitWriter& writer);

// Decodes exactly `count` symbols.
std::vector<std::uint8_t> decode_stream(BitReader& reader, const HuffmanTable& table, std::size_t count);

}  // namespace rlzg
