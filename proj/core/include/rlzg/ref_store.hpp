#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlzg/genome.hpp"
#include "rlzg/huffman.hpp"

namespace rlzg {

inline constexpr std::uint32_t kRefBlockSize = 8192;

// Byte offsets of each reference block inside the coded payload, plus a
// terminator. Equal neighbouring offsets mark a block made only of N.
struct RefBlockIndex {
  std::uint32_t block_size = kRefBlockSize;
  std::uint64_t symbol_count = 0;
  std::vector<std::uint64_t> start_offsets;

  std::size_t block_count() const noexcept { return start_offsets.empty() ? 0 : start_offsets.size() - 1; }
  bool all_n(std::size_t block) const { return start_offsets[block] == start_offsets[block + 1]; }

  friend bool operator==(const RefBlockIndex&, const RefBlockIndex&) = default;
};

// The stored reference: triplet-packed, Huffman-coded, one shared table,
// every block flushed to a byte boundary. `table` is empty when there is no
// payload at all (empty or all-N reference).
struct EncodedReference {
  RefBlockIndex index;
  std::vector<std::uint8_t> payload;
  std::optional<HuffmanTable> table;
};

// Borrowed view used by the decoder; the payload usually lives inside an
// archive buffer.
struct ReferenceView {
  const RefBlockIndex* index = nullptr;
  std::span<const std::uint8_t> payload;
  const HuffmanTable* table = nullptr;

  std::uint64_t length() const noexcept { return index->symbol_count; }
};

inline ReferenceView view_of(const EncodedReference& ref) {
  return {&ref.index, ref.payload, ref.table ? &*ref.table : nullptr};
}

EncodedReference encode_reference(std::span<const Symbol> symbols, std::uint32_t block_size = kRefBlockSize);

struct RefReadStats {
  std::uint64_t payload_bytes_read = 0;
  std::uint64_t blocks_decoded = 0;  // blocks that needed Huffman decoding
};

// Decodes [start, end) touching only the blocks that overlap it. Throws
// kOutOfRange for a bad range, a corrupt-archive error for bad payload.
std::vector<Symbol> decode_reference_range(const ReferenceView& ref, std::uint64_t start, std::uint64_t end,
                                           RefReadStats* stats = nullptr);

// Checks offsets are monotone, in bounds and sized for the symbol count.
void validate_reference_index(const RefBlockIndex& index, std::size_t payload_size);

// Where a reservoir phrase came from: a literal run in an encoded sequence.
struct ReservoirEntry {
  std::uint32_t origin_sequence = 0;
  std::uint64_t origin_position = 0;
  std::uint64_t length = 0;

  friend bool operator==(const ReservoirEntry&, const ReservoirEntry&) = default;
};

struct ReservoirPiece {
  std::uint32_t origin_sequence = 0;
  std::uint64_t origin_position = 0;
  std::uint64_t length = 0;

  friend bool operator==(const ReservoirPiece&, const ReservoirPiece&) = default;
};

// Append-only table mapping reservoir offsets back to origin sequences. The
// reservoir content itself is never stored.
class ReservoirProvenance {
 public:
  // Appends a phrase and returns its reservoir offset. Throws
  // kInvalidArgument if origin.length < min_length.
  std::uint64_t append(const ReservoirEntry& origin, std::uint64_t min_length);

  // Splits [offset, offset + length) at entry boundaries. Throws kOutOfRange
  // past the end of the reservoir.
  std::vector<ReservoirPiece> resolve(std::uint64_t offset, std::uint64_t length) const;

  // Index of the entry holding reservoir offset `offset`.
  std::size_t entry_at(std::uint64_t offset) const;

  const std::vector<ReservoirEntry>& entries() const noexcept { return entries_; }
  const std::vector<std::uint64_t>& starts() const noexcept { return starts_; }
  std::uint64_t total_length() const noexcept { return total_; }

  friend bool operator==(const ReservoirProvenance&, const ReservoirProvenance&) = default;

 private:
  std::vector<ReservoirEntry> entries_;
  std::vector<std::uint64_t> starts_;
  std::uint64_t total_ = 0;
};

}  // namespace rlzg
