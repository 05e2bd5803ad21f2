#include "rlzg/ref_store.hpp"

#include <algorithm>
#include <string>

#include "rlzg/error.hpp"
#include "rlzg/triplets.hpp"

namespace rlzg {

namespace {

bool only_n(std::span<const Symbol> block) {
  return std::all_of(block.begin(), block.end(), [](Symbol s) { return s == kN; });
}

}  // namespace

EncodedReference encode_reference(std::span<const Symbol> symbols, std::uint32_t block_size) {
  if (block_size == 0) fail(ErrorKind::kInvalidArgument, "reference block size must be positive");
  EncodedReference ref;
  ref.index.block_size = block_size;
  ref.index.symbol_count = symbols.size();
  const std::size_t blocks = (symbols.size() + block_size - 1) / block_size;

  // Pack every non-N block first; the table needs the global tally.
  std::vector<std::vector<std::uint8_t>> packed(blocks);
  ByteCounts counts{};
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto block = symbols.subspan(b * block_size, std::min<std::size_t>(block_size, symbols.size() - b * block_size));
    if (only_n(block)) continue;
    pack_triplets(block, packed[b]);
    for (std::uint8_t byte : packed[b]) counts[byte]++;
  }
  const bool any = std::any_of(counts.begin(), counts.end(), [](std::uint64_t c) { return c != 0; });
  if (any) ref.table = HuffmanTable::build(counts);

  ref.index.start_offsets.reserve(blocks + 1);
  BitWriter writer(ref.payload);
  for (std::size_t b = 0; b < blocks; ++b) {
    ref.index.start_offsets.push_back(ref.payload.size());
    if (packed[b].empty()) continue;
    encode_stream(packed[b], *ref.table, writer);
    writer.flush_to_byte_boundary();
  }
  ref.index.start_offsets.push_back(ref.payload.size());
  return ref;
}

void validate_reference_index(const RefBlockIndex& index, std::size_t payload_size) {
  if (index.block_size == 0) corrupt("reference block size is zero");
  const std::uint64_t blocks = (index.symbol_count + index.block_size - 1) / index.block_size;
  if (index.start_offsets.size() != blocks + 1) corrupt("reference block index has the wrong length");
  if (index.start_offsets.front() != 0 || index.start_offsets.back() != payload_size) {
    corrupt("reference block index does not span the payload");
  }
  for (std::size_t i = 1; i < index.start_offsets.size(); ++i) {
    if (index.start_offsets[i] < index.start_offsets[i - 1]) corrupt("reference block offsets decrease");
  }
}

std::vector<Symbol> decode_reference_range(const ReferenceView& ref, std::uint64_t start, std::uint64_t end,
                                           RefReadStats* stats) {
  const RefBlockIndex& index = *ref.index;
  if (start > end || end > index.symbol_count) {
    fail(ErrorKind::kOutOfRange, "reference range [" + std::to_string(start) + ", " + std::to_string(end) +
                                     ") outside length " + std::to_string(index.symbol_count));
  }
  std::vector<Symbol> out;
  out.reserve(end - start);
  if (start == end) return out;

  const std::uint64_t bs = index.block_size;
  std::vector<Symbol> block_symbols;
  for (std::uint64_t b = start / bs; b * bs < end; ++b) {
    const std::uint64_t block_begin = b * bs;
    const std::uint64_t block_len = std::min(bs, index.symbol_count - block_begin);
    const std::uint64_t lo = std::max(start, block_begin) - block_begin;
    const std::uint64_t hi = std::min(end, block_begin + block_len) - block_begin;
    if (index.all_n(b)) {
      out.insert(out.end(), hi - lo, kN);
      continue;
    }
    if (ref.table == nullptr) corrupt("reference payload present without a Huffman table");
    const std::uint64_t from = index.start_offsets[b];
    const std::uint64_t to = index.start_offsets[b + 1];
    if (to > ref.payload.size()) corrupt("reference block extends past the payload");
    BitReader reader(ref.payload.subspan(from, to - from));
    // Only the triplets up to `hi` are needed.
    const std::size_t needed = packed_size(hi);
    const auto bytes = decode_stream(reader, *ref.table, needed);
    block_symbols.clear();
    unpack_triplets(bytes, hi, block_symbols);
    out.insert(out.end(), block_symbols.begin() + static_cast<std::ptrdiff_t>(lo), block_symbols.end());
    if (stats) {
      stats->payload_bytes_read += reader.bytes_touched();
      stats->blocks_decoded++;
    }
  }
  return out;
}

std::uint64_t ReservoirProvenance::append(const ReservoirEntry& origin, std::uint64_t min_length) {
  if (origin.length < min_length) {
    fail(ErrorKind::kInvalidArgument, "reservoir phrase of length " + std::to_string(origin.length) +
                                          " is shorter than the minimum " + std::to_string(min_length));
  }
  const std::uint64_t offset = total_;
  entries_.push_back(origin);
  starts_.push_back(offset);
  total_ += origin.length;
  return offset;
}

std::size_t ReservoirProvenance::entry_at(std::uint64_t offset) const {
  if (offset >= total_) {
    fail(ErrorKind::kOutOfRange, "reservoir offset " + std::to_string(offset) + " past the end");
  }
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
  return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

std::vector<ReservoirPiece> ReservoirProvenance::resolve(std::uint64_t offset, std::uint64_t length) const {
  if (offset > total_ || length > total_ - offset) {
    fail(ErrorKind::kOutOfRange, "reservoir range [" + std::to_string(offset) + ", +" + std::to_string(length) +
                                     ") outside reservoir of length " + std::to_string(total_));
  }
  std::vector<ReservoirPiece> pieces;
  std::uint64_t pos = offset;
  std::uint64_t left = length;
  while (left > 0) {
    const std::size_t e = entry_at(pos);
    const std::uint64_t within = pos - starts_[e];
    const std::uint64_t take = std::min(left, entries_[e].length - within);
    pieces.push_back({entries_[e].origin_sequence, entries_[e].origin_position + within, take});
    pos += take;
    left -= take;
  }
  return pieces;
}

}  // namespace rlzg
