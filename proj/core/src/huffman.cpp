#include "rlzg/huffman.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

namespace rlzg {

namespace {

// Unconstrained Huffman depths for the nonzero entries of `counts`.
std::array<int, 256> tree_depths(const ByteCounts& counts) {
  struct Node {
    std::uint64_t weight;
    std::int32_t parent;
  };
  std::vector<Node> nodes;
  std::vector<int> leaf_of_symbol(256, -1);
  using Item = std::pair<std::uint64_t, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int s = 0; s < 256; ++s) {
    if (counts[s] == 0) continue;
    leaf_of_symbol[s] = static_cast<int>(nodes.size());
    heap.emplace(counts[s], static_cast<std::uint32_t>(nodes.size()));
    nodes.push_back({counts[s], -1});
  }
  while (heap.size() > 1) {
    const auto [wa, a] = heap.top();
    heap.pop();
    const auto [wb, b] = heap.top();
    heap.pop();
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({wa + wb, -1});
    nodes[a].parent = id;
    nodes[b].parent = id;
    heap.emplace(wa + wb, static_cast<std::uint32_t>(id));
  }
  // Parents always have larger ids, so a reverse sweep resolves depths.
  std::vector<int> depth(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    if (nodes[i].parent >= 0) depth[i] = depth[static_cast<std::size_t>(nodes[i].parent)] + 1;
  }
  std::array<int, 256> out{};
  for (int s = 0; s < 256; ++s) {
    if (leaf_of_symbol[s] >= 0) out[s] = depth[static_cast<std::size_t>(leaf_of_symbol[s])];
  }
  return out;
}

}  // namespace

HuffmanTable HuffmanTable::build(const ByteCounts& counts) {
  std::vector<int> present;
  for (int s = 0; s < 256; ++s) {
    if (counts[s] != 0) present.push_back(s);
  }
  if (present.empty()) fail(ErrorKind::kInvalidArgument, "cannot build a Huffman table from all-zero counts");

  HuffmanTable t;
  if (present.size() == 1) {
    t.lengths_[present[0]] = 1;
    t.assign_codes();
    return t;
  }

  const auto depths = tree_depths(counts);
  // Histogram of lengths; anything deeper than the cap is folded onto it and
  // the Kraft overflow is repaid by pushing leaves down from shallower levels.
  std::array<std::uint32_t, 64> per_length{};
  for (int s : present) per_length[std::min(depths[s], 63)]++;
  for (int len = kMaxCodeLength + 1; len < 64; ++len) {
    per_length[kMaxCodeLength] += per_length[len];
    per_length[len] = 0;
  }
  std::uint64_t kraft = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    kraft += static_cast<std::uint64_t>(per_length[len]) << (kMaxCodeLength - len);
  }
  const std::uint64_t full = std::uint64_t{1} << kMaxCodeLength;
  while (kraft > full) {
    per_length[kMaxCodeLength]--;
    for (int len = kMaxCodeLength - 1; len > 0; --len) {
      if (per_length[len] != 0) {
        per_length[len]--;
        per_length[len + 1] += 2;
        break;
      }
    }
    kraft--;
  }

  // Most frequent symbols take the shortest lengths; ties go to the lower byte.
  std::stable_sort(present.begin(), present.end(), [&](int a, int b) { return counts[a] > counts[b]; });
  std::size_t next = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    for (std::uint32_t i = 0; i < per_length[len]; ++i) t.lengths_[present[next++]] = static_cast<std::uint8_t>(len);
  }
  t.assign_codes();
  return t;
}

HuffmanTable HuffmanTable::from_lengths(const std::array<std::uint8_t, 256>& lengths) {
  std::uint64_t kraft = 0;
  std::size_t present = 0;
  for (std::uint8_t len : lengths) {
    if (len > kMaxCodeLength) corrupt("Huffman code length " + std::to_string(len) + " exceeds 15");
    if (len != 0) {
      ++present;
      kraft += std::uint64_t{1} << (kMaxCodeLength - len);
    }
  }
  if (present == 0) corrupt("Huffman table has no symbols");
  if (kraft > (std::uint64_t{1} << kMaxCodeLength)) corrupt("Huffman code lengths violate the Kraft inequality");
  HuffmanTable t;
  t.lengths_ = lengths;
  t.assign_codes();
  return t;
}

void HuffmanTable::assign_codes() {
  std::array<std::uint32_t, kMaxCodeLength + 2> count{};
  symbol_count_ = 0;
  max_length_ = 0;
  for (std::uint8_t len : lengths_) {
    if (len != 0) {
      count[len]++;
      ++symbol_count_;
      max_length_ = std::max<int>(max_length_, len);
    }
  }
  std::array<std::uint32_t, kMaxCodeLength + 2> next_code{};
  std::uint32_t code = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    code = (code + count[len - 1]) << 1;
    next_code[len] = code;
  }
  codes_.fill(0);
  for (int s = 0; s < 256; ++s) {
    if (lengths_[s] != 0) codes_[s] = next_code[lengths_[s]]++;
  }

  lookup_.assign(std::size_t{1} << max_length_, 0);
  for (int s = 0; s < 256; ++s) {
    const int len = lengths_[s];
    if (len == 0) continue;
    const int spare = max_length_ - len;
    const std::uint32_t first = codes_[s] << spare;
    const std::uint16_t entry = static_cast<std::uint16_t>((s << 4) | len);
    std::fill_n(lookup_.begin() + first, std::size_t{1} << spare, entry);
  }
}

void HuffmanTable::throw_missing(std::uint8_t symbol) {
  fail(ErrorKind::kInvalidArgument, "byte " + std::to_string(symbol) + " has no code in the Huffman table");
}

std::array<std::uint8_t, kSerializedTableSize> HuffmanTable::serialize() const {
  std::array<std::uint8_t, kSerializedTableSize> out{};
  for (std::size_t i = 0; i < kSerializedTableSize; ++i) {
    out[i] = static_cast<std::uint8_t>(lengths_[2 * i] | (lengths_[2 * i + 1] << 4));
  }
  return out;
}

HuffmanTable HuffmanTable::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSerializedTableSize) corrupt("Huffman table must be 128 bytes");
  std::array<std::uint8_t, 256> lengths{};
  for (std::size_t i = 0; i < kSerializedTableSize; ++i) {
    lengths[2 * i] = bytes[i] & 0xf;
    lengths[2 * i + 1] = bytes[i] >> 4;
  }
  return from_lengths(lengths);
}

std::uint64_t HuffmanTable::cost_bits(const ByteCounts& counts) const {
  std::uint64_t bits = 0;
  for (int s = 0; s < 256; ++s) {
    if (counts[s] == 0) continue;
    if (lengths_[s] == 0) throw_missing(static_cast<std::uint8_t>(s));
    bits += counts[s] * lengths_[s];
  }
  return bits;
}

ByteCounts tally(std::span<const std::uint8_t> bytes) {
  ByteCounts counts{};
  for (std::uint8_t b : bytes) counts[b]++;
  return counts;
}

std::uint64_t encode_stream(std::span<const std::uint8_t> bytes, const HuffmanTable& table, BitWriter& writer) {
  const std::uint64_t before = writer.bits_written();
  for (std::uint8_t b : bytes) table.encode_symbol(writer, b);
  return writer.bits_written() - before;
}

std::vector<std::uint8_t> decode_stream(BitReader& reader, const HuffmanTable& table, std::size_t count) {
  std::vector<std::uint8_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(table.decode_symbol(reader));
  return out;
}

}  // namespace rlzg
