#include "rlzg/triplets.hpp"

namespace rlzg {

void pack_triplets(std::span<const Symbol> symbols, std::vector<std::uint8_t>& out) {
  const std::size_t n = symbols.size();
  std::size_t i = 0;
  for (; i + 3 <= n; i += 3) out.push_back(pack_triplet(symbols[i], symbols[i + 1], symbols[i + 2]));
  if (i < n) {
    const Symbol s1 = i + 1 < n ? symbols[i + 1] : kA;
    out.push_back(pack_triplet(symbols[i], s1, kA));
  }
}

void unpack_triplets(std::span<const std::uint8_t> bytes, std::size_t count, std::vector<Symbol>& out) {
  if (bytes.size() < packed_size(count)) corrupt("packed triplet stream too short");
  Symbol digits[3];
  std::size_t left = count;
  for (std::size_t b = 0; left > 0; ++b) {
    split_triplet(bytes[b], digits);
    const std::size_t take = left < 3 ? left : 3;
    out.insert(out.end(), digits, digits + take);
    left -= take;
  }
}

}  // namespace rlzg
