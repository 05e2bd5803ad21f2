#include "rlzg/kmer_index.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "rlzg/error.hpp"
#include "rlzg/params.hpp"

namespace rlzg {

namespace {

int default_bucket_bits(std::uint64_t n) {
  const int bits = static_cast<int>(std::bit_width(std::max<std::uint64_t>(n, 1)));
  return std::clamp(bits, 10, 26);
}

}  // namespace

// splitmix64 finalizer
std::uint64_t KmerIndex::mix(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

KmerIndex::KmerIndex(std::span<const Symbol> reference, std::uint32_t k, std::uint32_t candidate_cap, int bucket_bits)
    : k_(k),
      cap_(candidate_cap),
      bits_(bucket_bits > 0 ? bucket_bits : default_bucket_bits(reference.size())),
      reference_length_(reference.size()),
      extended_(reference.begin(), reference.end()) {
  if (k < 4 || k > kMaxGramLength) fail(ErrorKind::kInvalidArgument, "gram length must be in 4..32");
  if (candidate_cap == 0) fail(ErrorKind::kInvalidArgument, "candidate cap must be positive");
  if (bits_ > 30) fail(ErrorKind::kInvalidArgument, "bucket table too large");
  if (reference.size() >= kNone) fail(ErrorKind::kInvalidArgument, "reference too long for 32-bit positions");
  head_.assign(std::size_t{1} << bits_, kNone);
  tail_.assign(std::size_t{1} << bits_, kNone);
  next_.assign(extended_.size(), kNone);
  index_range(0, extended_.size());
}

void KmerIndex::insert(std::uint64_t packed, std::uint32_t pos) {
  const std::size_t b = static_cast<std::size_t>(mix(packed) >> (64 - bits_));
  if (head_[b] == kNone) {
    head_[b] = pos;
  } else {
    next_[tail_[b]] = pos;
  }
  tail_[b] = pos;
  ++indexed_;
}

void KmerIndex::index_range(std::uint64_t begin, std::uint64_t end) {
  const std::uint64_t mask = k_ == 32 ? ~std::uint64_t{0} : (std::uint64_t{1} << (2 * k_)) - 1;
  std::uint64_t packed = 0;
  std::uint32_t valid = 0;  // length of the N-free suffix ending at i
  for (std::uint64_t i = begin; i < end; ++i) {
    const Symbol s = extended_[i];
    if (s == kN) {
      valid = 0;
      packed = 0;
      continue;
    }
    packed = ((packed << 2) | s) & mask;
    if (++valid >= k_) insert(packed, static_cast<std::uint32_t>(i + 1 - k_));
  }
}

void KmerIndex::extend_with_reservoir(std::span<const Symbol> phrase, std::uint64_t phrase_start) {
  if (phrase_start != extended_.size()) {
    fail(ErrorKind::kInternal, "reservoir phrase offset " + std::to_string(phrase_start) +
                                   " does not match extended reference length " + std::to_string(extended_.size()));
  }
  if (extended_.size() + phrase.size() >= kNone) fail(ErrorKind::kInternal, "extended reference exceeds 32-bit positions");
  phrase_starts_.push_back(phrase_start);
  extended_.insert(extended_.end(), phrase.begin(), phrase.end());
  next_.resize(extended_.size(), kNone);
  index_range(phrase_start, extended_.size());
}

std::uint64_t KmerIndex::region_end(std::uint64_t pos) const {
  if (pos < reference_length_) return reference_length_;
  const auto it = std::upper_bound(phrase_starts_.begin(), phrase_starts_.end(), pos);
  return it == phrase_starts_.end() ? extended_.size() : *it;
}

std::size_t KmerIndex::bucket_of(std::span<const Symbol> gram) const {
  std::uint64_t packed = 0;
  for (Symbol s : gram) packed = (packed << 2) | (s & 3u);
  return static_cast<std::size_t>(mix(packed) >> (64 - bits_));
}

void KmerIndex::find_candidates(std::span<const Symbol> query, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (query.size() != k_) return;
  std::uint64_t packed = 0;
  for (Symbol s : query) {
    if (s == kN) return;
    packed = (packed << 2) | s;
  }
  const std::size_t b = static_cast<std::size_t>(mix(packed) >> (64 - bits_));
  const Symbol* base = extended_.data();
  for (std::uint32_t p = head_[b]; p != kNone && out.size() < cap_; p = next_[p]) {
    if (std::equal(query.begin(), query.end(), base + p)) out.push_back(p);
  }
}

}  // namespace rlzg
