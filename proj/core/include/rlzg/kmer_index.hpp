#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rlzg/genome.hpp"

namespace rlzg {

// Hash index of the N-free k-grams of the extended reference (reference
// proper followed by reservoir phrases). Buckets are chained in insertion
// order, so the reference comes first and reservoir phrases follow in append
// order. Lookups verify every hit against the stored symbols.
//
// Only used while compressing; never serialized.
class KmerIndex {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // `bucket_bits` = 0 picks a table size from the reference length.
  KmerIndex(std::span<const Symbol> reference, std::uint32_t k, std::uint32_t candidate_cap, int bucket_bits = 0);

  // Appends a reservoir phrase. `phrase_start` must equal extended_length();
  // grams that straddle the phrase's start are not indexed.
  void extend_with_reservoir(std::span<const Symbol> phrase, std::uint64_t phrase_start);

  // Up to candidate_cap positions whose k symbols equal `query`, oldest first.
  // A query containing N, or of the wrong length, yields nothing.
  void find_candidates(std::span<const Symbol> query, std::vector<std::uint32_t>& out) const;
  std::vector<std::uint32_t> find_candidates(std::span<const Symbol> query) const {
    std::vector<std::uint32_t> out;
    find_candidates(query, out);
    return out;
  }

  std::uint32_t k() const noexcept { return k_; }
  std::uint32_t candidate_cap() const noexcept { return cap_; }
  std::uint64_t reference_length() const noexcept { return reference_length_; }
  std::uint64_t extended_length() const noexcept { return extended_.size(); }
  std::span<const Symbol> extended() const noexcept { return extended_; }
  std::uint64_t indexed_positions() const noexcept { return indexed_; }

  // End (exclusive, extended coordinates) of the region a match starting at
  // `pos` may extend into: the reference end, or the end of pos's phrase.
  std::uint64_t region_end(std::uint64_t pos) const;

  std::size_t bucket_count() const noexcept { return head_.size(); }
  std::size_t bucket_of(std::span<const Symbol> gram) const;
  static std::uint64_t mix(std::uint64_t packed) noexcept;

 private:
  void index_range(std::uint64_t begin, std::uint64_t end);
  void insert(std::uint64_t packed, std::uint32_t pos);

  std::uint32_t k_;
  std::uint32_t cap_;
  int bits_;
  std::uint64_t reference_length_;
  std::uint64_t indexed_ = 0;
  std::vector<Symbol> extended_;
  std::vector<std::uint64_t> phrase_starts_;
  std::vector<std::uint32_t> head_;
  std::vector<std::uint32_t> tail_;
  std::vector<std::uint32_t> next_;
};

}  // namespace rlzg
