#pragma once

#include <cstdint>

namespace rlzg {

inline constexpr std::uint32_t kGapLimit = 2;  // flags are 2-bit: literal, match with 0/1/2 gaps
inline constexpr std::uint32_t kMaxGramLength = 32;

// Tunables of the parser and stream layout. Recorded verbatim in archives.
struct ParseParams {
  std::uint32_t min_match = 13;         // first contiguous piece of a match
  std::uint32_t min_extension = 4;      // every piece after a gap
  std::uint32_t min_reservoir_run = 32; // literal runs at least this long join the reservoir
  std::uint32_t gap_limit = kGapLimit;
  std::uint32_t cheap_offset_bound = 64;
  std::uint32_t length_slack = 28;
  std::uint32_t candidate_cap = 128;
  std::uint32_t checkpoint_interval = 8192;

  // Preset for large (human-scale) genomes.
  static ParseParams human() {
    ParseParams p;
    p.min_match = 20;
    return p;
  }

  friend bool operator==(const ParseParams&, const ParseParams&) = default;
};

// Throws kInvalidArgument if the parameters break the parser's invariants:
// 4 <= min_match <= 32, min_match > min_extension >= 1,
// min_reservoir_run >= min_match, gap_limit == 2, and positive bounds.
void validate_params(const ParseParams& params);

}  // namespace rlzg
