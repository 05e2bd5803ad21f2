#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rlzg/factor.hpp"
#include "rlzg/genome.hpp"
#include "rlzg/kmer_index.hpp"
#include "rlzg/params.hpp"

namespace rlzg {

// A match candidate at one source position, already extended (including
// gaps). `ref_pos` is in the index's extended-reference coordinates.
struct Candidate {
  std::uint64_t ref_pos = 0;
  std::array<std::uint32_t, kGapLimit + 1> pieces{};
  std::uint8_t piece_count = 0;
  std::array<Symbol, kGapLimit> gaps{};
  std::uint64_t covered = 0;
  bool in_reservoir = false;

  std::span<const std::uint32_t> piece_lengths() const noexcept { return {pieces.data(), piece_count}; }
  std::span<const Symbol> gap_symbols() const noexcept { return {gaps.data(), piece_count ? piece_count - 1u : 0u}; }
};

// Diagonal bookkeeping for offset costs. A match's diagonal is
// pos + base - ref_pos; `previous` is the diagonal of the last reference
// match since the last checkpoint (0 after a reset).
struct DiagonalState {
  std::int64_t base = 0;
  std::int64_t previous = 0;

  std::int64_t delta(const Candidate& c, std::uint64_t pos) const noexcept {
    return static_cast<std::int64_t>(pos) + base - static_cast<std::int64_t>(c.ref_pos) - previous;
  }
};

// Extends the verified gram at (pos, ref_pos): contiguous as far as symbols
// agree, then up to two single-symbol gaps, each kept only if the piece after
// it reaches min_extension. Never leaves the region ref_pos started in.
Candidate extend_candidate(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                           std::uint64_t ref_pos, const ParseParams& params);

// All extended candidates for the gram at `pos` (up to the index's cap).
std::vector<Candidate> candidates_at(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                                     const ParseParams& params);

// The candidate covering the most source symbols; ties go to the smaller
// |offset delta| (reservoir candidates count as never cheap), then to the
// smaller position. Empty when no candidate reaches min_match.
std::optional<Candidate> longest_match_at(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                                          const ParseParams& params, const DiagonalState& diag);

// Offset-cost arbitration between two candidates at the same position:
// a cheap alternative (|delta| < cheap_offset_bound) at most length_slack
// shorter beats an expensive best; an expensive alternative beats a cheap
// best only when it is more than length_slack longer. Otherwise the longer
// one wins, and `best` keeps ties.
const Candidate& choose_factor(const Candidate& best, const Candidate& alt, const DiagonalState& diag,
                               std::uint64_t pos, const ParseParams& params);

// Receives every closed literal run of at least min_reservoir_run symbols:
// (start position in the source, symbols). It is expected to append the
// run to the reservoir and to the index.
using ReservoirSink = std::function<void(std::uint64_t source_pos, std::span<const Symbol> run)>;

// Left-to-right non-greedy factorization of `seq` against `index`. Factor
// targets are in the index's coordinates: reference positions for kMatch,
// offsets past the reference end for kReservoirMatch.
Parse parse_sequence(KmerIndex& index, std::span<const Symbol> seq, const ParseParams& params,
                     const ReservoirSink& sink = {}, std::int64_t diagonal_base = 0);

// Appends `length` symbols starting at `pos` of some backing store; throws
// on out-of-range requests.
using SymbolFetch = std::function<void(std::uint64_t pos, std::uint64_t length, std::vector<Symbol>& out)>;

// Appends source symbols [lo, hi) of the factor (offsets relative to the
// factor's start) to `out`.
void apply_factor_slice(const Factor& factor, std::uint64_t lo, std::uint64_t hi, const SymbolFetch& reference,
                        const SymbolFetch& reservoir, std::vector<Symbol>& out);

// Rebuilds the source from its parse. Throws a corrupt-archive error when a
// factor points outside the backing stores.
std::vector<Symbol> apply_parse(const Parse& parse, const SymbolFetch& reference, const SymbolFetch& reservoir);
std::vector<Symbol> apply_parse(const Parse& parse, std::span<const Symbol> reference,
                                std::span<const Symbol> reservoir = {});

// Convenience sink target for standalone use: keeps provenance and grows the
// index. The archive uses its own, coordinate-translating version.
class ReservoirProvenance;
ReservoirSink make_reservoir_sink(KmerIndex& index, ReservoirProvenance& provenance, std::uint32_t sequence_index,
                                  const ParseParams& params);

}  // namespace rlzg
