#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rlzg/genome.hpp"
#include "rlzg/params.hpp"

namespace rlzg {

enum class FactorKind : std::uint8_t {
  kLiteral,
  kMatch,           // into the reference proper
  kNRun,            // pseudomatch standing for a run of N
  kReservoirMatch,  // into the extra-phrase reservoir
};

// One parse token.
//
// For the two match kinds, `target` is the reference position (kMatch) or
// reservoir offset (kReservoirMatch) of the first matched symbol, `pieces`
// holds 1..3 piece lengths and `symbols` the gap symbols, one per gap. A gap
// substitutes exactly one symbol, so both sides advance by
// sum(pieces) + gaps. For kLiteral `symbols` is the run; for kNRun `run` is
// its length.
struct Factor {
  FactorKind kind = FactorKind::kLiteral;
  std::uint64_t target = 0;
  std::uint64_t run = 0;
  std::array<std::uint32_t, kGapLimit + 1> pieces{};
  std::uint8_t piece_count = 0;
  std::vector<Symbol> symbols;

  static Factor literal(std::vector<Symbol> run_symbols);
  static Factor n_run(std::uint64_t length);
  static Factor match(std::uint64_t ref_pos, std::span<const std::uint32_t> piece_lengths,
                      std::span<const Symbol> gap_symbols);
  static Factor reservoir_match(std::uint64_t reservoir_offset, std::span<const std::uint32_t> piece_lengths,
                                std::span<const Symbol> gap_symbols);

  bool is_match() const noexcept { return kind == FactorKind::kMatch || kind == FactorKind::kReservoirMatch; }
  std::size_t gap_count() const noexcept { return piece_count == 0 ? 0 : piece_count - 1u; }
  std::span<const std::uint32_t> piece_lengths() const noexcept { return {pieces.data(), piece_count}; }

  // Symbols of the source this factor covers.
  std::uint64_t source_advance() const noexcept;

  friend bool operator==(const Factor&, const Factor&) = default;
};

struct Parse {
  std::vector<Factor> factors;
  std::uint64_t source_length = 0;

  friend bool operator==(const Parse&, const Parse&) = default;
};

// Checks tiling and per-factor geometry (piece minimums, gap bound, N-run
// minimum) against `params`. Throws kInvalidArgument on the first violation.
void validate_parse(const Parse& parse, const ParseParams& params);

}  // namespace rlzg
