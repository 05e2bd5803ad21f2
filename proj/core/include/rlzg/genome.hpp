#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlzg {

// Nucleotide code in 0..4. Anything that is not A, C, G or T becomes N.
using Symbol = std::uint8_t;

inline constexpr Symbol kA = 0;
inline constexpr Symbol kC = 1;
inline constexpr Symbol kG = 2;
inline constexpr Symbol kT = 3;
inline constexpr Symbol kN = 4;
inline constexpr int kAlphabetSize = 5;

// Maps an alphabetic byte (either case) to its code.
constexpr Symbol symbol_from_char(char c) noexcept {
  switch (c) {
    case 'A': case 'a': return kA;
    case 'C': case 'c': return kC;
    case 'G': case 'g': return kG;
    case 'T': case 't': return kT;
    default: return kN;
  }
}

constexpr char symbol_to_char(Symbol s) noexcept { return "ACGTN"[s < kAlphabetSize ? s : kN]; }

// Convenience for tests and fixtures: "ACGTN" text -> codes.
std::vector<Symbol> symbols_from_text(std::string_view text);
std::string symbols_to_text(std::span<const Symbol> symbols);

struct Sequence {
  std::string name;
  std::vector<Symbol> symbols;

  std::size_t length() const noexcept { return symbols.size(); }
  friend bool operator==(const Sequence&, const Sequence&) = default;
};

enum class MatchingGranularity : std::uint8_t {
  kWholeSequence = 0,  // every record matches against the full reference
  kPerRecord = 1,      // every record matches against its counterpart reference record only
};

// A set of sequences to be compressed together.
//
// `groups` optionally tags each sequence with the genome (input file) it came
// from; when empty, every sequence is its own group, named after itself. The
// reference consists of every sequence that shares the group of
// `sequences[reference_index]`, concatenated in collection order.
struct Collection {
  std::vector<Sequence> sequences;
  std::vector<std::string> groups;
  std::size_t reference_index = 0;
  MatchingGranularity granularity = MatchingGranularity::kWholeSequence;

  const std::string& group_of(std::size_t i) const {
    return groups.empty() ? sequences[i].name : groups[i];
  }
  bool is_reference(std::size_t i) const { return group_of(i) == group_of(reference_index); }

  friend bool operator==(const Collection&, const Collection&) = default;
};

// Throws rlzg::Error(kInvalidArgument) on empty input, a record without a
// name, sequence data before the first header, or non-printable bytes.
std::vector<Sequence> parse_fasta(std::string_view bytes);

std::string write_fasta(const Sequence& seq, std::size_t line_width = 70);

// Checks the structural invariants (non-empty, reference index in range,
// group vector shape, (group, name) pairs unique).
void validate_collection(const Collection& collection);

}  // namespace rlzg
