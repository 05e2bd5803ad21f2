#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlzg/factor.hpp"
#include "rlzg/huffman.hpp"
#include "rlzg/params.hpp"

namespace rlzg {

// The four conceptual streams of a relatively encoded sequence.
enum Stream : std::size_t { kOffsets = 0, kLengths = 1, kLiterals = 2, kFlags = 3 };
inline constexpr std::size_t kStreamCount = 4;

// The shared order-0 models: first bytes and pooled escape bytes of offsets
// and lengths, literal triplets, flag bytes.
enum Model : std::size_t { kOff0 = 0, kOffExt = 1, kLen0 = 2, kLenExt = 3, kLit = 4, kFlg = 5 };
inline constexpr std::size_t kModelCount = 6;

// Offset record first-byte layout.
inline constexpr std::int64_t kDeltaBias = 125;
inline constexpr std::uint8_t kOffsetNegEscape = 251;  // then int32 LE delta < -125
inline constexpr std::uint8_t kOffsetPosEscape = 252;  // then int32 LE delta > 125
inline constexpr std::uint8_t kOffsetNRun = 253;
inline constexpr std::uint8_t kOffsetReservoir = 254;  // then uint32 LE reservoir offset

// Length record: byte = length - 1 for 1..255, else 255 then uint32 LE length.
inline constexpr std::uint8_t kLengthEscape = 255;

// Factor flags, four per byte, first flag in the low bit pair.
inline constexpr std::uint8_t kFlagLiteral = 0;  // 1 + gap count for matches and N-runs

void append_offset_delta(std::int64_t delta, std::vector<std::uint8_t>& out);
void append_reservoir_offset(std::uint64_t offset, std::vector<std::uint8_t>& out);
void append_length(std::uint64_t length, std::vector<std::uint8_t>& out);
std::uint8_t pack_flags(std::span<const std::uint8_t> four_flags);

// Start of a random-access window. A window holds every factor whose start
// lies in [source_position, next checkpoint's source_position); the first of
// them starts at `factor_start`, which exceeds source_position when a factor
// from the previous window runs across the boundary. All four streams are
// byte-aligned here and the offset predictor restarts from 0.
struct Checkpoint {
  std::uint64_t source_position = 0;
  std::uint64_t factor_start = 0;
  std::array<std::uint64_t, kStreamCount> raw_offsets{};    // raw stream bytes before this window
  std::array<std::uint64_t, kStreamCount> coded_offsets{};  // coded payload bytes before this window

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Checkpoints and per-stream totals of one sequence. `end` holds the totals
// (raw sizes and coded sizes) with both positions at the sequence length.
struct CheckpointTable {
  std::vector<Checkpoint> checkpoints;
  Checkpoint end;

  friend bool operator==(const CheckpointTable&, const CheckpointTable&) = default;
};

struct RawStreams {
  std::array<std::vector<std::uint8_t>, kStreamCount> bytes;
  CheckpointTable table;  // coded offsets not yet filled in
};

// Serializes a parse. `diagonal_base` shifts the offset diagonal
// (pos + base - ref_pos). Throws kInvalidArgument for geometry violations or
// offsets that do not fit the 32-bit escapes.
RawStreams encode_parse(const Parse& parse, const ParseParams& params, std::int64_t diagonal_base = 0);

using ModelTallies = std::array<ByteCounts, kModelCount>;

// Adds the bytes of `raw` to the per-model tallies.
void tally_models(const RawStreams& raw, ModelTallies& tallies);

// A model is absent when no byte ever used it.
struct ModelSet {
  std::array<std::optional<HuffmanTable>, kModelCount> tables;

  const HuffmanTable& get(Model m) const;
  friend bool operator==(const ModelSet&, const ModelSet&) = default;
};

ModelSet build_models(const ModelTallies& tallies);
// Convenience over a set of sequences; throws kInvalidArgument for an empty set.
ModelSet build_models(std::span<const RawStreams> all);

struct CodedStreams {
  std::array<std::vector<std::uint8_t>, kStreamCount> payloads;
  CheckpointTable table;
};

// Huffman-codes every stream window by window, flushing at each checkpoint.
CodedStreams compress_streams(const RawStreams& raw, const ModelSet& models);

// Borrowed view of a sequence's coded streams.
struct StreamsView {
  std::array<std::span<const std::uint8_t>, kStreamCount> payloads;
  const CheckpointTable* table = nullptr;
  std::uint64_t source_length = 0;
};

inline StreamsView view_of(const CodedStreams& coded, std::uint64_t source_length) {
  return {{coded.payloads[0], coded.payloads[1], coded.payloads[2], coded.payloads[3]}, &coded.table, source_length};
}

struct FactorWindow {
  std::uint64_t start = 0;  // source position of factors.front()
  std::vector<Factor> factors;
};

struct DecodeStats {
  std::uint64_t coded_bytes_read = 0;
  std::uint64_t windows = 0;
};

// Decodes factors from checkpoint `checkpoint` onwards until they cover
// `until` (or the sequence ends), crossing into later windows as needed.
// Throws a corrupt-archive error on malformed data.
FactorWindow decode_window(const StreamsView& streams, const ModelSet& models, std::size_t checkpoint,
                           std::uint64_t until, std::int64_t diagonal_base = 0, DecodeStats* stats = nullptr);

// Latest checkpoint whose window holds the factor covering `pos`.
std::size_t checkpoint_for(const CheckpointTable& table, std::uint64_t pos);

// Checks monotonicity and bounds of a checkpoint table against payload sizes.
void validate_checkpoints(const CheckpointTable& table, std::uint64_t source_length, std::uint32_t interval,
                          const std::array<std::uint64_t, kStreamCount>& payload_sizes);

}  // namespace rlzg
