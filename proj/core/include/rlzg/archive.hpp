#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlzg/factor_codec.hpp"
#include "rlzg/genome.hpp"
#include "rlzg/params.hpp"
#include "rlzg/ref_store.hpp"

namespace rlzg {

inline constexpr std::array<char, 4> kArchiveMagic = {'R', 'L', 'Z', 'G'};
inline constexpr std::uint8_t kArchiveVersion = 1;

enum class SequenceRole : std::uint8_t {
  kReference = 0,  // stored inside the reference payload
  kRelative = 1,   // stored as four coded factor streams
};

struct SequenceEntry {
  std::string name;
  std::string group;
  SequenceRole role = SequenceRole::kRelative;
  std::uint64_t length = 0;
  // kReference: where the record starts inside the concatenated reference.
  std::uint64_t reference_start = 0;
  // kRelative: offset predictor base and the byte range of the four coded
  // streams (laid out back to back) inside the payload region.
  std::int64_t diagonal_base = 0;
  std::uint64_t payload_offset = 0;
  CheckpointTable checkpoints;
};

struct ArchiveHeader {
  std::uint8_t version = kArchiveVersion;
  ParseParams params;
  MatchingGranularity granularity = MatchingGranularity::kWholeSequence;
  RefBlockIndex reference_index;
  std::optional<HuffmanTable> reference_table;
  std::uint64_t reference_payload_offset = 0;
  ReservoirProvenance reservoir;
  ModelSet models;
  std::vector<SequenceEntry> sequences;
};

// Byte accounting of an archive file.
struct ArchiveSizes {
  std::uint64_t total = 0;
  std::uint64_t header = 0;              // everything before the payload region
  std::uint64_t reference_payload = 0;
  std::uint64_t reference_index = 0;     // reference section of the header
  std::uint64_t reservoir_table = 0;
  std::uint64_t models = 0;
  std::uint64_t sequence_table = 0;
  std::uint64_t relative_payload = 0;    // coded streams of relative sequences
  std::uint64_t relative_tables = 0;     // their sequence-table entries (checkpoints included)
  std::uint64_t reference_symbols = 0;
  std::uint64_t relative_symbols = 0;

  std::uint64_t compressed_reference() const noexcept { return reference_payload + reference_index; }
  std::uint64_t relative_part() const noexcept { return relative_payload + relative_tables; }
};

// An archive held in memory: the file bytes plus the parsed header. Immutable
// once built, so any number of threads may decompress or extract from it.
class Archive {
 public:
  // Parses and validates a file image: magic, version, checksum, then the
  // structural invariants of every section.
  static Archive from_bytes(std::vector<std::uint8_t> bytes);

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  const ArchiveHeader& header() const noexcept { return header_; }
  const ArchiveSizes& sizes() const noexcept { return sizes_; }

  ReferenceView reference() const;
  StreamsView streams(std::size_t sequence) const;

  // Index of the sequence called `name`: an exact "group/name" match, else a
  // unique bare name. Throws kNotFound or kInvalidArgument (ambiguous).
  std::size_t find_sequence(std::string_view name) const;

  // The record the reference was chosen by (the collection's reference_index).
  std::size_t reference_record() const noexcept { return reference_index_; }

 private:
  Archive() = default;

  std::vector<std::uint8_t> bytes_;
  ArchiveHeader header_;
  ArchiveSizes sizes_;
  std::size_t reference_index_ = 0;
  std::span<const std::uint8_t> payload_;
  std::vector<std::array<std::span<const std::uint8_t>, kStreamCount>> stream_spans_;
};

struct CompressStats {
  double seconds = 0;
  std::uint64_t input_symbols = 0;
  std::vector<Parse> parses;  // filled only when requested; global coordinates
};

struct CompressOptions {
  bool keep_parses = false;  // tests use the parses directly
};

// Compresses `collection`. Sequences outside the reference group are parsed
// in collection order; the reservoir grows as they go.
Archive compress(const Collection& collection, const ParseParams& params, const CompressOptions& options = {},
                 CompressStats* stats = nullptr);

struct DecompressOptions {
  unsigned threads = 1;
};

Collection decompress(const Archive& archive, const DecompressOptions& options = {});

struct ExtractStats {
  std::uint64_t coded_bytes_read = 0;      // factor streams, all sequences touched
  std::uint64_t reference_bytes_read = 0;  // reference payload
  std::uint64_t windows_decoded = 0;
  std::uint64_t reservoir_lookups = 0;
};

// Symbols [start, end) of the named sequence, decoding only the windows and
// reference blocks that cover them.
std::vector<Symbol> extract(const Archive& archive, std::string_view sequence_name, std::uint64_t start,
                            std::uint64_t end, ExtractStats* stats = nullptr);
std::vector<Symbol> extract(const Archive& archive, std::size_t sequence, std::uint64_t start, std::uint64_t end,
                            ExtractStats* stats = nullptr);

// Number of length-`window` substrings without N.
std::uint64_t count_nfree_windows(std::span<const Symbol> symbols, std::uint32_t window);

struct ReferenceChoice {
  std::size_t index = 0;
  std::uint64_t windows = 0;
};

// Suggests the reference: the group (genome) with the most N-free windows of
// length `window`, ties to the earliest. Returns its first sequence.
ReferenceChoice select_reference(const Collection& collection, std::uint32_t window);

}  // namespace rlzg
