#include "rlzg/archive.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <boost/crc.hpp>

#include "byte_io.hpp"
#include "rlzg/error.hpp"
#include "rlzg/kmer_index.hpp"
#include "rlzg/lz_parser.hpp"

namespace rlzg {

namespace {

using detail::ByteReader;
using detail::ByteWriter;

// magic(4) version(1) checksum(8) header_length(8)
constexpr std::size_t kChecksumAt = 5;
constexpr std::size_t kHeaderLengthAt = 13;
constexpr std::size_t kPrefixSize = 21;

enum SectionTag : std::uint32_t {
  kSectionParams = 1,
  kSectionReference = 2,
  kSectionReservoir = 3,
  kSectionModels = 4,
  kSectionSequences = 5,
};

using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true>;

std::uint64_t checksum(std::span<const std::uint8_t> bytes) {
  Crc64 crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

// ---------------------------------------------------------------------------
// Compression

struct Universe {
  struct Phrase {
    std::uint64_t local_start;  // extended-reference position inside the universe
    std::uint64_t global_offset;
    std::uint64_t length;
  };

  std::uint64_t ref_start = 0;
  std::uint64_t ref_length = 0;
  std::unique_ptr<KmerIndex> index;
  std::vector<Phrase> phrases;

  std::uint64_t global_reservoir_offset(std::uint64_t local_offset, std::uint64_t advance) const {
    const std::uint64_t local = ref_length + local_offset;
    auto it = std::upper_bound(phrases.begin(), phrases.end(), local,
                               [](std::uint64_t v, const Phrase& p) { return v < p.local_start; });
    if (it == phrases.begin()) fail(ErrorKind::kInternal, "reservoir match before the first phrase");
    --it;
    if (local + advance > it->local_start + it->length) fail(ErrorKind::kInternal, "reservoir match crosses a phrase");
    return it->global_offset + (local - it->local_start);
  }
};

class Compressor {
 public:
  Compressor(const Collection& c, const ParseParams& params) : c_(c), params_(params) {}

  std::vector<std::uint8_t> run(CompressStats* stats, bool keep_parses) {
    const std::size_t n = c_.sequences.size();
    // Concatenated reference.
    std::vector<Symbol> ref_symbols;
    std::vector<std::uint64_t> ref_start(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!c_.is_reference(i)) continue;
      ref_start[i] = ref_symbols.size();
      ref_records_.push_back(i);
      ref_symbols.insert(ref_symbols.end(), c_.sequences[i].symbols.begin(), c_.sequences[i].symbols.end());
    }
    ref_symbols_ = ref_symbols;
    ref_start_ = ref_start;
    EncodedReference ref = encode_reference(ref_symbols);
    universes_.resize(ref_records_.size() + 1);

    std::vector<RawStreams> raws(n);
    std::vector<std::int64_t> bases(n, 0);
    if (stats && keep_parses) stats->parses.assign(n, Parse{});
    std::map<std::string, std::size_t> group_ordinal;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ordinal = group_ordinal[c_.group_of(i)]++;
      if (c_.is_reference(i)) continue;
      const auto counterpart = find_counterpart(i, ordinal);
      const std::size_t u = (c_.granularity == MatchingGranularity::kPerRecord && counterpart)
                                ? *counterpart
                                : ref_records_.size();
      Universe& universe = get_universe(u);
      const std::int64_t base = counterpart ? static_cast<std::int64_t>(ref_start_[ref_records_[*counterpart]]) : 0;
      bases[i] = base;

      const ReservoirSink sink = [&](std::uint64_t source_pos, std::span<const Symbol> run) {
        const std::uint64_t global =
            reservoir_.append({static_cast<std::uint32_t>(i), source_pos, run.size()}, params_.min_reservoir_run);
        const std::uint64_t local = universe.index->extended_length();
        universe.phrases.push_back({local, global, run.size()});
        universe.index->extend_with_reservoir(run, local);
      };
      Parse parse = parse_sequence(*universe.index, c_.sequences[i].symbols, params_, sink,
                                   base - static_cast<std::int64_t>(universe.ref_start));
      for (Factor& f : parse.factors) {
        if (f.kind == FactorKind::kMatch) {
          f.target += universe.ref_start;
        } else if (f.kind == FactorKind::kReservoirMatch) {
          f.target = universe.global_reservoir_offset(f.target, f.source_advance());
        }
      }
      raws[i] = encode_parse(parse, params_, base);
      if (stats && keep_parses) stats->parses[i] = std::move(parse);
    }

    ModelTallies tallies{};
    for (std::size_t i = 0; i < n; ++i) {
      if (!c_.is_reference(i)) tally_models(raws[i], tallies);
    }
    const ModelSet models = build_models(tallies);

    // Payload region: reference first, then each relative sequence's streams.
    ByteWriter payload;
    payload.raw(ref.payload);
    ArchiveHeader h;
    h.params = params_;
    h.granularity = c_.granularity;
    h.reference_index = ref.index;
    h.reference_table = ref.table;
    h.reference_payload_offset = 0;
    h.reservoir = reservoir_;
    h.models = models;
    for (std::size_t i = 0; i < n; ++i) {
      SequenceEntry e;
      e.name = c_.sequences[i].name;
      e.group = c_.group_of(i);
      e.length = c_.sequences[i].length();
      if (c_.is_reference(i)) {
        e.role = SequenceRole::kReference;
        e.reference_start = ref_start_[i];
      } else {
        e.role = SequenceRole::kRelative;
        e.diagonal_base = bases[i];
        CodedStreams coded = compress_streams(raws[i], models);
        e.payload_offset = payload.size();
        for (const auto& stream : coded.payloads) payload.raw(stream);
        e.checkpoints = std::move(coded.table);
        raws[i] = {};
      }
      h.sequences.push_back(std::move(e));
    }
    return serialize(h, payload.bytes(), c_.reference_index);
  }

  static std::vector<std::uint8_t> serialize(const ArchiveHeader& h, std::span<const std::uint8_t> payload,
                                             std::size_t reference_index);

 private:
  std::optional<std::size_t> find_counterpart(std::size_t i, std::size_t ordinal) const {
    for (std::size_t r = 0; r < ref_records_.size(); ++r) {
      if (c_.sequences[ref_records_[r]].name == c_.sequences[i].name) return r;
    }
    if (ordinal < ref_records_.size()) return ordinal;
    return std::nullopt;
  }

  Universe& get_universe(std::size_t u) {
    auto& slot = universes_[u];
    if (!slot) {
      slot = std::make_unique<Universe>();
      std::span<const Symbol> region = ref_symbols_;
      if (u < ref_records_.size()) {
        const std::size_t rec = ref_records_[u];
        slot->ref_start = ref_start_[rec];
        region = region.subspan(slot->ref_start, c_.sequences[rec].length());
      }
      slot->ref_length = region.size();
      slot->index = std::make_unique<KmerIndex>(region, params_.min_match, params_.candidate_cap);
    }
    return *slot;
  }

  const Collection& c_;
  const ParseParams& params_;
  std::vector<Symbol> ref_symbols_;
  std::vector<std::uint64_t> ref_start_;
  std::vector<std::size_t> ref_records_;
  std::vector<std::unique_ptr<Universe>> universes_;
  ReservoirProvenance reservoir_;
};

void write_checkpoints(ByteWriter& w, const CheckpointTable& t) {
  const Checkpoint zero{};
  const Checkpoint* prev = &zero;
  for (const Checkpoint& c : t.checkpoints) {
    // factor_start never precedes the nominal position or the previous window's start.
    w.varint(c.factor_start - std::max(c.source_position, prev->factor_start));
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      w.varint(c.raw_offsets[s] - prev->raw_offsets[s]);
      w.varint(c.coded_offsets[s] - prev->coded_offsets[s]);
    }
    prev = &c;
  }
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    w.varint(t.end.raw_offsets[s] - prev->raw_offsets[s]);
    w.varint(t.end.coded_offsets[s] - prev->coded_offsets[s]);
  }
}

void begin_section(ByteWriter& w, SectionTag tag, std::size_t& length_at) {
  w.u32(tag);
  length_at = w.size();
  w.u64(0);
}

void end_section(ByteWriter& w, std::size_t length_at) { w.patch_u64(length_at, w.size() - length_at - 8); }

std::vector<std::uint8_t> Compressor::serialize(const ArchiveHeader& h, std::span<const std::uint8_t> payload,
                                                std::size_t reference_index) {
  ByteWriter w;
  for (char c : kArchiveMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(h.version);
  w.u64(0);  // checksum
  w.u64(0);  // header length
  std::size_t at = 0;

  begin_section(w, kSectionParams, at);
  const ParseParams& p = h.params;
  for (std::uint32_t v : {p.min_match, p.min_extension, p.min_reservoir_run, p.gap_limit, p.cheap_offset_bound,
                          p.length_slack, p.candidate_cap, p.checkpoint_interval}) {
    w.varint(v);
  }
  w.u8(static_cast<std::uint8_t>(h.granularity));
  w.varint(reference_index);
  end_section(w, at);

  begin_section(w, kSectionReference, at);
  w.varint(h.reference_index.symbol_count);
  w.varint(h.reference_index.block_size);
  w.varint(h.reference_payload_offset);
  w.u8(h.reference_table ? 1 : 0);
  if (h.reference_table) w.raw(h.reference_table->serialize());
  w.varint(h.reference_index.start_offsets.size());
  std::uint64_t prev = 0;
  for (std::uint64_t off : h.reference_index.start_offsets) {
    w.varint(off - prev);
    prev = off;
  }
  end_section(w, at);

  begin_section(w, kSectionReservoir, at);
  w.varint(h.reservoir.entries().size());
  for (const ReservoirEntry& e : h.reservoir.entries()) {
    w.varint(e.origin_sequence);
    w.varint(e.origin_position);
    w.varint(e.length);
  }
  end_section(w, at);

  begin_section(w, kSectionModels, at);
  std::uint8_t mask = 0;
  for (std::size_t m = 0; m < kModelCount; ++m) {
    if (h.models.tables[m]) mask |= static_cast<std::uint8_t>(1u << m);
  }
  w.u8(mask);
  for (const auto& t : h.models.tables) {
    if (t) w.raw(t->serialize());
  }
  end_section(w, at);

  begin_section(w, kSectionSequences, at);
  w.varint(h.sequences.size());
  for (const SequenceEntry& e : h.sequences) {
    w.string(e.name);
    w.string(e.group);
    w.u8(static_cast<std::uint8_t>(e.role));
    w.varint(e.length);
    if (e.role == SequenceRole::kReference) {
      w.varint(e.reference_start);
    } else {
      w.svarint(e.diagonal_base);
      w.varint(e.payload_offset);
      write_checkpoints(w, e.checkpoints);
    }
  }
  end_section(w, at);

  const std::size_t header_length = w.size() - kPrefixSize;
  w.patch_u64(kHeaderLengthAt, header_length);
  w.raw(payload);
  auto& bytes = w.bytes();
  w.patch_u64(kChecksumAt, checksum(std::span(bytes).subspan(kHeaderLengthAt)));
  return std::move(bytes);
}

// ---------------------------------------------------------------------------
// Parsing

CheckpointTable read_checkpoints(ByteReader& r, std::uint64_t length, std::uint32_t interval) {
  CheckpointTable t;
  const std::uint64_t count = length == 0 ? 1 : (length + interval - 1) / interval;
  if (count > r.remaining()) corrupt("checkpoint table larger than the header");
  t.checkpoints.resize(static_cast<std::size_t>(count));
  Checkpoint prev{};
  for (std::uint64_t w = 0; w < count; ++w) {
    Checkpoint& c = t.checkpoints[static_cast<std::size_t>(w)];
    c.source_position = w * interval;
    c.factor_start = std::max(c.source_position, prev.factor_start) + r.varint();
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      c.raw_offsets[s] = prev.raw_offsets[s] + r.varint();
      c.coded_offsets[s] = prev.coded_offsets[s] + r.varint();
    }
    prev = c;
  }
  t.end.source_position = length;
  t.end.factor_start = length;
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    t.end.raw_offsets[s] = prev.raw_offsets[s] + r.varint();
    t.end.coded_offsets[s] = prev.coded_offsets[s] + r.varint();
  }
  return t;
}

std::uint32_t read_u32_varint(ByteReader& r) {
  const std::uint64_t v = r.varint();
  if (v > 0xffffffffULL) corrupt("parameter out of range");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Archive Archive::from_bytes(std::vector<std::uint8_t> bytes) {
  Archive a;
  a.bytes_ = std::move(bytes);
  const std::span<const std::uint8_t> all(a.bytes_);
  if (all.size() < kPrefixSize) corrupt("file too short for an archive header");
  if (!std::equal(kArchiveMagic.begin(), kArchiveMagic.end(), all.begin(),
                  [](char m, std::uint8_t b) { return static_cast<std::uint8_t>(m) == b; })) {
    corrupt("bad magic (not an RLZG archive)");
  }
  if (all[4] != kArchiveVersion) {
    fail(ErrorKind::kUnsupportedVersion,
         "unsupported archive version " + std::to_string(all[4]) + " (this build reads version " +
             std::to_string(kArchiveVersion) + ")");
  }
  ByteReader prefix(all.subspan(kChecksumAt, 16));
  const std::uint64_t stored_crc = prefix.u64();
  const std::uint64_t header_length = prefix.u64();
  if (header_length > all.size() - kPrefixSize) corrupt("header length exceeds file size");
  if (checksum(all.subspan(kHeaderLengthAt)) != stored_crc) corrupt("checksum mismatch");

  ArchiveHeader& h = a.header_;
  ArchiveSizes& sz = a.sizes_;
  a.payload_ = all.subspan(kPrefixSize + header_length);
  sz.total = all.size();
  sz.header = kPrefixSize + header_length;

  std::size_t reference_index = 0;
  bool seen[6] = {false, false, false, false, false, false};
  ByteReader sections(all.subspan(kPrefixSize, header_length));
  while (!sections.done()) {
    const std::uint32_t tag = sections.u32();
    const std::uint64_t len = sections.u64();
    ByteReader r(sections.raw(len));
    if (tag >= 1 && tag <= 5) {
      if (seen[tag]) corrupt("duplicate header section");
      seen[tag] = true;
    }
    switch (tag) {
      case kSectionParams: {
        ParseParams& p = h.params;
        for (std::uint32_t* v : {&p.min_match, &p.min_extension, &p.min_reservoir_run, &p.gap_limit,
                                 &p.cheap_offset_bound, &p.length_slack, &p.candidate_cap, &p.checkpoint_interval}) {
          *v = read_u32_varint(r);
        }
        const std::uint8_t g = r.u8();
        if (g > 1) corrupt("unknown matching granularity");
        h.granularity = static_cast<MatchingGranularity>(g);
        reference_index = static_cast<std::size_t>(r.varint());
        try {
          validate_params(p);
        } catch (const Error& e) {
          corrupt(e.what());
        }
        break;
      }
      case kSectionReference: {
        sz.reference_index = len;
        RefBlockIndex& idx = h.reference_index;
        idx.symbol_count = r.varint();
        idx.block_size = read_u32_varint(r);
        h.reference_payload_offset = r.varint();
        const std::uint8_t has_table = r.u8();
        if (has_table > 1) corrupt("bad reference table flag");
        if (has_table) h.reference_table = HuffmanTable::deserialize(r.raw(kSerializedTableSize));
        const std::uint64_t count = r.varint();
        if (count > r.remaining()) corrupt("reference block index larger than its section");
        std::uint64_t off = 0;
        idx.start_offsets.reserve(static_cast<std::size_t>(count));
        for (std::uint64_t i = 0; i < count; ++i) {
          off += r.varint();
          idx.start_offsets.push_back(off);
        }
        break;
      }
      case kSectionReservoir: {
        sz.reservoir_table = len;
        const std::uint64_t count = r.varint();
        if (count > r.remaining()) corrupt("reservoir table larger than its section");
        for (std::uint64_t i = 0; i < count; ++i) {
          ReservoirEntry e;
          const std::uint64_t origin = r.varint();
          if (origin > 0xffffffffULL) corrupt("reservoir origin out of range");
          e.origin_sequence = static_cast<std::uint32_t>(origin);
          e.origin_position = r.varint();
          e.length = r.varint();
          h.reservoir.append(e, 1);
        }
        break;
      }
      case kSectionModels: {
        sz.models = len;
        const std::uint8_t mask = r.u8();
        if (mask >> kModelCount) corrupt("unknown model bits");
        for (std::size_t m = 0; m < kModelCount; ++m) {
          if (mask & (1u << m)) h.models.tables[m] = HuffmanTable::deserialize(r.raw(kSerializedTableSize));
        }
        break;
      }
      case kSectionSequences: {
        sz.sequence_table = len;
        if (!seen[kSectionParams]) corrupt("sequence table precedes parameters");
        const std::uint64_t count = r.varint();
        if (count > r.remaining()) corrupt("sequence table larger than its section");
        for (std::uint64_t i = 0; i < count; ++i) {
          const std::size_t begin = r.position();
          SequenceEntry e;
          e.name = r.string();
          e.group = r.string();
          const std::uint8_t role = r.u8();
          if (role > 1) corrupt("unknown sequence role");
          e.role = static_cast<SequenceRole>(role);
          e.length = r.varint();
          if (e.role == SequenceRole::kReference) {
            e.reference_start = r.varint();
            sz.reference_symbols += e.length;
          } else {
            e.diagonal_base = r.svarint();
            e.payload_offset = r.varint();
            e.checkpoints = read_checkpoints(r, e.length, h.params.checkpoint_interval);
            sz.relative_symbols += e.length;
            sz.relative_tables += r.position() - begin;
          }
          h.sequences.push_back(std::move(e));
        }
        break;
      }
      default:
        break;  // unknown trailing section from a newer writer
    }
  }
  for (int tag = 1; tag <= 5; ++tag) {
    if (!seen[tag]) corrupt("missing header section " + std::to_string(tag));
  }

  // Cross-section invariants.
  if (h.sequences.empty()) corrupt("archive has no sequences");
  if (reference_index >= h.sequences.size() || h.sequences[reference_index].role != SequenceRole::kReference) {
    corrupt("reference index does not name a reference record");
  }
  a.reference_index_ = reference_index;

  const auto& ref_offsets = h.reference_index.start_offsets;
  const std::uint64_t ref_payload_size = ref_offsets.empty() ? 0 : ref_offsets.back();
  if (h.reference_payload_offset > a.payload_.size() ||
      ref_payload_size > a.payload_.size() - h.reference_payload_offset) {
    corrupt("reference payload outside the file");
  }
  validate_reference_index(h.reference_index, ref_payload_size);
  if (ref_payload_size > 0 && !h.reference_table) corrupt("reference payload without a Huffman table");
  sz.reference_payload = ref_payload_size;

  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  ranges.emplace_back(h.reference_payload_offset, ref_payload_size);
  std::uint64_t ref_cursor = 0;
  a.stream_spans_.resize(h.sequences.size());
  for (std::size_t i = 0; i < h.sequences.size(); ++i) {
    const SequenceEntry& e = h.sequences[i];
    if (e.role == SequenceRole::kReference) {
      if (e.reference_start != ref_cursor) corrupt("reference records do not tile the reference");
      ref_cursor += e.length;
      continue;
    }
    std::array<std::uint64_t, kStreamCount> sizes{};
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      sizes[s] = e.checkpoints.end.coded_offsets[s];
      if (sizes[s] > a.payload_.size()) corrupt("stream larger than the payload region");
      total += sizes[s];
    }
    if (e.payload_offset > a.payload_.size() || total > a.payload_.size() - e.payload_offset) {
      corrupt("sequence payload outside the file");
    }
    validate_checkpoints(e.checkpoints, e.length, h.params.checkpoint_interval, sizes);
    std::uint64_t off = e.payload_offset;
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      a.stream_spans_[i][s] = a.payload_.subspan(off, sizes[s]);
      off += sizes[s];
    }
    ranges.emplace_back(e.payload_offset, total);
    sz.relative_payload += total;
  }
  if (ref_cursor != h.reference_index.symbol_count) corrupt("reference records do not cover the reference");
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i - 1].first + ranges[i - 1].second > ranges[i].first) corrupt("payload ranges overlap");
  }

  for (const ReservoirEntry& e : h.reservoir.entries()) {
    if (e.origin_sequence >= h.sequences.size()) corrupt("reservoir origin names no sequence");
    const SequenceEntry& origin = h.sequences[e.origin_sequence];
    if (origin.role != SequenceRole::kRelative) corrupt("reservoir origin is not a relative sequence");
    if (e.length < h.params.min_reservoir_run || e.origin_position > origin.length ||
        e.length > origin.length - e.origin_position) {
      corrupt("reservoir entry outside its origin sequence");
    }
  }
  return a;
}

ReferenceView Archive::reference() const {
  const auto& h = header_;
  const std::uint64_t size = h.reference_index.start_offsets.empty() ? 0 : h.reference_index.start_offsets.back();
  return {&h.reference_index, payload_.subspan(h.reference_payload_offset, size),
          h.reference_table ? &*h.reference_table : nullptr};
}

StreamsView Archive::streams(std::size_t sequence) const {
  const SequenceEntry& e = header_.sequences.at(sequence);
  if (e.role != SequenceRole::kRelative) fail(ErrorKind::kInvalidArgument, "reference records have no factor streams");
  const auto& spans = stream_spans_[sequence];
  return {{spans[0], spans[1], spans[2], spans[3]}, &e.checkpoints, e.length};
}

std::size_t Archive::find_sequence(std::string_view name) const {
  const auto& seqs = header_.sequences;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].group + "/" + seqs[i].name == name) return i;
  }
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].name != name) continue;
    if (found) fail(ErrorKind::kInvalidArgument, "sequence name '" + std::string(name) + "' is ambiguous; use group/name");
    found = i;
  }
  if (!found) fail(ErrorKind::kNotFound, "no sequence named '" + std::string(name) + "'");
  return *found;
}

namespace {

// Rebuilds symbol ranges of any sequence straight from the archive. Reservoir
// phrases are resolved through their provenance; the origin range is made of
// literals, so one level of indirection is all a valid archive needs.
class Materializer {
 public:
  Materializer(const Archive& archive, std::span<const Symbol> decoded_reference, ExtractStats* stats)
      : a_(archive), ref_(archive.reference()), full_ref_(decoded_reference), stats_(stats) {}

  void run(std::size_t seq, std::uint64_t start, std::uint64_t end, int depth, std::vector<Symbol>& out) {
    const SequenceEntry& e = a_.header().sequences[seq];
    if (start > end || end > e.length) corrupt("range outside sequence '" + e.name + "'");
    if (start == end) return;
    if (e.role == SequenceRole::kReference) {
      fetch_reference(e.reference_start + start, end - start, out);
      return;
    }
    const std::size_t first = out.size();
    DecodeStats ds;
    const FactorWindow window = decode_window(a_.streams(seq), a_.header().models,
                                              checkpoint_for(e.checkpoints, start), end, e.diagonal_base, &ds);
    if (stats_) {
      stats_->coded_bytes_read += ds.coded_bytes_read;
      stats_->windows_decoded += ds.windows;
    }
    const SymbolFetch reference = [this](std::uint64_t p, std::uint64_t n, std::vector<Symbol>& o) {
      fetch_reference(p, n, o);
    };
    const SymbolFetch reservoir = [this, depth](std::uint64_t p, std::uint64_t n, std::vector<Symbol>& o) {
      if (depth > 0) corrupt("reservoir phrase refers to another reservoir phrase");
      fetch_reservoir(p, n, depth, o);
    };
    std::uint64_t pos = window.start;
    if (pos > start) corrupt("window starts after the requested position");
    for (const Factor& f : window.factors) {
      if (pos >= end) break;
      const std::uint64_t advance = f.source_advance();
      if (pos + advance > start) {
        const std::uint64_t lo = std::max(start, pos) - pos;
        const std::uint64_t hi = std::min(end, pos + advance) - pos;
        apply_factor_slice(f, lo, hi, reference, reservoir, out);
      }
      pos += advance;
    }
    if (out.size() - first != end - start) corrupt("factors do not cover the requested range");
  }

 private:
  void fetch_reference(std::uint64_t pos, std::uint64_t n, std::vector<Symbol>& out) {
    const std::uint64_t len = ref_.length();
    if (pos > len || n > len - pos) corrupt("match points outside the reference");
    if (!full_ref_.empty() || len == 0) {
      out.insert(out.end(), full_ref_.begin() + static_cast<std::ptrdiff_t>(pos),
                 full_ref_.begin() + static_cast<std::ptrdiff_t>(pos + n));
      return;
    }
    RefReadStats rs;
    const std::vector<Symbol> symbols = decode_reference_range(ref_, pos, pos + n, &rs);
    if (stats_) stats_->reference_bytes_read += rs.payload_bytes_read;
    out.insert(out.end(), symbols.begin(), symbols.end());
  }

  void fetch_reservoir(std::uint64_t offset, std::uint64_t n, int depth, std::vector<Symbol>& out) {
    const ReservoirProvenance& prov = a_.header().reservoir;
    if (offset > prov.total_length() || n > prov.total_length() - offset) {
      corrupt("match points outside the reservoir");
    }
    for (const ReservoirPiece& piece : prov.resolve(offset, n)) {
      if (stats_) ++stats_->reservoir_lookups;
      run(piece.origin_sequence, piece.origin_position, piece.origin_position + piece.length, depth + 1, out);
    }
  }

  const Archive& a_;
  ReferenceView ref_;
  std::span<const Symbol> full_ref_;
  ExtractStats* stats_;
};

Collection skeleton(const Archive& archive) {
  const ArchiveHeader& h = archive.header();
  Collection c;
  c.granularity = h.granularity;
  c.reference_index = archive.reference_record();
  bool named_groups = false;
  for (const SequenceEntry& e : h.sequences) {
    c.sequences.push_back({e.name, {}});
    c.groups.push_back(e.group);
    named_groups = named_groups || e.group != e.name;
  }
  // Collections without explicit groups store each record as its own group.
  if (!named_groups) c.groups.clear();
  return c;
}

void decompress_sequential(const Archive& archive, std::span<const Symbol> ref, Collection& c) {
  const ArchiveHeader& h = archive.header();
  const ReservoirProvenance& prov = h.reservoir;
  for (std::size_t i = 0; i < h.sequences.size(); ++i) {
    const SequenceEntry& e = h.sequences[i];
    std::vector<Symbol>& out = c.sequences[i].symbols;
    if (e.role == SequenceRole::kReference) {
      out.assign(ref.begin() + static_cast<std::ptrdiff_t>(e.reference_start),
                 ref.begin() + static_cast<std::ptrdiff_t>(e.reference_start + e.length));
      continue;
    }
    const FactorWindow window =
        decode_window(archive.streams(i), h.models, 0, e.length, e.diagonal_base, nullptr);
    const SymbolFetch reference = [ref](std::uint64_t p, std::uint64_t n, std::vector<Symbol>& o) {
      if (p > ref.size() || n > ref.size() - p) corrupt("match points outside the reference");
      o.insert(o.end(), ref.begin() + static_cast<std::ptrdiff_t>(p), ref.begin() + static_cast<std::ptrdiff_t>(p + n));
    };
    std::vector<Symbol> scratch;
    const SymbolFetch reservoir = [&](std::uint64_t p, std::uint64_t n, std::vector<Symbol>& o) {
      if (p > prov.total_length() || n > prov.total_length() - p) corrupt("match points outside the reservoir");
      for (const ReservoirPiece& piece : prov.resolve(p, n)) {
        // Phrases come from sequences already decoded, possibly this one.
        if (piece.origin_sequence > i) corrupt("reservoir phrase from a later sequence");
        const std::vector<Symbol>& src = c.sequences[piece.origin_sequence].symbols;
        if (piece.origin_position + piece.length > src.size()) corrupt("reservoir phrase not yet decoded");
        scratch.assign(src.begin() + static_cast<std::ptrdiff_t>(piece.origin_position),
                       src.begin() + static_cast<std::ptrdiff_t>(piece.origin_position + piece.length));
        o.insert(o.end(), scratch.begin(), scratch.end());
      }
    };
    out.reserve(e.length);
    for (const Factor& f : window.factors) apply_factor_slice(f, 0, f.source_advance(), reference, reservoir, out);
    if (out.size() != e.length) corrupt("sequence '" + e.name + "' decodes to the wrong length");
  }
}

void decompress_parallel(const Archive& archive, std::span<const Symbol> ref, Collection& c, unsigned threads) {
  const std::size_t n = archive.header().sequences.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    Materializer m(archive, ref, nullptr);
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        m.run(i, 0, archive.header().sequences[i].length, 0, c.sequences[i].symbols);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

Archive compress(const Collection& collection, const ParseParams& params, const CompressOptions& options,
                 CompressStats* stats) {
  validate_params(params);
  validate_collection(collection);
  const auto t0 = std::chrono::steady_clock::now();
  Compressor compressor(collection, params);
  Archive archive = Archive::from_bytes(compressor.run(stats, options.keep_parses));
  if (stats) {
    stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats->input_symbols = 0;
    for (const Sequence& s : collection.sequences) stats->input_symbols += s.length();
  }
  return archive;
}

Collection decompress(const Archive& archive, const DecompressOptions& options) {
  const std::vector<Symbol> ref = decode_reference_range(archive.reference(), 0, archive.reference().length());
  Collection c = skeleton(archive);
  if (options.threads > 1) {
    decompress_parallel(archive, ref, c, options.threads);
  } else {
    decompress_sequential(archive, ref, c);
  }
  return c;
}

std::vector<Symbol> extract(const Archive& archive, std::string_view sequence_name, std::uint64_t start,
                            std::uint64_t end, ExtractStats* stats) {
  return extract(archive, archive.find_sequence(sequence_name), start, end, stats);
}

std::vector<Symbol> extract(const Archive& archive, std::size_t sequence, std::uint64_t start, std::uint64_t end,
                            ExtractStats* stats) {
  const auto& seqs = archive.header().sequences;
  if (sequence >= seqs.size()) fail(ErrorKind::kNotFound, "sequence index out of range");
  const SequenceEntry& e = seqs[sequence];
  if (start > end || end > e.length) {
    fail(ErrorKind::kOutOfRange, "range [" + std::to_string(start) + ", " + std::to_string(end) +
                                     ") outside sequence '" + e.name + "' of length " + std::to_string(e.length));
  }
  std::vector<Symbol> out;
  out.reserve(end - start);
  Materializer(archive, {}, stats).run(sequence, start, end, 0, out);
  return out;
}

std::uint64_t count_nfree_windows(std::span<const Symbol> symbols, std::uint32_t window) {
  if (window == 0) fail(ErrorKind::kInvalidArgument, "window must be positive");
  std::uint64_t count = 0;
  std::uint64_t run = 0;
  for (Symbol s : symbols) {
    run = s == kN ? 0 : run + 1;
    if (run >= window) ++count;
  }
  return count;
}

ReferenceChoice select_reference(const Collection& collection, std::uint32_t window) {
  if (collection.sequences.empty()) fail(ErrorKind::kInvalidArgument, "empty collection");
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::size_t, std::uint64_t>> groups;  // first record, windows
  for (std::size_t i = 0; i < collection.sequences.size(); ++i) {
    const std::string& g = collection.group_of(i);
    auto [it, inserted] = groups.try_emplace(g, i, 0);
    if (inserted) order.push_back(g);
    it->second.second += count_nfree_windows(collection.sequences[i].symbols, window);
  }
  ReferenceChoice best{groups[order.front()].first, groups[order.front()].second};
  for (const std::string& g : order) {
    if (groups[g].second > best.windows) best = {groups[g].first, groups[g].second};
  }
  return best;
}

}  // namespace rlzg
