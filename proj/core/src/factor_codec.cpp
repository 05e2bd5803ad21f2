#include "rlzg/factor_codec.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rlzg/bit_io.hpp"
#include "rlzg/error.hpp"
#include "rlzg/triplets.hpp"

namespace rlzg {

namespace {

void put_u32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

bool offset_has_payload(std::uint8_t first) {
  return first == kOffsetNegEscape || first == kOffsetPosEscape || first == kOffsetReservoir;
}

}  // namespace

void append_offset_delta(std::int64_t delta, std::vector<std::uint8_t>& out) {
  if (delta >= -kDeltaBias && delta <= kDeltaBias) {
    out.push_back(static_cast<std::uint8_t>(delta + kDeltaBias));
    return;
  }
  if (delta < std::numeric_limits<std::int32_t>::min() || delta > std::numeric_limits<std::int32_t>::max()) {
    fail(ErrorKind::kInvalidArgument, "offset delta " + std::to_string(delta) + " does not fit 32 bits");
  }
  out.push_back(delta < 0 ? kOffsetNegEscape : kOffsetPosEscape);
  put_u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(delta)), out);
}

void append_reservoir_offset(std::uint64_t offset, std::vector<std::uint8_t>& out) {
  if (offset > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::kInvalidArgument, "reservoir offset does not fit 32 bits");
  }
  out.push_back(kOffsetReservoir);
  put_u32(static_cast<std::uint32_t>(offset), out);
}

void append_length(std::uint64_t length, std::vector<std::uint8_t>& out) {
  if (length == 0) fail(ErrorKind::kInvalidArgument, "zero length");
  if (length <= 255) {
    out.push_back(static_cast<std::uint8_t>(length - 1));
    return;
  }
  if (length > std::numeric_limits<std::uint32_t>::max()) fail(ErrorKind::kInvalidArgument, "length exceeds 32 bits");
  out.push_back(kLengthEscape);
  put_u32(static_cast<std::uint32_t>(length), out);
}

std::uint8_t pack_flags(std::span<const std::uint8_t> four_flags) {
  std::uint8_t byte = 0;
  for (std::size_t i = 0; i < four_flags.size() && i < 4; ++i) byte |= static_cast<std::uint8_t>((four_flags[i] & 3u) << (2 * i));
  return byte;
}

namespace {

class StreamEncoder {
 public:
  StreamEncoder(const ParseParams& params, std::uint64_t source_length, std::int64_t base)
      : interval_(params.checkpoint_interval), n_(source_length), base_(base) {}

  RawStreams run(const Parse& parse) {
    std::uint64_t pos = 0;
    if (n_ == 0) open_window(0, 0);
    for (const Factor& f : parse.factors) {
      while (next_nominal_ <= pos && next_nominal_ < n_) {
        open_window(next_nominal_, pos);
        next_nominal_ += interval_;
      }
      encode(f, pos);
      pos += f.source_advance();
    }
    while (next_nominal_ < n_) {
      open_window(next_nominal_, n_);
      next_nominal_ += interval_;
    }
    close_window();
    auto& end = raw_.table.end;
    end.source_position = n_;
    end.factor_start = n_;
    for (std::size_t s = 0; s < kStreamCount; ++s) end.raw_offsets[s] = raw_.bytes[s].size();
    return std::move(raw_);
  }

 private:
  void close_window() {
    pack_triplets(literals_, raw_.bytes[kLiterals]);
    literals_.clear();
    for (std::size_t i = 0; i < flags_.size(); i += 4) {
      raw_.bytes[kFlags].push_back(pack_flags(std::span(flags_).subspan(i, std::min<std::size_t>(4, flags_.size() - i))));
    }
    flags_.clear();
  }

  void open_window(std::uint64_t nominal, std::uint64_t factor_start) {
    if (!raw_.table.checkpoints.empty()) close_window();
    Checkpoint cp;
    cp.source_position = nominal;
    cp.factor_start = factor_start;
    for (std::size_t s = 0; s < kStreamCount; ++s) cp.raw_offsets[s] = raw_.bytes[s].size();
    raw_.table.checkpoints.push_back(cp);
    previous_ = 0;
  }

  void encode(const Factor& f, std::uint64_t pos) {
    auto& offsets = raw_.bytes[kOffsets];
    auto& lengths = raw_.bytes[kLengths];
    switch (f.kind) {
      case FactorKind::kLiteral:
        flags_.push_back(kFlagLiteral);
        append_length(f.symbols.size(), lengths);
        literals_.insert(literals_.end(), f.symbols.begin(), f.symbols.end());
        return;
      case FactorKind::kNRun:
        flags_.push_back(1);
        offsets.push_back(kOffsetNRun);
        append_length(f.run, lengths);
        return;
      case FactorKind::kMatch: {
        const std::int64_t d = static_cast<std::int64_t>(pos) + base_ - static_cast<std::int64_t>(f.target);
        append_offset_delta(d - previous_, offsets);
        previous_ = d;
        break;
      }
      case FactorKind::kReservoirMatch:
        append_reservoir_offset(f.target, offsets);
        break;
    }
    flags_.push_back(static_cast<std::uint8_t>(f.piece_count));
    for (std::uint32_t len : f.piece_lengths()) append_length(len, lengths);
    literals_.insert(literals_.end(), f.symbols.begin(), f.symbols.end());
  }

  std::uint64_t interval_;
  std::uint64_t n_;
  std::int64_t base_;
  std::uint64_t next_nominal_ = 0;
  std::int64_t previous_ = 0;
  std::vector<Symbol> literals_;
  std::vector<std::uint8_t> flags_;
  RawStreams raw_;
};

// Calls visit(byte, model) for every byte of stream `s` in [begin, end).
template <typename Visit>
void walk_stream(std::size_t s, std::span<const std::uint8_t> bytes, Visit&& visit) {
  switch (s) {
    case kOffsets:
      for (std::size_t i = 0; i < bytes.size();) {
        const std::uint8_t first = bytes[i++];
        visit(first, kOff0);
        if (offset_has_payload(first)) {
          for (int k = 0; k < 4 && i < bytes.size(); ++k) visit(bytes[i++], kOffExt);
        }
      }
      return;
    case kLengths:
      for (std::size_t i = 0; i < bytes.size();) {
        const std::uint8_t first = bytes[i++];
        visit(first, kLen0);
        if (first == kLengthEscape) {
          for (int k = 0; k < 4 && i < bytes.size(); ++k) visit(bytes[i++], kLenExt);
        }
      }
      return;
    case kLiterals:
      for (std::uint8_t b : bytes) visit(b, kLit);
      return;
    case kFlags:
      for (std::uint8_t b : bytes) visit(b, kFlg);
      return;
  }
}

}  // namespace

RawStreams encode_parse(const Parse& parse, const ParseParams& params, std::int64_t diagonal_base) {
  validate_params(params);
  validate_parse(parse, params);
  return StreamEncoder(params, parse.source_length, diagonal_base).run(parse);
}

void tally_models(const RawStreams& raw, ModelTallies& tallies) {
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    walk_stream(s, raw.bytes[s], [&](std::uint8_t b, Model m) { tallies[m][b]++; });
  }
}

const HuffmanTable& ModelSet::get(Model m) const {
  if (!tables[m]) corrupt("stream uses model " + std::to_string(static_cast<int>(m)) + " which the archive lacks");
  return *tables[m];
}

ModelSet build_models(const ModelTallies& tallies) {
  ModelSet set;
  for (std::size_t m = 0; m < kModelCount; ++m) {
    const bool used = std::any_of(tallies[m].begin(), tallies[m].end(), [](std::uint64_t c) { return c != 0; });
    if (used) set.tables[m] = HuffmanTable::build(tallies[m]);
  }
  return set;
}

ModelSet build_models(std::span<const RawStreams> all) {
  if (all.empty()) fail(ErrorKind::kInvalidArgument, "cannot build models for an empty collection");
  ModelTallies tallies{};
  for (const RawStreams& raw : all) tally_models(raw, tallies);
  return build_models(tallies);
}

CodedStreams compress_streams(const RawStreams& raw, const ModelSet& models) {
  CodedStreams coded;
  coded.table = raw.table;
  auto& cps = coded.table.checkpoints;
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    auto& out = coded.payloads[s];
    BitWriter writer(out);
    for (std::size_t w = 0; w < cps.size(); ++w) {
      cps[w].coded_offsets[s] = out.size();
      const std::uint64_t begin = cps[w].raw_offsets[s];
      const std::uint64_t end = w + 1 < cps.size() ? cps[w + 1].raw_offsets[s] : raw.table.end.raw_offsets[s];
      const auto window = std::span(raw.bytes[s]).subspan(begin, end - begin);
      walk_stream(s, window, [&](std::uint8_t b, Model m) {
        const auto& table = models.tables[m];
        if (!table) fail(ErrorKind::kInvalidArgument, "no model for a stream byte");
        table->encode_symbol(writer, b);
      });
      writer.flush_to_byte_boundary();
    }
    coded.table.end.coded_offsets[s] = out.size();
  }
  return coded;
}

std::size_t checkpoint_for(const CheckpointTable& table, std::uint64_t pos) {
  const auto& cps = table.checkpoints;
  if (cps.empty()) corrupt("sequence has no checkpoints");
  // factor_start is non-decreasing; pick the last one at or before pos.
  const auto it = std::upper_bound(cps.begin(), cps.end(), pos,
                                   [](std::uint64_t p, const Checkpoint& c) { return p < c.factor_start; });
  if (it == cps.begin()) corrupt("first checkpoint does not start at position 0");
  return static_cast<std::size_t>(it - cps.begin()) - 1;
}

void validate_checkpoints(const CheckpointTable& table, std::uint64_t source_length, std::uint32_t interval,
                          const std::array<std::uint64_t, kStreamCount>& payload_sizes) {
  const auto& cps = table.checkpoints;
  const std::uint64_t expected = source_length == 0 ? 1 : (source_length + interval - 1) / interval;
  if (cps.size() != expected) corrupt("checkpoint count does not match the sequence length");
  if (table.end.source_position != source_length || table.end.factor_start != source_length) {
    corrupt("checkpoint totals do not match the sequence length");
  }
  for (std::size_t w = 0; w < cps.size(); ++w) {
    const Checkpoint& c = cps[w];
    const Checkpoint& next = w + 1 < cps.size() ? cps[w + 1] : table.end;
    if (c.source_position != w * static_cast<std::uint64_t>(interval)) corrupt("checkpoint at an unexpected position");
    if (c.factor_start < c.source_position || c.factor_start > next.factor_start) {
      corrupt("checkpoint factor start out of order");
    }
    if (w == 0 && c.factor_start != 0) corrupt("first checkpoint must start at position 0");
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      if (w == 0 && (c.raw_offsets[s] != 0 || c.coded_offsets[s] != 0)) corrupt("first checkpoint must start streams at 0");
      if (c.raw_offsets[s] > next.raw_offsets[s] || c.coded_offsets[s] > next.coded_offsets[s]) {
        corrupt("checkpoint stream offsets decrease");
      }
    }
  }
  for (std::size_t s = 0; s < kStreamCount; ++s) {
    if (table.end.coded_offsets[s] != payload_sizes[s]) corrupt("coded stream size disagrees with checkpoint totals");
  }
}

namespace {

std::int32_t as_i32(std::uint32_t v) { return static_cast<std::int32_t>(v); }

class WindowDecoder {
 public:
  WindowDecoder(const StreamsView& streams, const ModelSet& models, std::int64_t base, DecodeStats* stats)
      : streams_(streams), table_(*streams.table), models_(models), base_(base), stats_(stats) {}

  FactorWindow run(std::size_t checkpoint, std::uint64_t until) {
    const auto& cps = table_.checkpoints;
    if (checkpoint >= cps.size()) corrupt("checkpoint index out of range");
    FactorWindow out;
    enter(checkpoint);
    out.start = pos_;
    const std::uint64_t stop = std::min(until, streams_.source_length);
    while (pos_ < stop) {
      while (window_ + 1 < cps.size() && cps[window_ + 1].source_position <= pos_) {
        finish_window(cps[window_ + 1]);
        enter(window_ + 1);
      }
      out.factors.push_back(next_factor());
      pos_ += out.factors.back().source_advance();
      if (pos_ > streams_.source_length) corrupt("factors run past the end of the sequence");
    }
    if (pos_ == streams_.source_length) {
      // Also validate the closing windows when the whole tail was decoded.
      while (window_ + 1 < cps.size()) {
        finish_window(cps[window_ + 1]);
        enter(window_ + 1);
      }
      finish_window(table_.end);
    }
    flush_stats();
    return out;
  }

 private:
  const Checkpoint& window_end(std::size_t w) const {
    return w + 1 < table_.checkpoints.size() ? table_.checkpoints[w + 1] : table_.end;
  }

  void enter(std::size_t w) {
    flush_stats();
    window_ = w;
    const Checkpoint& c = table_.checkpoints[w];
    const Checkpoint& e = window_end(w);
    if (c.factor_start != (entered_ ? pos_ : c.factor_start)) corrupt("window does not start at the expected factor");
    if (!entered_) pos_ = c.factor_start;
    entered_ = true;
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      const std::uint64_t from = c.coded_offsets[s];
      const std::uint64_t to = e.coded_offsets[s];
      if (from > to || to > streams_.payloads[s].size()) corrupt("window extends past the coded stream");
      readers_[s] = BitReader(streams_.payloads[s].subspan(from, to - from));
      consumed_[s] = c.raw_offsets[s];
      limit_[s] = e.raw_offsets[s];
    }
    lit_left_ = 0;
    flag_left_ = 0;
    previous_ = 0;
    if (stats_) stats_->windows++;
  }

  void finish_window(const Checkpoint& next) {
    for (std::size_t s = 0; s < kStreamCount; ++s) {
      if (consumed_[s] != next.raw_offsets[s]) corrupt("window stream sizes disagree with the checkpoint table");
    }
  }

  void flush_stats() {
    if (!stats_) return;
    for (auto& r : readers_) {
      stats_->coded_bytes_read += r.bytes_touched();
      r = BitReader();
    }
  }

  std::uint8_t read(Stream s, Model m) {
    if (consumed_[s] >= limit_[s]) corrupt("stream window exhausted");
    consumed_[s]++;
    return models_.get(m).decode_symbol(readers_[s]);
  }

  std::uint32_t read_u32(Stream s, Model m) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(read(s, m)) << (8 * i);
    return v;
  }

  std::uint8_t next_flag() {
    if (flag_left_ == 0) {
      flag_byte_ = read(kFlags, kFlg);
      flag_left_ = 4;
    }
    const std::uint8_t f = flag_byte_ & 3u;
    flag_byte_ >>= 2;
    --flag_left_;
    return f;
  }

  Symbol next_literal() {
    if (lit_left_ == 0) {
      split_triplet(read(kLiterals, kLit), digits_);
      lit_left_ = 3;
    }
    return digits_[3 - lit_left_--];
  }

  std::uint64_t next_length() {
    const std::uint8_t first = read(kLengths, kLen0);
    if (first != kLengthEscape) return first + 1u;
    const std::uint32_t len = read_u32(kLengths, kLenExt);
    if (len <= 255) corrupt("escaped length below 256");
    return len;
  }

  Factor next_factor() {
    const std::uint8_t flag = next_flag();
    if (flag == kFlagLiteral) {
      const std::uint64_t len = next_length();
      if (len > streams_.source_length - pos_) corrupt("literal run past the end of the sequence");
      std::vector<Symbol> run(len);
      for (auto& s : run) s = next_literal();
      return Factor::literal(std::move(run));
    }
    const std::uint8_t first = read(kOffsets, kOff0);
    if (first == kOffsetNRun) {
      if (flag != 1) corrupt("N-run with gaps");
      return Factor::n_run(next_length());
    }
    std::uint64_t target = 0;
    FactorKind kind = FactorKind::kMatch;
    if (first == kOffsetReservoir) {
      kind = FactorKind::kReservoirMatch;
      target = read_u32(kOffsets, kOffExt);
    } else {
      std::int64_t delta;
      if (first == kOffsetNegEscape || first == kOffsetPosEscape) {
        delta = as_i32(read_u32(kOffsets, kOffExt));
        if (first == kOffsetNegEscape ? delta >= -kDeltaBias : delta <= kDeltaBias) {
          corrupt("offset escape payload inconsistent with its marker");
        }
      } else {
        delta = static_cast<std::int64_t>(first) - kDeltaBias;
      }
      const std::int64_t d = previous_ + delta;
      previous_ = d;
      const std::int64_t ref = static_cast<std::int64_t>(pos_) + base_ - d;
      if (ref < 0) corrupt("match points before the reference start");
      target = static_cast<std::uint64_t>(ref);
    }
    std::array<std::uint32_t, kGapLimit + 1> pieces{};
    std::array<Symbol, kGapLimit> gaps{};
    for (std::uint8_t i = 0; i < flag; ++i) {
      const std::uint64_t len = next_length();
      if (len > streams_.source_length) corrupt("match piece longer than the sequence");
      pieces[i] = static_cast<std::uint32_t>(len);
    }
    for (std::uint8_t i = 0; i + 1 < flag; ++i) gaps[i] = next_literal();
    const std::span<const std::uint32_t> piece_span(pieces.data(), flag);
    const std::span<const Symbol> gap_span(gaps.data(), flag - 1u);
    return kind == FactorKind::kMatch ? Factor::match(target, piece_span, gap_span)
                                      : Factor::reservoir_match(target, piece_span, gap_span);
  }

  const StreamsView& streams_;
  const CheckpointTable& table_;
  const ModelSet& models_;
  std::int64_t base_;
  DecodeStats* stats_;

  std::size_t window_ = 0;
  bool entered_ = false;
  std::uint64_t pos_ = 0;
  std::int64_t previous_ = 0;
  std::array<BitReader, kStreamCount> readers_{};
  std::array<std::uint64_t, kStreamCount> consumed_{};
  std::array<std::uint64_t, kStreamCount> limit_{};
  Symbol digits_[3] = {0, 0, 0};
  int lit_left_ = 0;
  std::uint8_t flag_byte_ = 0;
  int flag_left_ = 0;
};

}  // namespace

FactorWindow decode_window(const StreamsView& streams, const ModelSet& models, std::size_t checkpoint,
                           std::uint64_t until, std::int64_t diagonal_base, DecodeStats* stats) {
  if (streams.table == nullptr) fail(ErrorKind::kInternal, "streams view without a checkpoint table");
  return WindowDecoder(streams, models, diagonal_base, stats).run(checkpoint, until);
}

}  // namespace rlzg
