#include "rlzg/lz_parser.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rlzg/error.hpp"
#include "rlzg/ref_store.hpp"

namespace rlzg {

namespace {

std::uint64_t common_prefix(const Symbol* a, const Symbol* b, std::uint64_t limit) {
  std::uint64_t n = 0;
  while (n < limit && a[n] == b[n]) ++n;
  return n;
}

bool is_cheap(const Candidate& c, const DiagonalState& diag, std::uint64_t pos, const ParseParams& params) {
  if (c.in_reservoir) return false;
  const std::int64_t d = diag.delta(c, pos);
  return (d < 0 ? -d : d) < static_cast<std::int64_t>(params.cheap_offset_bound);
}

// Sort key for equal cover: |delta|, reservoir candidates last.
std::uint64_t offset_cost(const Candidate& c, const DiagonalState& diag, std::uint64_t pos) {
  if (c.in_reservoir) return std::numeric_limits<std::uint64_t>::max();
  const std::int64_t d = diag.delta(c, pos);
  return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

// True when a ranks strictly before b: longer cover, then cheaper offset,
// then smaller position.
bool ranks_before(const Candidate& a, const Candidate& b, const DiagonalState& diag, std::uint64_t pos) {
  if (a.covered != b.covered) return a.covered > b.covered;
  const std::uint64_t ca = offset_cost(a, diag, pos);
  const std::uint64_t cb = offset_cost(b, diag, pos);
  if (ca != cb) return ca < cb;
  return a.ref_pos < b.ref_pos;
}

}  // namespace

Candidate extend_candidate(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                           std::uint64_t ref_pos, const ParseParams& params) {
  const auto ext = index.extended();
  const std::uint64_t ref_limit = index.region_end(ref_pos);
  const std::uint64_t n = seq.size();

  Candidate c;
  c.ref_pos = ref_pos;
  c.in_reservoir = ref_pos >= index.reference_length();
  std::uint64_t s = pos;
  std::uint64_t r = ref_pos;
  std::uint64_t len = common_prefix(seq.data() + s, ext.data() + r, std::min(n - s, ref_limit - r));
  c.pieces[0] = static_cast<std::uint32_t>(len);
  c.piece_count = 1;
  s += len;
  r += len;
  while (c.piece_count <= params.gap_limit && s + 1 < n && r + 1 < ref_limit) {
    const std::uint64_t ext_len =
        common_prefix(seq.data() + s + 1, ext.data() + r + 1, std::min(n - s - 1, ref_limit - r - 1));
    if (ext_len < params.min_extension) break;
    c.gaps[c.piece_count - 1] = seq[s];
    c.pieces[c.piece_count++] = static_cast<std::uint32_t>(ext_len);
    s += 1 + ext_len;
    r += 1 + ext_len;
  }
  c.covered = s - pos;
  return c;
}

std::vector<Candidate> candidates_at(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                                     const ParseParams& params) {
  std::vector<Candidate> out;
  if (pos + index.k() > seq.size()) return out;
  std::vector<std::uint32_t> hits;
  index.find_candidates(seq.subspan(pos, index.k()), hits);
  out.reserve(hits.size());
  for (std::uint32_t h : hits) out.push_back(extend_candidate(index, seq, pos, h, params));
  return out;
}

std::optional<Candidate> longest_match_at(const KmerIndex& index, std::span<const Symbol> seq, std::uint64_t pos,
                                          const ParseParams& params, const DiagonalState& diag) {
  std::optional<Candidate> best;
  for (const Candidate& c : candidates_at(index, seq, pos, params)) {
    if (c.pieces[0] < params.min_match) continue;
    if (!best || ranks_before(c, *best, diag, pos)) best = c;
  }
  return best;
}

const Candidate& choose_factor(const Candidate& best, const Candidate& alt, const DiagonalState& diag,
                               std::uint64_t pos, const ParseParams& params) {
  const bool cheap_best = is_cheap(best, diag, pos, params);
  const bool cheap_alt = is_cheap(alt, diag, pos, params);
  if (cheap_alt && !cheap_best) {
    return best.covered <= alt.covered + params.length_slack ? alt : best;
  }
  if (!cheap_alt && cheap_best) {
    return alt.covered > best.covered + params.length_slack ? alt : best;
  }
  return ranks_before(alt, best, diag, pos) ? alt : best;
}

namespace {

class Parser {
 public:
  Parser(KmerIndex& index, std::span<const Symbol> seq, const ParseParams& params, const ReservoirSink& sink,
         std::int64_t base)
      : index_(index), seq_(seq), params_(params), sink_(sink) {
    diag_.base = base;
    parse_.source_length = seq.size();
  }

  Parse run() {
    const std::uint64_t n = seq_.size();
    std::uint64_t pos = 0;
    while (pos < n) {
      while (pos >= next_checkpoint_) {
        diag_.previous = 0;
        next_checkpoint_ += params_.checkpoint_interval;
      }
      if (seq_[pos] == kN) {
        std::uint64_t run = 1;
        while (pos + run < n && seq_[pos + run] == kN) ++run;
        if (run >= params_.min_match) {
          close_literals();
          parse_.factors.push_back(Factor::n_run(run));
          pos += run;
          continue;
        }
        // Too short for a pseudomatch, and no gram containing N is indexed.
        for (std::uint64_t i = 0; i < run; ++i) add_literal(pos + i);
        pos += run;
        continue;
      }
      if (const Candidate* c = select(pos)) {
        close_literals();
        emit(*c, pos);
        pos += c->covered;
        continue;
      }
      add_literal(pos);
      ++pos;
    }
    close_literals();
    return std::move(parse_);
  }

 private:
  const Candidate* select(std::uint64_t pos) {
    candidates_.clear();
    if (pos + index_.k() > seq_.size()) return nullptr;
    index_.find_candidates(seq_.subspan(pos, index_.k()), hits_);
    if (hits_.empty()) return nullptr;
    for (std::uint32_t h : hits_) candidates_.push_back(extend_candidate(index_, seq_, pos, h, params_));
    std::sort(candidates_.begin(), candidates_.end(),
              [&](const Candidate& a, const Candidate& b) { return ranks_before(a, b, diag_, pos); });
    const Candidate* chosen = &candidates_.front();
    for (std::size_t i = 1; i < candidates_.size(); ++i) {
      chosen = &choose_factor(*chosen, candidates_[i], diag_, pos, params_);
    }
    return chosen;
  }

  void emit(const Candidate& c, std::uint64_t pos) {
    if (c.in_reservoir) {
      parse_.factors.push_back(
          Factor::reservoir_match(c.ref_pos - index_.reference_length(), c.piece_lengths(), c.gap_symbols()));
    } else {
      parse_.factors.push_back(Factor::match(c.ref_pos, c.piece_lengths(), c.gap_symbols()));
      diag_.previous = static_cast<std::int64_t>(pos) + diag_.base - static_cast<std::int64_t>(c.ref_pos);
    }
  }

  void add_literal(std::uint64_t pos) {
    if (literals_.empty()) literal_start_ = pos;
    literals_.push_back(seq_[pos]);
  }

  void close_literals() {
    if (literals_.empty()) return;
    if (sink_ && literals_.size() >= params_.min_reservoir_run) sink_(literal_start_, literals_);
    parse_.factors.push_back(Factor::literal(std::move(literals_)));
    literals_ = {};
  }

  KmerIndex& index_;
  std::span<const Symbol> seq_;
  const ParseParams& params_;
  const ReservoirSink& sink_;
  DiagonalState diag_;
  std::uint64_t next_checkpoint_ = 0;
  Parse parse_;
  std::vector<Symbol> literals_;
  std::uint64_t literal_start_ = 0;
  std::vector<std::uint32_t> hits_;
  std::vector<Candidate> candidates_;
};

}  // namespace

Parse parse_sequence(KmerIndex& index, std::span<const Symbol> seq, const ParseParams& params,
                     const ReservoirSink& sink, std::int64_t diagonal_base) {
  validate_params(params);
  if (index.k() != params.min_match) {
    fail(ErrorKind::kInvalidArgument, "index gram length differs from the min match length");
  }
  return Parser(index, seq, params, sink, diagonal_base).run();
}

void apply_factor_slice(const Factor& f, std::uint64_t lo, std::uint64_t hi, const SymbolFetch& reference,
                        const SymbolFetch& reservoir, std::vector<Symbol>& out) {
  if (lo > hi || hi > f.source_advance()) fail(ErrorKind::kInternal, "factor slice out of range");
  switch (f.kind) {
    case FactorKind::kLiteral:
      out.insert(out.end(), f.symbols.begin() + static_cast<std::ptrdiff_t>(lo),
                 f.symbols.begin() + static_cast<std::ptrdiff_t>(hi));
      return;
    case FactorKind::kNRun:
      out.insert(out.end(), hi - lo, kN);
      return;
    case FactorKind::kMatch:
    case FactorKind::kReservoirMatch: {
      const std::size_t first = out.size();
      const SymbolFetch& store = f.kind == FactorKind::kMatch ? reference : reservoir;
      if (!store) corrupt("match refers to an unavailable store");
      store(f.target + lo, hi - lo, out);
      if (out.size() != first + (hi - lo)) corrupt("match source returned the wrong number of symbols");
      // Gaps substitute single symbols at fixed factor offsets.
      std::uint64_t gap_at = 0;
      for (std::size_t g = 0; g < f.gap_count(); ++g) {
        gap_at += f.pieces[g];
        if (gap_at >= lo && gap_at < hi) out[first + (gap_at - lo)] = f.symbols[g];
        gap_at += 1;
      }
      return;
    }
  }
}

std::vector<Symbol> apply_parse(const Parse& parse, const SymbolFetch& reference, const SymbolFetch& reservoir) {
  std::vector<Symbol> out;
  out.reserve(parse.source_length);
  for (const Factor& f : parse.factors) apply_factor_slice(f, 0, f.source_advance(), reference, reservoir, out);
  if (out.size() != parse.source_length) corrupt("parse does not reproduce the declared source length");
  return out;
}

namespace {

SymbolFetch span_fetch(std::span<const Symbol> store) {
  return [store](std::uint64_t pos, std::uint64_t length, std::vector<Symbol>& out) {
    if (pos > store.size() || length > store.size() - pos) {
      corrupt("factor points outside its store (" + std::to_string(pos) + "+" + std::to_string(length) + " > " +
              std::to_string(store.size()) + ")");
    }
    out.insert(out.end(), store.begin() + static_cast<std::ptrdiff_t>(pos),
               store.begin() + static_cast<std::ptrdiff_t>(pos + length));
  };
}

}  // namespace

std::vector<Symbol> apply_parse(const Parse& parse, std::span<const Symbol> reference,
                                std::span<const Symbol> reservoir) {
  return apply_parse(parse, span_fetch(reference), span_fetch(reservoir));
}

ReservoirSink make_reservoir_sink(KmerIndex& index, ReservoirProvenance& provenance, std::uint32_t sequence_index,
                                  const ParseParams& params) {
  return [&index, &provenance, sequence_index, params](std::uint64_t source_pos, std::span<const Symbol> run) {
    provenance.append({sequence_index, source_pos, run.size()}, params.min_reservoir_run);
    index.extend_with_reservoir(run, index.extended_length());
  };
}

}  // namespace rlzg
