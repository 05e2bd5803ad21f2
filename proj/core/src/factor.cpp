#include "rlzg/factor.hpp"

#include <algorithm>
#include <string>

#include "rlzg/error.hpp"

namespace rlzg {

void validate_params(const ParseParams& p) {
  auto bad = [](const std::string& what) { fail(ErrorKind::kInvalidArgument, "invalid parameters: " + what); };
  if (p.min_match < 4 || p.min_match > kMaxGramLength) bad("min match length must be in 4..32");
  if (p.min_extension < 1 || p.min_extension >= p.min_match) bad("need min match > min extension >= 1");
  if (p.min_reservoir_run < p.min_match) bad("reservoir run minimum must be at least the min match length");
  if (p.gap_limit != kGapLimit) bad("gap limit is fixed at 2");
  if (p.cheap_offset_bound == 0 || p.length_slack == 0) bad("heuristic bounds must be positive");
  if (p.candidate_cap == 0) bad("candidate cap must be positive");
  if (p.checkpoint_interval == 0) bad("checkpoint interval must be positive");
}

namespace {

Factor make_match(FactorKind kind, std::uint64_t target, std::span<const std::uint32_t> piece_lengths,
                  std::span<const Symbol> gap_symbols) {
  if (piece_lengths.empty() || piece_lengths.size() > kGapLimit + 1) {
    fail(ErrorKind::kInvalidArgument, "a match has 1 to 3 pieces");
  }
  if (gap_symbols.size() + 1 != piece_lengths.size()) {
    fail(ErrorKind::kInvalidArgument, "a match needs exactly one gap symbol between consecutive pieces");
  }
  Factor f;
  f.kind = kind;
  f.target = target;
  std::copy(piece_lengths.begin(), piece_lengths.end(), f.pieces.begin());
  f.piece_count = static_cast<std::uint8_t>(piece_lengths.size());
  f.symbols.assign(gap_symbols.begin(), gap_symbols.end());
  return f;
}

}  // namespace

Factor Factor::literal(std::vector<Symbol> run_symbols) {
  Factor f;
  f.kind = FactorKind::kLiteral;
  f.symbols = std::move(run_symbols);
  return f;
}

Factor Factor::n_run(std::uint64_t length) {
  Factor f;
  f.kind = FactorKind::kNRun;
  f.run = length;
  return f;
}

Factor Factor::match(std::uint64_t ref_pos, std::span<const std::uint32_t> piece_lengths,
                     std::span<const Symbol> gap_symbols) {
  return make_match(FactorKind::kMatch, ref_pos, piece_lengths, gap_symbols);
}

Factor Factor::reservoir_match(std::uint64_t reservoir_offset, std::span<const std::uint32_t> piece_lengths,
                               std::span<const Symbol> gap_symbols) {
  return make_match(FactorKind::kReservoirMatch, reservoir_offset, piece_lengths, gap_symbols);
}

std::uint64_t Factor::source_advance() const noexcept {
  switch (kind) {
    case FactorKind::kLiteral:
      return symbols.size();
    case FactorKind::kNRun:
      return run;
    case FactorKind::kMatch:
    case FactorKind::kReservoirMatch: {
      std::uint64_t total = gap_count();
      for (std::uint32_t len : piece_lengths()) total += len;
      return total;
    }
  }
  return 0;
}

void validate_parse(const Parse& parse, const ParseParams& params) {
  std::uint64_t covered = 0;
  for (std::size_t i = 0; i < parse.factors.size(); ++i) {
    const Factor& f = parse.factors[i];
    auto bad = [&](const std::string& what) {
      fail(ErrorKind::kInvalidArgument, "factor " + std::to_string(i) + ": " + what);
    };
    switch (f.kind) {
      case FactorKind::kLiteral:
        if (f.symbols.empty()) bad("empty literal run");
        break;
      case FactorKind::kNRun:
        if (f.run < params.min_match) bad("N-run shorter than the min match length");
        break;
      case FactorKind::kMatch:
      case FactorKind::kReservoirMatch:
        if (f.piece_count == 0 || f.piece_count > params.gap_limit + 1) bad("bad piece count");
        if (f.symbols.size() != f.gap_count()) bad("gap symbol count does not match pieces");
        if (f.pieces[0] < params.min_match) bad("first piece shorter than the min match length");
        for (std::size_t p = 1; p < f.piece_count; ++p) {
          if (f.pieces[p] < params.min_extension) bad("extension piece shorter than the min extension");
        }
        break;
    }
    covered += f.source_advance();
  }
  if (covered != parse.source_length) {
    fail(ErrorKind::kInvalidArgument, "factors cover " + std::to_string(covered) + " symbols, source has " +
                                          std::to_string(parse.source_length));
  }
}

}  // namespace rlzg
