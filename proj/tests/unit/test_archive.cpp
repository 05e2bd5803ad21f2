#include <doctest.h>

#include <boost/crc.hpp>

#include "fixtures.hpp"
#include "rlzg/archive.hpp"
#include "rlzg/error.hpp"

using namespace rlzg;

namespace {

std::vector<Symbol> slice(const std::vector<Symbol>& v, std::uint64_t a, std::uint64_t b) {
  return {v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(b)};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInternal;
}

void put_u64(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[at + static_cast<std::size_t>(i)]} << (8 * i);
  return v;
}

void reseal(std::vector<std::uint8_t>& bytes) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
  crc.process_bytes(bytes.data() + 13, bytes.size() - 13);
  put_u64(bytes, 5, crc.checksum());
}

Collection small_family(testing::Rng& rng, std::size_t ref_len = 30'000) {
  const auto ref = testing::random_acgt(rng, ref_len);
  testing::MutationMix mix;
  mix.snp_rate = 0.005;
  mix.indels = 6;
  mix.n_runs = 1;
  mix.max_n_run = 3000;
  mix.novel_segments = 2;
  std::vector<std::vector<Symbol>> copies;
  const auto shared = testing::random_acgt(rng, 200);
  for (int i = 0; i < 4; ++i) {
    auto c = testing::mutate(rng, ref, mix);
    c.insert(c.begin() + static_cast<std::ptrdiff_t>(c.size() / 2), shared.begin(), shared.end());
    copies.push_back(std::move(c));
  }
  return testing::family(ref, copies);
}

std::size_t reservoir_factors(const CompressStats& stats) {
  std::size_t n = 0;
  for (const auto& p : stats.parses) {
    for (const auto& f : p.factors) n += f.kind == FactorKind::kReservoirMatch;
  }
  return n;
}

}  // namespace

TEST_CASE("single sequence archive has no relative part") {
  testing::Rng rng(201);
  Collection c;
  c.sequences.push_back({"only", testing::random_acgt(rng, 10'000)});
  const auto a = compress(c, ParseParams{});
  CHECK(a.sizes().relative_payload == 0);
  CHECK(a.sizes().relative_part() == 0);
  CHECK(a.sizes().total == a.sizes().header + a.sizes().reference_payload);
  CHECK(decompress(a) == c);
}

TEST_CASE("identical copy costs a handful of bytes") {
  testing::Rng rng(203);
  const auto ref = testing::random_acgt(rng, 100'000);
  const auto c = testing::family(ref, {ref});
  CompressStats stats;
  const auto a = compress(c, ParseParams{}, {true}, &stats);
  REQUIRE(stats.parses[1].factors.size() == 1);
  CHECK(a.sizes().relative_payload < 64);
  // Checkpoint table of 13 windows, nearly all empty.
  CHECK(a.sizes().relative_tables < 150);
  CHECK(decompress(a) == c);
}

TEST_CASE("round-trip and determinism") {
  testing::Rng rng(207);
  for (int trial = 0; trial < 6; ++trial) {
    auto c = small_family(rng);
    c.reference_index = static_cast<std::size_t>(trial % 2);
    ParseParams p;
    p.checkpoint_interval = trial % 3 == 0 ? 1000 : 8192;
    CompressStats stats;
    const auto a = compress(c, p, {true}, &stats);
    CHECK(decompress(a) == c);
    CHECK(decompress(a, {3}) == c);
    CHECK(compress(c, p).bytes() == a.bytes());
    CHECK(Archive::from_bytes(a.bytes()).header().params == p);
    CHECK(stats.input_symbols > 0);
  }
}

TEST_CASE("shared novel material goes through the reservoir") {
  testing::Rng rng(211);
  const auto c = small_family(rng);
  CompressStats stats;
  const auto a = compress(c, ParseParams{}, {true}, &stats);
  CHECK(a.header().reservoir.entries().size() >= 1);
  CHECK(reservoir_factors(stats) >= 1);
}

TEST_CASE("extract matches slices of the full decompression") {
  testing::Rng rng(213);
  const auto c = small_family(rng, 60'000);
  ParseParams p;
  p.checkpoint_interval = 2048;
  CompressStats stats;
  const auto a = compress(c, p, {true}, &stats);
  const auto full = decompress(a);
  for (int q = 0; q < 400; ++q) {
    const std::size_t s = rng() % c.sequences.size();
    const auto n = full.sequences[s].length();
    const std::uint64_t lo = rng() % (n + 1);
    const std::uint64_t hi = lo + rng() % std::min<std::uint64_t>(n - lo + 1, 5000);
    CHECK(extract(a, full.sequences[s].name, lo, hi) == slice(full.sequences[s].symbols, lo, hi));
  }
  CHECK(extract(a, "d1", 10, 10).empty());
  CHECK(kind_of([&] { extract(a, "d1", 10, 9); }) == ErrorKind::kOutOfRange);
  CHECK(kind_of([&] { extract(a, "d1", 0, full.sequences[1].length() + 1); }) == ErrorKind::kOutOfRange);
  CHECK(kind_of([&] { extract(a, "nope", 0, 1); }) == ErrorKind::kNotFound);
}

TEST_CASE("extract inside a reservoir match resolves through its origin") {
  testing::Rng rng(217);
  const auto ref = testing::random_acgt(rng, 20'000);
  const auto novel = testing::random_acgt(rng, 500);
  auto a_seq = slice(ref, 0, 10'000);
  a_seq.insert(a_seq.end(), novel.begin(), novel.end());
  auto b_seq = slice(ref, 5000, 15'000);
  b_seq.insert(b_seq.begin() + 3000, novel.begin(), novel.end());
  const auto c = testing::family(ref, {a_seq, b_seq});
  CompressStats stats;
  const auto a = compress(c, ParseParams{}, {true}, &stats);

  std::uint64_t pos = 0;
  const Factor* hit = nullptr;
  for (const auto& f : stats.parses[2].factors) {
    if (f.kind == FactorKind::kReservoirMatch) {
      hit = &f;
      break;
    }
    pos += f.source_advance();
  }
  REQUIRE(hit != nullptr);
  CHECK(pos == 3000);
  ExtractStats es;
  const auto got = extract(a, "d2", pos + 10, pos + 400, &es);
  CHECK(got == slice(novel, 10, 400));
  CHECK(es.reservoir_lookups >= 1);
  CHECK(got == extract(a, "d1", 10'010, 10'400));
}

TEST_CASE("extract of the reference record") {
  testing::Rng rng(219);
  const auto c = small_family(rng);
  const auto a = compress(c, ParseParams{});
  ExtractStats es;
  CHECK(extract(a, "ref", 8000, 9000, &es) == slice(c.sequences[0].symbols, 8000, 9000));
  CHECK(es.coded_bytes_read == 0);
  CHECK(es.reference_bytes_read > 0);
}

TEST_CASE("extract work is local") {
  testing::Rng rng(223);
  const auto ref = testing::random_acgt(rng, 400'000);
  testing::MutationMix mix;
  mix.snp_rate = 0.01;
  const auto c = testing::family(ref, {testing::mutate(rng, ref, mix)});
  const auto a = compress(c, ParseParams{});
  ExtractStats es;
  extract(a, "d1", 200'000, 200'100, &es);
  CHECK(es.windows_decoded <= 2);
  CHECK(es.coded_bytes_read < a.sizes().relative_payload / 10);
  CHECK(es.reference_bytes_read < a.sizes().reference_payload / 10);
}

TEST_CASE("corruption handling") {
  testing::Rng rng(227);
  const auto c = small_family(rng, 10'000);
  const auto a = compress(c, ParseParams{});
  const auto& good = a.bytes();

  auto truncated = good;
  truncated.resize(good.size() / 2);
  CHECK(kind_of([&] { Archive::from_bytes(truncated); }) == ErrorKind::kCorrupt);
  for (std::size_t len : {0u, 3u, 20u}) {
    CHECK(kind_of([&] { Archive::from_bytes(std::vector<std::uint8_t>(good.begin(), good.begin() + len)); }) ==
          ErrorKind::kCorrupt);
  }

  auto newer = good;
  newer[4] = kArchiveVersion + 1;
  CHECK(kind_of([&] { Archive::from_bytes(newer); }) == ErrorKind::kUnsupportedVersion);

  auto magic = good;
  magic[0] = 'X';
  CHECK(kind_of([&] { Archive::from_bytes(magic); }) == ErrorKind::kCorrupt);

  for (int trial = 0; trial < 50; ++trial) {
    auto flipped = good;
    flipped[5 + rng() % (flipped.size() - 5)] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    CHECK(kind_of([&] { Archive::from_bytes(flipped); }) == ErrorKind::kCorrupt);
  }
}

TEST_CASE("structurally bad archives with a valid checksum") {
  testing::Rng rng(229);
  const auto c = small_family(rng, 10'000);
  const auto a = compress(c, ParseParams{});
  int rejected = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto bytes = a.bytes();
    bytes[21 + rng() % (bytes.size() - 21)] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    reseal(bytes);
    try {
      const auto damaged = Archive::from_bytes(bytes);
      const auto out = decompress(damaged);
      CHECK(out.sequences.size() == c.sequences.size());
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::kCorrupt || e.kind() == ErrorKind::kUnsupportedVersion));
      ++rejected;
    }
  }
  CHECK(rejected > 0);
}

TEST_CASE("unknown header sections are skipped") {
  testing::Rng rng(233);
  const auto c = small_family(rng, 10'000);
  auto bytes = compress(c, ParseParams{}).bytes();
  const std::uint64_t header_length = get_u64(bytes, 13);
  const std::vector<std::uint8_t> extra{99, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 'x', 'y', 'z'};
  bytes.insert(bytes.begin() + static_cast<std::ptrdiff_t>(21 + header_length), extra.begin(), extra.end());
  put_u64(bytes, 13, header_length + extra.size());
  reseal(bytes);
  CHECK(decompress(Archive::from_bytes(bytes)) == c);
}

TEST_CASE("grouped collections and per-record matching") {
  testing::Rng rng(239);
  const auto chr1 = testing::random_acgt(rng, 40'000);
  const auto chr2 = testing::random_acgt(rng, 30'000);
  testing::MutationMix mix;
  mix.snp_rate = 0.003;
  mix.indels = 4;
  Collection c;
  c.sequences = {{"chr1", chr1},
                 {"chr2", chr2},
                 {"chr2", testing::mutate(rng, chr2, mix)},
                 {"chr1", testing::mutate(rng, chr1, mix)},
                 {"chrUn", testing::mutate(rng, chr1, mix)},
                 {"chr1", testing::mutate(rng, chr1, mix)}};
  c.groups = {"ref", "ref", "g1", "g1", "g1", "g2"};
  for (auto mode : {MatchingGranularity::kWholeSequence, MatchingGranularity::kPerRecord}) {
    c.granularity = mode;
    c.reference_index = 1;
    CompressStats stats;
    const auto a = compress(c, ParseParams{}, {true}, &stats);
    CHECK(decompress(a) == c);
    CHECK(a.find_sequence("g1/chr1") == 3);
    CHECK(a.find_sequence("chrUn") == 4);
    CHECK(kind_of([&] { a.find_sequence("chr1"); }) == ErrorKind::kInvalidArgument);
    CHECK(extract(a, "g2/chr1", 100, 200) == slice(c.sequences[5].symbols, 100, 200));
    // Counterparts by name keep the offset predictor on the diagonal.
    const auto& h = a.header();
    CHECK(h.sequences[2].diagonal_base == 40'000);
    CHECK(h.sequences[3].diagonal_base == 0);
    // chrUn has no namesake; it is third in its group and the reference has two records.
    CHECK(h.sequences[4].diagonal_base == 0);
    for (std::size_t i = 2; i < 6; ++i) CHECK(stats.parses[i].factors.size() < 200);
  }
}

TEST_CASE("reference selection") {
  testing::Rng rng(241);
  Collection c;
  c.sequences = {{"n", std::vector<Symbol>(1000, kN)}, {"r", testing::random_acgt(rng, 1000)}};
  CHECK(select_reference(c, 13).index == 1);
  CHECK(select_reference(c, 13).windows == 1000 - 12);

  const auto acgt = symbols_from_text("ACGT");
  std::vector<Symbol> long_seq, short_seq;
  for (int i = 0; i < 100; ++i) long_seq.insert(long_seq.end(), acgt.begin(), acgt.end());
  for (int i = 0; i < 50; ++i) short_seq.insert(short_seq.end(), acgt.begin(), acgt.end());
  c.sequences = {{"short", short_seq}, {"long", long_seq}};
  CHECK(select_reference(c, 13).index == 1);

  auto holed = testing::random_acgt(rng, 500);
  const auto clean = testing::random_acgt(rng, 500);
  holed[250] = kN;
  CHECK(count_nfree_windows(clean, 13) - count_nfree_windows(holed, 13) == 13);
  c.sequences = {{"holed", holed}, {"clean", clean}};
  CHECK(select_reference(c, 13).index == 1);

  c.sequences = {{"a", clean}, {"b", clean}};
  CHECK(select_reference(c, 13).index == 0);
}

TEST_CASE("invalid inputs to compress") {
  CHECK(kind_of([] { compress(Collection{}, ParseParams{}); }) == ErrorKind::kInvalidArgument);
  Collection c;
  c.sequences = {{"a", {kA}}};
  ParseParams p;
  p.min_extension = 20;
  CHECK(kind_of([&] { compress(c, p); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("empty and all-N sequences") {
  Collection c;
  c.sequences = {{"ref", std::vector<Symbol>(20'000, kN)}, {"e", {}}, {"n", std::vector<Symbol>(9000, kN)},
                 {"x", symbols_from_text("ACGTNNA")}};
  const auto a = compress(c, ParseParams{});
  CHECK(a.sizes().reference_payload == 0);
  CHECK(decompress(a) == c);
  CHECK(extract(a, "n", 100, 8000) == std::vector<Symbol>(7900, kN));
  CHECK(extract(a, "e", 0, 0).empty());
}
