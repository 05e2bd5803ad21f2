#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "rlzg/archive.hpp"
#include "rlzg/huffman.hpp"
#include "rlzg/kmer_index.hpp"

using namespace rlzg;

namespace {

// 1 MB reference plus 10 copies at 0.1% SNPs.
const Collection& desk_collection() {
  static const Collection c = [] {
    testing::Rng rng(5);
    const auto ref = testing::random_acgt(rng, 1'000'000);
    testing::MutationMix mix;
    mix.snp_rate = 0.001;
    std::vector<std::vector<Symbol>> copies;
    for (int i = 0; i < 10; ++i) copies.push_back(testing::mutate(rng, ref, mix));
    return testing::family(ref, copies);
  }();
  return c;
}

const Archive& desk_archive() {
  static const Archive a = compress(desk_collection(), ParseParams{});
  return a;
}

std::int64_t symbol_count(const Collection& c) {
  std::int64_t n = 0;
  for (const auto& s : c.sequences) n += static_cast<std::int64_t>(s.length());
  return n;
}

void BM_Compress(benchmark::State& state) {
  const auto& c = desk_collection();
  for (auto _ : state) benchmark::DoNotOptimize(compress(c, ParseParams{}));
  state.SetBytesProcessed(state.iterations() * symbol_count(c));
}
BENCHMARK(BM_Compress)->Unit(benchmark::kMillisecond);

void BM_Decompress(benchmark::State& state) {
  const auto& a = desk_archive();
  const DecompressOptions opts{static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(decompress(a, opts));
  state.SetBytesProcessed(state.iterations() * symbol_count(desk_collection()));
}
BENCHMARK(BM_Decompress)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Extract(benchmark::State& state) {
  const auto& a = desk_archive();
  const auto length = static_cast<std::uint64_t>(state.range(0));
  testing::Rng rng(8);
  std::uint64_t coded = 0;
  for (auto _ : state) {
    const std::size_t seq = 1 + rng() % 10;
    const std::uint64_t n = a.header().sequences[seq].length;
    const std::uint64_t lo = rng() % (n - length);
    ExtractStats st;
    benchmark::DoNotOptimize(extract(a, seq, lo, lo + length, &st));
    coded += st.coded_bytes_read + st.reference_bytes_read;
  }
  state.counters["bytes_read_per_extract"] =
      benchmark::Counter(static_cast<double>(coded) / static_cast<double>(state.iterations()));
}
BENCHMARK(BM_Extract)->Arg(100)->Arg(10'000)->Arg(100'000);

void BM_KmerIndexBuild(benchmark::State& state) {
  const auto& ref = desk_collection().sequences[0].symbols;
  for (auto _ : state) benchmark::DoNotOptimize(KmerIndex(ref, 13, 128));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(ref.size()));
}
BENCHMARK(BM_KmerIndexBuild)->Unit(benchmark::kMillisecond);

void BM_HuffmanEncode(benchmark::State& state) {
  testing::Rng rng(9);
  std::vector<std::uint8_t> data(1 << 20);
  std::geometric_distribution<int> geo(0.2);
  for (auto& b : data) b = static_cast<std::uint8_t>(std::min(geo(rng), 255));
  const auto table = HuffmanTable::build(tally(data));
  std::vector<std::uint8_t> out;
  for (auto _ : state) {
    out.clear();
    BitWriter w(out);
    encode_stream(data, table, w);
    w.flush_to_byte_boundary();
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_HuffmanEncode);

}  // namespace

BENCHMARK_MAIN();
