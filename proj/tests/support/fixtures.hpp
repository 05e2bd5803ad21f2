#pragma once

// Deterministic sequence generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rlzg/genome.hpp"

namespace rlzg::testing {

using Rng = std::mt19937_64;

inline std::vector<Symbol> random_acgt(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(0, 3);
  std::vector<Symbol> out(n);
  for (auto& s : out) s = static_cast<Symbol>(d(rng));
  return out;
}

// Symbol at a random position changed to a different base.
inline Symbol other_base(Rng& rng, Symbol s) {
  std::uniform_int_distribution<int> d(1, 3);
  return static_cast<Symbol>((s + d(rng)) % 4);
}

struct MutationMix {
  double snp_rate = 0.001;
  std::size_t indels = 0;         // count of insertions plus deletions
  std::size_t max_indel = 100;
  std::size_t n_runs = 0;
  std::size_t max_n_run = 50'000;
  std::size_t novel_segments = 0;
  std::size_t novel_min = 32;
  std::size_t novel_max = 400;
};

// Derived copy of `ref`: SNPs first, then structural edits at random spots.
inline std::vector<Symbol> mutate(Rng& rng, std::vector<Symbol> seq, const MutationMix& mix) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (auto& s : seq) {
    if (s != kN && coin(rng) < mix.snp_rate) s = other_base(rng, s);
  }
  auto spot = [&] { return std::uniform_int_distribution<std::size_t>(0, seq.size())(rng); };
  for (std::size_t i = 0; i < mix.indels; ++i) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, mix.max_indel)(rng);
    const std::size_t at = spot();
    if (i % 2 == 0) {
      const auto ins = random_acgt(rng, len);
      seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(at), ins.begin(), ins.end());
    } else {
      const std::size_t n = std::min(len, seq.size() - at);
      seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(at), seq.begin() + static_cast<std::ptrdiff_t>(at + n));
    }
  }
  for (std::size_t i = 0; i < mix.n_runs; ++i) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, mix.max_n_run)(rng);
    const std::size_t at = spot();
    const std::size_t n = std::min(len, seq.size() - at);
    std::fill_n(seq.begin() + static_cast<std::ptrdiff_t>(at), n, kN);
  }
  for (std::size_t i = 0; i < mix.novel_segments; ++i) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(mix.novel_min, mix.novel_max)(rng);
    const auto ins = random_acgt(rng, len);
    const std::size_t at = spot();
    seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(at), ins.begin(), ins.end());
  }
  return seq;
}

// Reference followed by `copies` derived sequences named d1, d2, ...
inline Collection family(const std::vector<Symbol>& ref, const std::vector<std::vector<Symbol>>& copies) {
  Collection c;
  c.sequences.push_back({"ref", ref});
  for (std::size_t i = 0; i < copies.size(); ++i) c.sequences.push_back({"d" + std::to_string(i + 1), copies[i]});
  return c;
}

// The mixed collections used by the round-trip property: reference 64 kB to
// 1 MB, 3 to 8 derived copies. Later copies sometimes reuse novel material
// of earlier ones so the reservoir gets exercised.
inline Collection random_collection(Rng& rng, std::size_t min_ref = 64 * 1024, std::size_t max_ref = 1024 * 1024) {
  const std::size_t ref_len = std::uniform_int_distribution<std::size_t>(min_ref, max_ref)(rng);
  std::vector<Symbol> ref = random_acgt(rng, ref_len);
  if (rng() % 2) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(100, 20'000)(rng);
    const std::size_t at = rng() % (ref.size() - std::min(ref.size(), len) + 1);
    std::fill_n(ref.begin() + static_cast<std::ptrdiff_t>(at), std::min(len, ref.size() - at), kN);
  }
  const std::size_t copies = std::uniform_int_distribution<std::size_t>(3, 8)(rng);
  std::vector<std::vector<Symbol>> derived;
  std::vector<Symbol> shared_novel = random_acgt(rng, std::uniform_int_distribution<std::size_t>(32, 600)(rng));
  for (std::size_t i = 0; i < copies; ++i) {
    MutationMix mix;
    mix.snp_rate = std::uniform_real_distribution<double>(0.001, 0.02)(rng);
    mix.indels = rng() % 12;
    mix.n_runs = rng() % 3;
    mix.max_n_run = std::min<std::size_t>(50'000, ref_len / 4);
    mix.novel_segments = 1 + rng() % 4;
    std::vector<Symbol> seq = mutate(rng, ref, mix);
    const std::size_t at = rng() % (seq.size() + 1);
    seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(at), shared_novel.begin(), shared_novel.end());
    derived.push_back(std::move(seq));
  }
  return family(ref, derived);
}

// `m` substitutions spaced `gap` apart, starting `gap` symbols in.
inline std::vector<Symbol> with_isolated_snps(Rng& rng, std::vector<Symbol> seq, std::size_t m, std::size_t gap) {
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t at = i * gap;
    seq.at(at) = other_base(rng, seq[at]);
  }
  return seq;
}

}  // namespace rlzg::testing
